//! Data-parallel dispatch.
//!
//! Every parallel section in the crate maps a closure over a slice and collects
//! the results in input order, so callers can reduce them in a fixed order and
//! obtain bit-identical output whatever the thread count. With the `parallel`
//! feature disabled, or with [`Mode::Sequential`] selected at runtime, the same
//! closures run on the calling thread.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(if cfg!(feature = "parallel") { 1 } else { 0 });

/// Selects the execution mode for subsequent parallel sections.
///
/// Requesting [`Mode::Parallel`] without the `parallel` feature is a no-op.
pub fn set_mode(mode: Mode) {
    let v = match mode {
        Mode::Parallel if cfg!(feature = "parallel") => 1,
        _ => 0,
    };
    MODE.store(v, Ordering::Relaxed);
}

pub fn mode() -> Mode {
    if MODE.load(Ordering::Relaxed) == 1 {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// Applies `f` to every item and returns the results in input order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Applies `f` to every index in `0..n` and returns the results in order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Applies `f` to consecutive chunks of `chunk` items.
///
/// Chunk boundaries depend only on `chunk`, never on the thread count.
pub fn map_chunks<T, R, F>(items: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel {
        use rayon::prelude::*;
        return items.par_chunks(chunk).map(f).collect();
    }
    items.chunks(chunk).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let items: Vec<u32> = (0..1000).collect();
        for m in [Mode::Sequential, Mode::Parallel] {
            set_mode(m);
            let out = map(&items, |x| x * 2);
            assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
            let sums = map_chunks(&items, 64, |c| c.iter().sum::<u32>());
            assert_eq!(sums.len(), 16);
            assert_eq!(sums.iter().sum::<u32>(), items.iter().sum::<u32>());
        }
        set_mode(Mode::Parallel);
    }
}

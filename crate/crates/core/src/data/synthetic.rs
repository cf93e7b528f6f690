//! Disjoint transitive chains under one relation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

use super::{TransitiveChain, Triple, TripleStore, Vocab};

pub const SYNTHETIC_RELATION: &str = "transitive";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub chains: usize,
    /// Entities per chain.
    pub length: usize,
    /// Fraction of each chain's non-adjacent closure pairs moved into train.
    pub keep: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub store: TripleStore,
    pub chains: Vec<TransitiveChain>,
}

/// Builds `chains` chains of `length` fresh entities.
///
/// Train holds every chain edge plus `round(keep · n)` of each chain's `n`
/// non-adjacent closure pairs, chosen uniformly; test holds the rest. The
/// validation split is empty.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    if spec.length < 3 {
        return Err(Error::input(format!(
            "chain length must be at least 3, got {}",
            spec.length
        )));
    }
    if !(0.0..=1.0).contains(&spec.keep) {
        return Err(Error::input(format!(
            "keep fraction {} outside [0, 1]",
            spec.keep
        )));
    }
    if spec.chains == 0 {
        return Err(Error::input("at least one chain is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entities = Vocab::new();
    let relations = Vocab::from_names([SYNTHETIC_RELATION])?;
    let mut chains = Vec::with_capacity(spec.chains);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..spec.chains {
        let ids: Vec<u32> = (0..spec.length)
            .map(|j| entities.insert(&format!("chain{c}_e{j}")))
            .collect();
        let chain = TransitiveChain::new(ids, 0)?;
        let edges = chain.edges();
        let mut derived: Vec<Triple> = chain
            .closure()
            .into_iter()
            .filter(|t| !edges.contains(t))
            .collect();
        derived.shuffle(&mut rng);
        let kept = (spec.keep * derived.len() as f64).round() as usize;
        train.extend_from_slice(&edges);
        train.extend_from_slice(&derived[..kept]);
        test.extend_from_slice(&derived[kept..]);
        chains.push(chain);
    }
    let store = TripleStore::new(entities, relations, train, Vec::new(), test)?;
    Ok(SyntheticDataset { store, chains })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::closure::transitive_closure;

    fn spec(chains: usize, length: usize, keep: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            chains,
            length,
            keep,
            seed,
        }
    }

    #[test]
    fn single_chain_keep_zero() {
        let ds = generate_synthetic(&spec(1, 4, 0.0, 1)).unwrap();
        assert_eq!(ds.store.train().len(), 3);
        assert_eq!(ds.store.test().len(), 3);
    }

    #[test]
    fn two_chains_half_kept() {
        let ds = generate_synthetic(&spec(2, 5, 0.5, 1)).unwrap();
        assert_eq!(ds.store.test().len(), 6);
        assert_eq!(ds.store.train().len(), 2 * 4 + 6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_synthetic(&spec(1, 4, 1.5, 0)).is_err());
        assert!(generate_synthetic(&spec(1, 4, -0.1, 0)).is_err());
        assert!(generate_synthetic(&spec(1, 2, 0.5, 0)).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&spec(3, 6, 0.3, 9)).unwrap();
        let b = generate_synthetic(&spec(3, 6, 0.3, 9)).unwrap();
        assert_eq!(a.store.train(), b.store.train());
        assert_eq!(a.store.test(), b.store.test());
    }

    #[test]
    fn store_closure_equals_chain_edge_closure() {
        let ds = generate_synthetic(&spec(4, 6, 0.3, 2)).unwrap();
        let chain_edges: Vec<(u32, u32)> = ds
            .chains
            .iter()
            .flat_map(|c| c.edges())
            .map(|t| (t.head, t.tail))
            .collect();
        assert_eq!(
            transitive_closure(&ds.store.edges_of(0)),
            transitive_closure(&chain_edges)
        );
        for c in &ds.chains {
            c.validate(&ds.store).unwrap();
        }
    }
}

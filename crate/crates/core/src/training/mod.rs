//! Training: configuration, losses, gradients, sampling and the optimisation loop.

pub mod config;
pub mod grad;
pub mod init;
pub mod loss;
pub mod optim;
pub mod sampling;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::{resolve_config, ConstraintMode, GateMode, PhaseInterval, TrainConfig, PRESETS};
pub use grad::{backward, batch_loss, Gradients, LossParts};
pub use init::init_parameters;
pub use optim::Adam;
pub use sampling::{sample_negatives, NegativeBatch};

use crate::data::{Triple, TripleStore};
use crate::eval::evaluate_filtered;
use crate::model::Model;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub l_s: f64,
    pub l_p: f64,
    pub total: f64,
    pub valid_mrr: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub trace: Vec<TraceRow>,
}

/// Keeps rotation phases inside `interval`, either by clamping or by wrapping
/// with the interval width as period.
pub fn constrain_phases(model: &mut Model, mode: ConstraintMode, interval: PhaseInterval) {
    let Some(t) = model.rotation_mut() else {
        return;
    };
    let (lo, hi, w) = (interval.lo, interval.hi, interval.width());
    match mode {
        ConstraintMode::None => {}
        ConstraintMode::Clamp => t.theta_r.iter_mut().for_each(|v| *v = v.clamp(lo, hi)),
        ConstraintMode::Wrap => t.theta_r.iter_mut().for_each(|v| {
            if *v < lo || *v >= hi {
                *v = lo + (*v - lo).rem_euclid(w);
            }
        }),
    }
}

/// Trains from seeded initial parameters.
pub fn train(cfg: &TrainConfig, store: &TripleStore) -> Result<TrainOutcome> {
    let model = init_parameters(cfg, store.n_entities(), store.n_relations());
    train_from(cfg, store, model, &mut |_| {})
}

/// Trains `model` in place, calling `observer` for every trace row.
///
/// Each step draws `batch_size` positives uniformly with replacement from the
/// training split, samples negatives, takes one Adam step and applies the phase
/// constraint. A non-finite loss aborts with [`Error::Diverged`].
pub fn train_from(
    cfg: &TrainConfig,
    store: &TripleStore,
    mut model: Model,
    observer: &mut dyn FnMut(&TraceRow),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if store.train().is_empty() {
        return Err(Error::EmptySplit {
            split: "train".into(),
            path: Default::default(),
        });
    }
    if model.kind != cfg.model || model.dim() != cfg.dim {
        return Err(Error::Config {
            key: "model".into(),
            reason: format!(
                "initial parameters are {} d={} but config asks for {} d={}",
                model.kind,
                model.dim(),
                cfg.model,
                cfg.dim
            ),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let train = store.train();
    let bs = cfg.batch_size;
    let mut positives: Vec<Triple> = Vec::with_capacity(bs);
    let mut adam = Adam::new(&model, cfg);
    let mut trace = Vec::new();

    for step in 0..cfg.max_steps {
        positives.clear();
        positives.extend((0..bs).map(|_| train[rng.random_range(0..train.len())]));
        let batch = sample_negatives(
            store,
            &positives,
            cfg.negatives,
            cfg.filter_negatives,
            &mut rng,
        )?;
        let (parts, grads) = backward(&model, cfg, &batch);
        if !parts.total.is_finite() {
            return Err(Error::Diverged {
                step,
                detail: format!("L_s = {}, L_p = {}", parts.l_s, parts.l_p),
            });
        }
        adam.step(
            &mut model,
            &grads.planes,
            optim::learning_rate_at(cfg, step),
        );
        constrain_phases(&mut model, cfg.phase_constraint, cfg.constraint_interval);

        let last = step + 1 == cfg.max_steps;
        let validate = cfg.valid_every > 0
            && ((step + 1) % cfg.valid_every == 0 || last)
            && !store.valid().is_empty();
        let log = step == 0 || last || (cfg.log_every > 0 && step % cfg.log_every == 0);
        if validate || log {
            let valid_mrr = if validate {
                Some(evaluate_filtered(&model, store, store.valid(), None)?.mrr)
            } else {
                None
            };
            let row = TraceRow {
                step,
                l_s: parts.l_s,
                l_p: parts.l_p,
                total: parts.total,
                valid_mrr,
            };
            log::info!(
                "step {step}: L = {:.6} (L_s {:.6}, L_p {:.6}){}",
                row.total,
                row.l_s,
                row.l_p,
                valid_mrr
                    .map(|m| format!(", valid MRR {m:.4}"))
                    .unwrap_or_default()
            );
            observer(&row);
            trace.push(row);
        }
    }
    if !model.is_finite() {
        return Err(Error::Diverged {
            step: cfg.max_steps,
            detail: "non-finite parameters after training".into(),
        });
    }
    Ok(TrainOutcome { model, trace })
}

/// Writes `step,L_s,L_p,L,valid_mrr`, leaving `valid_mrr` empty when absent.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut f =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let mut body = String::from("step,L_s,L_p,L,valid_mrr\n");
    for r in rows {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            r.step,
            r.l_s,
            r.l_p,
            r.total,
            r.valid_mrr.map(|m| m.to_string()).unwrap_or_default()
        ));
    }
    f.write_all(body.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    f.flush().map_err(|e| Error::io(path, e))
}

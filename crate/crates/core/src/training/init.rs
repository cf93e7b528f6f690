use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::TrainConfig;
use crate::model::{Model, ModelKind, Relations};

/// Seeded initial parameters.
///
/// Entity coordinates are uniform in `(−e, e)`, rotation and projection
/// phases uniform in the configured phase interval and `a`, `b` uniform in
/// `ab_init`. RotatE keeps identity projections; TransE draws translations
/// like entities.
pub fn init_parameters(cfg: &TrainConfig, n_entities: usize, n_relations: usize) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = Model::zeros(cfg.model, cfg.norm, n_entities, n_relations, cfg.dim);
    let e = cfg.entity_init;
    for v in model
        .entities
        .re
        .iter_mut()
        .chain(model.entities.im.iter_mut())
    {
        *v = rng.random_range(-e..e);
    }
    let (plo, phi) = (cfg.phase_init.lo, cfg.phase_init.hi);
    match &mut model.relations {
        Relations::Rotation(t) => {
            for v in &mut t.theta_r {
                *v = rng.random_range(plo..phi);
            }
            if cfg.model == ModelKind::RotPro {
                for v in &mut t.theta_p {
                    *v = rng.random_range(plo..phi);
                }
                let (lo, hi) = cfg.ab_init;
                for v in t.a.iter_mut().chain(t.b.iter_mut()) {
                    *v = if lo < hi {
                        rng.random_range(lo..hi)
                    } else {
                        lo
                    };
                }
            }
        }
        Relations::Translation(t) => {
            for v in t.re.iter_mut().chain(t.im.iter_mut()) {
                *v = rng.random_range(-e..e);
            }
        }
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::config::PhaseInterval;

    #[test]
    fn ranges_and_determinism() {
        let mut cfg = TrainConfig {
            dim: 16,
            phase_init: PhaseInterval::HALF_PI,
            ..TrainConfig::default()
        };
        let m = init_parameters(&cfg, 10, 3);
        assert_eq!(m, init_parameters(&cfg, 10, 3));
        let t = m.rotation().unwrap();
        assert!(t
            .theta_r
            .iter()
            .chain(&t.theta_p)
            .all(|v| v.abs() < std::f64::consts::FRAC_PI_2));
        assert!(t.a.iter().chain(&t.b).all(|v| (0.5..1.0).contains(v)));
        assert!(m.entities.re.iter().all(|v| v.abs() < 1.0));
        cfg.seed = 1;
        assert_ne!(m, init_parameters(&cfg, 10, 3));
        cfg.model = ModelKind::RotatE;
        let r = init_parameters(&cfg, 10, 3);
        let t = r.rotation().unwrap();
        assert!(t.a.iter().chain(&t.b).all(|&v| v == 1.0) && t.theta_p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mean_of_a_is_interval_midpoint() {
        let cfg = TrainConfig {
            dim: 100,
            ..TrainConfig::default()
        };
        let m = init_parameters(&cfg, 1, 100);
        let a = &m.rotation().unwrap().a;
        assert_eq!(a.len(), 10_000);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        let (lo, hi) = cfg.ab_init;
        let sigma = (hi - lo) / 12f64.sqrt() / (a.len() as f64).sqrt();
        assert!((mean - 0.5 * (lo + hi)).abs() < 3.0 * sigma, "{mean}");
    }
}

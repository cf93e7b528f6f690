//! Hand-built parameter sets realising the transitive geometry exactly.
//!
//! Every dimension of the single relation uses `(a, b) = (1, 0)` and `θr = 0`.
//! Chain entities are placed on the line `cos θp·x − sin θp·y = c_k`, so they
//! all project to the same point and every pair of the chain's closure has
//! distance zero. Optionally some dimensions alternate the sign of `c_k` along
//! the chain, which reproduces the misplaced arrangement that rotation by `π`
//! can only partially fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DistanceNorm, Model, ModelKind};
use crate::geometry::Point2;

#[derive(Debug, Clone)]
pub struct ChainConstruction {
    /// Number of chain entities.
    pub len: usize,
    pub dim: usize,
    /// Dimensions (taken from the end) whose axis offset alternates in sign.
    pub alternating_dims: usize,
    pub seed: u64,
}

impl ChainConstruction {
    pub fn new(len: usize, dim: usize) -> Self {
        Self {
            len,
            dim,
            alternating_dims: 0,
            seed: 0,
        }
    }

    pub fn alternating(mut self, dims: usize) -> Self {
        self.alternating_dims = dims.min(self.dim);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Entity `j` is the `j`-th chain member; relation 0 is the transitive relation.
    pub fn build(&self) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut model = Model::zeros(
            ModelKind::RotPro,
            DistanceNorm::Modulus,
            self.len,
            1,
            self.dim,
        );
        let first_alternating = self.dim - self.alternating_dims;
        let mut thetas = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let theta_p: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            // Offsets bounded away from zero so alternating dims really flip.
            let offset = rng.random_range(0.5..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let (s, c) = theta_p.sin_cos();
            for j in 0..self.len {
                let sign = if k >= first_alternating && j % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                let along: f64 = rng.random_range(-1.0..1.0);
                let cj = sign * offset;
                // cj·(cos, −sin) + along·(sin, cos) lies on cos·x − sin·y = cj.
                model.entities.set_point(
                    j,
                    k,
                    Point2::new(cj * c + along * s, -cj * s + along * c),
                );
            }
            thetas.push(theta_p);
        }
        let t = model.rotation_mut().expect("rotpro model");
        t.theta_p.copy_from_slice(&thetas);
        t.theta_r.fill(0.0);
        t.a.fill(1.0);
        t.b.fill(0.0);
        model
    }
}

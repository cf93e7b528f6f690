use super::config::TrainConfig;
use crate::model::Model;

/// Dense Adam over every parameter plane.
#[derive(Debug, Clone)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    pub fn new(model: &Model, cfg: &TrainConfig) -> Self {
        let zeros: Vec<Vec<f64>> = model.planes().iter().map(|p| vec![0.0; p.len()]).collect();
        Self {
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_epsilon,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One update with learning rate `lr`; the model's frozen planes are left untouched.
    pub fn step(&mut self, model: &mut Model, grads: &[Vec<f64>], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let frozen = model.frozen_planes();
        for (i, plane) in model.planes_mut().into_iter().enumerate() {
            if frozen.contains(&i) {
                continue;
            }
            let (m, v, g) = (&mut self.m[i], &mut self.v[i], &grads[i]);
            for j in 0..plane.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                plane[j] -= lr * (m[j] / c1) / ((v[j] / c2).sqrt() + self.eps);
            }
        }
    }
}

/// Step decay: `lr · factor^⌊step / every⌋`.
pub fn learning_rate_at(cfg: &TrainConfig, step: usize) -> f64 {
    match step.checked_div(cfg.lr_decay_every) {
        Some(k) => cfg.learning_rate * cfg.lr_decay_factor.powi(k as i32),
        None => cfg.learning_rate,
    }
}

//! Self-adversarial margin loss and the projection penalty.

use super::config::GateMode;

/// `log σ(x)`, stable for large `|x|`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax of `temperature · (−d)` over one positive's negative distances.
///
/// The weights are treated as constants by the gradient.
pub fn adversarial_weights(neg_distances: &[f64], temperature: f64) -> Vec<f64> {
    if neg_distances.is_empty() {
        return Vec::new();
    }
    let logits: Vec<f64> = neg_distances.iter().map(|d| -temperature * d).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Loss of one positive with its negatives, given fixed weights.
pub fn triple_loss(pos_distance: f64, neg_distances: &[f64], weights: &[f64], gamma: f64) -> f64 {
    let neg: f64 = neg_distances
        .iter()
        .zip(weights)
        .map(|(d, p)| p * log_sigmoid(d - gamma))
        .sum();
    -log_sigmoid(gamma - pos_distance) - neg
}

/// Batch-mean loss; `neg_distances` holds `n` entries per positive, contiguous.
pub fn loss_main(
    pos_distances: &[f64],
    neg_distances: &[f64],
    gamma: f64,
    temperature: f64,
) -> f64 {
    if pos_distances.is_empty() {
        return 0.0;
    }
    let n = neg_distances.len() / pos_distances.len();
    let total: f64 = pos_distances
        .iter()
        .enumerate()
        .map(|(i, &dp)| {
            let negs = &neg_distances[i * n..(i + 1) * n];
            triple_loss(dp, negs, &adversarial_weights(negs, temperature), gamma)
        })
        .sum();
    total / pos_distances.len() as f64
}

/// Gate multiplier for one projection entry.
#[inline]
pub fn gate(v: f64, gamma_m: f64, beta: f64, mode: GateMode) -> f64 {
    let prod = (v - 1.0) * v;
    let near = match mode {
        GateMode::Absolute => prod.abs() < gamma_m,
        GateMode::Signed => prod < gamma_m,
    };
    if near {
        1.0
    } else {
        beta
    }
}

/// `‖(v − 1)·v·q‖₂` over one relation's entries, adding its gradient into `grad` scaled by `scale`.
fn penalty_norm(
    values: &[f64],
    gamma_m: f64,
    beta: f64,
    mode: GateMode,
    grad: Option<(&mut [f64], f64)>,
) -> f64 {
    let mut sq = 0.0;
    let w: Vec<(f64, f64)> = values
        .iter()
        .map(|&v| {
            let q = gate(v, gamma_m, beta, mode);
            let wk = (v - 1.0) * v * q;
            sq += wk * wk;
            (wk, q)
        })
        .collect();
    let norm = sq.sqrt();
    if let Some((g, scale)) = grad {
        if norm > 0.0 {
            for ((gk, &(wk, q)), &v) in g.iter_mut().zip(&w).zip(values) {
                *gk += scale * wk / norm * q * (2.0 * v - 1.0);
            }
        }
    }
    norm
}

/// Penalty summed over relations; `a` and `b` are `n_rel × dim` row-major.
pub fn loss_penalty(
    a: &[f64],
    b: &[f64],
    dim: usize,
    gamma_m: f64,
    beta: f64,
    mode: GateMode,
) -> f64 {
    a.chunks(dim)
        .zip(b.chunks(dim))
        .map(|(ra, rb)| {
            penalty_norm(ra, gamma_m, beta, mode, None)
                + penalty_norm(rb, gamma_m, beta, mode, None)
        })
        .sum()
}

/// Penalty value, adding `scale · ∂L_p` into `grad_a` and `grad_b`.
#[allow(clippy::too_many_arguments)]
pub fn penalty_with_grad(
    a: &[f64],
    b: &[f64],
    dim: usize,
    gamma_m: f64,
    beta: f64,
    mode: GateMode,
    scale: f64,
    grad_a: &mut [f64],
    grad_b: &mut [f64],
) -> f64 {
    let mut total = 0.0;
    for (((ra, rb), ga), gb) in a
        .chunks(dim)
        .zip(b.chunks(dim))
        .zip(grad_a.chunks_mut(dim))
        .zip(grad_b.chunks_mut(dim))
    {
        total += penalty_norm(ra, gamma_m, beta, mode, Some((ga, scale)));
        total += penalty_norm(rb, gamma_m, beta, mode, Some((gb, scale)));
    }
    total
}

pub fn loss_total(l_s: f64, l_p: f64, alpha: f64) -> f64 {
    l_s + alpha * l_p
}

//! Batch loss and analytic gradients.
//!
//! Positives are processed in fixed-size chunks. Each chunk accumulates its
//! gradient into sparse rows keyed by entity and relation id; chunks are then
//! merged into dense planes in chunk order, so the result does not depend on
//! how many threads ran the chunks.

use std::collections::HashMap;

use super::config::TrainConfig;
use super::loss::{
    adversarial_weights, loss_penalty, loss_total, penalty_with_grad, sigmoid, triple_loss,
};
use super::sampling::NegativeBatch;
use crate::data::Triple;
use crate::exec;
use crate::geometry::Point2;
use crate::model::{DistanceNorm, Model, ModelKind, Relations, Scorer};

/// Positives per gradient chunk.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    /// Self-adversarial margin loss, averaged over positives.
    pub l_s: f64,
    /// Projection penalty (0 for models without projections).
    pub l_p: f64,
    pub total: f64,
}

/// Dense gradients in [`Model::planes`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub planes: Vec<Vec<f64>>,
}

struct SparseRows {
    width: usize,
    slots: HashMap<u32, usize>,
    ids: Vec<u32>,
    data: Vec<f64>,
}

impl SparseRows {
    fn new(width: usize) -> Self {
        Self {
            width,
            slots: HashMap::new(),
            ids: Vec::new(),
            data: Vec::new(),
        }
    }

    fn add(&mut self, id: u32, values: &[f64]) {
        let SparseRows {
            width,
            slots,
            ids,
            data,
        } = self;
        let slot = *slots.entry(id).or_insert_with(|| {
            ids.push(id);
            data.resize(data.len() + *width, 0.0);
            ids.len() - 1
        });
        for (d, v) in data[slot * *width..(slot + 1) * *width]
            .iter_mut()
            .zip(values)
        {
            *d += v;
        }
    }
}

struct ChunkGrad {
    loss_sum: f64,
    entities: SparseRows,
    relations: SparseRows,
}

/// Scratch buffers for one triple's gradient.
struct Scratch {
    head: Vec<f64>,
    tail: Vec<f64>,
    rel: Vec<f64>,
}

#[inline]
fn residual_grad(norm: DistanceNorm, dx: f64, dy: f64, w: f64) -> Point2 {
    match norm {
        DistanceNorm::Modulus => {
            let n = (dx * dx + dy * dy).sqrt();
            if n > 0.0 {
                Point2::new(w * dx / n, w * dy / n)
            } else {
                Point2::new(0.0, 0.0)
            }
        }
        DistanceNorm::Squared => Point2::new(2.0 * w * dx, 2.0 * w * dy),
    }
}

/// Adds `w · ∂d(h, r, t)` into the scratch buffers (which are zeroed first).
///
/// Entity rows hold the real parts then the imaginary parts. Rotation rows
/// hold `θr`, `θp`, `a`, `b`; translation rows hold real then imaginary parts.
fn triple_grad(sc: &Scorer, tr: &Triple, w: f64, with_proj: bool, s: &mut Scratch) {
    let m = sc.model;
    let d = m.dim();
    let (h, r, t) = (tr.head as usize, tr.relation as usize, tr.tail as usize);
    s.head.fill(0.0);
    s.tail.fill(0.0);
    s.rel.fill(0.0);
    match &m.relations {
        Relations::Rotation(tab) => {
            for k in 0..d {
                let i = r * d + k;
                let hp = m.entities.point(h, k);
                let tp = m.entities.point(t, k);
                let pm = &sc.proj[i];
                let (cr, sr) = (sc.cos_r[i], sc.sin_r[i]);
                let ph = pm.apply(hp);
                let rh = Point2::new(cr * ph.x - sr * ph.y, sr * ph.x + cr * ph.y);
                let pt = pm.apply(tp);
                let g = residual_grad(m.norm, rh.x - pt.x, rh.y - pt.y, w);
                let u = Point2::new(cr * g.x + sr * g.y, -sr * g.x + cr * g.y);
                let gh = pm.apply(u);
                let gt = pm.apply(g);
                s.head[k] += gh.x;
                s.head[d + k] += gh.y;
                s.tail[k] -= gt.x;
                s.tail[d + k] -= gt.y;
                s.rel[k] += -g.x * rh.y + g.y * rh.x;
                if with_proj {
                    let dm11 = u.x * hp.x - g.x * tp.x;
                    let dm12 = u.x * hp.y - g.x * tp.y + u.y * hp.x - g.y * tp.x;
                    let dm22 = u.y * hp.y - g.y * tp.y;
                    let (cp, sp) = (sc.cos_p[i], sc.sin_p[i]);
                    let (cc, ss, sc_) = (cp * cp, sp * sp, sp * cp);
                    s.rel[d + k] +=
                        (tab.b[i] - tab.a[i]) * (2.0 * sc_ * (dm11 - dm22) + (cc - ss) * dm12);
                    s.rel[2 * d + k] += dm11 * cc - dm12 * sc_ + dm22 * ss;
                    s.rel[3 * d + k] += dm11 * ss + dm12 * sc_ + dm22 * cc;
                }
            }
        }
        Relations::Translation(tab) => {
            for k in 0..d {
                let i = r * d + k;
                let hp = m.entities.point(h, k);
                let tp = m.entities.point(t, k);
                let g = residual_grad(m.norm, hp.x + tab.re[i] - tp.x, hp.y + tab.im[i] - tp.y, w);
                s.head[k] += g.x;
                s.head[d + k] += g.y;
                s.rel[k] += g.x;
                s.rel[d + k] += g.y;
                s.tail[k] -= g.x;
                s.tail[d + k] -= g.y;
            }
        }
    }
}

fn rel_width(m: &Model) -> usize {
    match m.relations {
        Relations::Rotation(_) => 4 * m.dim(),
        Relations::Translation(_) => 2 * m.dim(),
    }
}

/// Distances of positives and negatives.
pub fn batch_distances(sc: &Scorer, batch: &NegativeBatch) -> (Vec<f64>, Vec<f64>) {
    let dist =
        |t: &Triple| sc.distance_unchecked(t.head as usize, t.relation as usize, t.tail as usize);
    let pos = exec::map(&batch.positives, dist);
    let neg = exec::map(&batch.negatives, dist);
    (pos, neg)
}

/// Self-adversarial weights for every negative of the batch.
pub fn batch_weights(model: &Model, cfg: &TrainConfig, batch: &NegativeBatch) -> Vec<f64> {
    let sc = model.scorer();
    let (_, neg) = batch_distances(&sc, batch);
    neg.chunks(batch.per_positive.max(1))
        .flat_map(|c| adversarial_weights(c, cfg.adversarial_temperature))
        .collect()
}

fn penalty_value(model: &Model, cfg: &TrainConfig) -> f64 {
    match (model.kind, model.rotation()) {
        (ModelKind::RotPro, Some(t)) => {
            loss_penalty(&t.a, &t.b, model.dim(), cfg.gamma_m, cfg.beta, cfg.gate)
        }
        _ => 0.0,
    }
}

/// Loss with externally fixed adversarial weights.
pub fn loss_with_weights(
    model: &Model,
    cfg: &TrainConfig,
    batch: &NegativeBatch,
    weights: &[f64],
) -> LossParts {
    let sc = model.scorer();
    let (pos, neg) = batch_distances(&sc, batch);
    let n = batch.per_positive;
    let l_s = if pos.is_empty() {
        0.0
    } else {
        pos.iter()
            .enumerate()
            .map(|(i, &dp)| {
                triple_loss(
                    dp,
                    &neg[i * n..(i + 1) * n],
                    &weights[i * n..(i + 1) * n],
                    cfg.gamma,
                )
            })
            .sum::<f64>()
            / pos.len() as f64
    };
    let l_p = penalty_value(model, cfg);
    LossParts {
        l_s,
        l_p,
        total: loss_total(l_s, l_p, cfg.alpha),
    }
}

/// Loss with weights computed from the current parameters.
pub fn batch_loss(model: &Model, cfg: &TrainConfig, batch: &NegativeBatch) -> LossParts {
    let w = batch_weights(model, cfg, batch);
    loss_with_weights(model, cfg, batch, &w)
}

/// Loss and gradient of the total objective for one batch.
pub fn backward(model: &Model, cfg: &TrainConfig, batch: &NegativeBatch) -> (LossParts, Gradients) {
    let sc = model.scorer();
    let d = model.dim();
    let n = batch.per_positive;
    let b = batch.positives.len();
    let inv_b = if b == 0 { 0.0 } else { 1.0 / b as f64 };
    let with_proj = model.kind == ModelKind::RotPro;
    let rw = rel_width(model);
    let starts: Vec<usize> = (0..b).step_by(CHUNK).collect();

    let chunks: Vec<ChunkGrad> = exec::map(&starts, |&start| {
        let end = (start + CHUNK).min(b);
        let mut out = ChunkGrad {
            loss_sum: 0.0,
            entities: SparseRows::new(2 * d),
            relations: SparseRows::new(rw),
        };
        let mut s = Scratch {
            head: vec![0.0; 2 * d],
            tail: vec![0.0; 2 * d],
            rel: vec![0.0; rw],
        };
        let mut push = |tr: &Triple, w: f64, out: &mut ChunkGrad| {
            triple_grad(&sc, tr, w, with_proj, &mut s);
            out.entities.add(tr.head, &s.head);
            out.entities.add(tr.tail, &s.tail);
            out.relations.add(tr.relation, &s.rel);
        };
        let mut neg_d = vec![0.0; n];
        for i in start..end {
            let pos = &batch.positives[i];
            let negs = batch.negatives_of(i);
            let dp =
                sc.distance_unchecked(pos.head as usize, pos.relation as usize, pos.tail as usize);
            for (slot, t) in neg_d.iter_mut().zip(negs) {
                *slot =
                    sc.distance_unchecked(t.head as usize, t.relation as usize, t.tail as usize);
            }
            let p = adversarial_weights(&neg_d, cfg.adversarial_temperature);
            out.loss_sum += triple_loss(dp, &neg_d, &p, cfg.gamma);
            push(pos, sigmoid(dp - cfg.gamma) * inv_b, &mut out);
            for ((t, &dn), &pj) in negs.iter().zip(&neg_d).zip(&p) {
                push(t, -pj * sigmoid(cfg.gamma - dn) * inv_b, &mut out);
            }
        }
        out
    });

    let mut planes: Vec<Vec<f64>> = model.planes().iter().map(|p| vec![0.0; p.len()]).collect();
    let mut loss_sum = 0.0;
    let n_rel_planes = rw / d;
    for c in &chunks {
        loss_sum += c.loss_sum;
        for (slot, &id) in c.entities.ids.iter().enumerate() {
            let row = &c.entities.data[slot * 2 * d..(slot + 1) * 2 * d];
            let base = id as usize * d;
            for k in 0..d {
                planes[0][base + k] += row[k];
                planes[1][base + k] += row[d + k];
            }
        }
        for (slot, &id) in c.relations.ids.iter().enumerate() {
            let row = &c.relations.data[slot * rw..(slot + 1) * rw];
            let base = id as usize * d;
            for p in 0..n_rel_planes {
                for k in 0..d {
                    planes[2 + p][base + k] += row[p * d + k];
                }
            }
        }
    }
    let l_s = loss_sum * inv_b;

    let mut l_p = 0.0;
    if let (ModelKind::RotPro, Some(t)) = (model.kind, model.rotation()) {
        let (head, tail) = planes.split_at_mut(5);
        l_p = penalty_with_grad(
            &t.a,
            &t.b,
            d,
            cfg.gamma_m,
            cfg.beta,
            cfg.gate,
            cfg.alpha,
            &mut head[4],
            &mut tail[0],
        );
    }
    for &f in model.frozen_planes() {
        planes[f].fill(0.0);
    }
    (
        LossParts {
            l_s,
            l_p,
            total: loss_total(l_s, l_p, cfg.alpha),
        },
        Gradients { planes },
    )
}

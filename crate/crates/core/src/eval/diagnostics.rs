//! Embedding diagnostics: phase histograms, collinearity, loss sweeps and slices.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::data::{TransitiveChain, Triple};
use crate::geometry::{axis_coordinate, project};
use crate::model::{EntityId, Model, RelationId, RelationTable};
use crate::training::loss::log_sigmoid;
use crate::{Error, Result};

/// Default tolerance for calling a projection non-trivial.
pub const NONTRIVIAL_TOLERANCE: f64 = 0.1;

/// Whether `(a, b)` is within `tol` of `(1, 0)` or `(0, 1)`.
pub fn is_nontrivial(a: f64, b: f64, tol: f64) -> bool {
    ((a - 1.0).abs() <= tol && b.abs() <= tol) || (a.abs() <= tol && (b - 1.0).abs() <= tol)
}

/// `θ` mapped into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn rotation_table(model: &Model) -> Result<&RelationTable> {
    model
        .rotation()
        .ok_or_else(|| Error::input(format!("{} has no rotation phases", model.kind)))
}

fn relation_ids(model: &Model, relation: Option<RelationId>) -> Result<Vec<usize>> {
    match relation {
        Some(r) => {
            model.check_relation(r)?;
            Ok(vec![r as usize])
        }
        None => Ok((0..model.n_relations()).collect()),
    }
}

/// Wrapped rotation phases of every non-trivially projected dimension.
pub fn nontrivial_phases(
    model: &Model,
    relation: Option<RelationId>,
    tol: f64,
) -> Result<Vec<f64>> {
    let t = rotation_table(model)?;
    let d = model.dim();
    let mut out = Vec::new();
    for r in relation_ids(model, relation)? {
        for k in 0..d {
            let i = r * d + k;
            if is_nontrivial(t.a[i], t.b[i], tol) {
                out.push(wrap_phase(t.theta_r[i]));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseHistogram {
    /// `bins + 1` edges spanning `[0, 2π]`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub tolerance: f64,
}

impl PhaseHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `bin_lo,bin_hi,count` for non-empty bins only.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,count\n");
        for (i, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                s.push_str(&format!("{},{},{}\n", self.edges[i], self.edges[i + 1], c));
            }
        }
        s
    }
}

/// Histogram of wrapped `θr` over the non-trivially projected dimensions.
pub fn phase_histogram(
    model: &Model,
    relation: Option<RelationId>,
    tolerance: f64,
    bins: usize,
) -> Result<PhaseHistogram> {
    if bins == 0 {
        return Err(Error::input("histogram needs at least one bin"));
    }
    let phases = nontrivial_phases(model, relation, tolerance)?;
    let width = TAU / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0; bins];
    for p in phases {
        counts[((p / width) as usize).min(bins - 1)] += 1;
    }
    Ok(PhaseHistogram {
        edges,
        counts,
        tolerance,
    })
}

/// Per dimension, the population standard deviation across chain entities of
/// the coordinate along the projection axis.
pub fn collinearity_check(model: &Model, chain: &TransitiveChain) -> Result<Vec<f64>> {
    if chain.entities.len() < 2 {
        return Err(Error::input(
            "collinearity needs a chain of at least two entities",
        ));
    }
    let t = rotation_table(model)?;
    model.check_relation(chain.relation)?;
    for &e in &chain.entities {
        model.check_entity(e)?;
    }
    let d = model.dim();
    let r = chain.relation as usize;
    let m = chain.entities.len() as f64;
    Ok((0..d)
        .map(|k| {
            let theta = t.theta_p[r * d + k];
            let c: Vec<f64> = chain
                .entities
                .iter()
                .map(|&e| axis_coordinate(model.entities.point(e as usize, k), theta))
                .collect();
            let mean = c.iter().sum::<f64>() / m;
            (c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m).sqrt()
        })
        .collect())
}

/// `n` evenly spaced phases from 0 to 2π inclusive (`[π]` when `n = 1`).
pub fn phase_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![std::f64::consts::PI],
        _ => (0..n).map(|i| TAU * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Sum of the positive-term losses `−log σ(γ − d)` of `triples` with every
/// rotation phase of their relations overridden by each grid value.
pub fn loss_phase_sweep(
    model: &Model,
    triples: &[Triple],
    grid: &[f64],
    gamma: f64,
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::input("phase grid is empty"));
    }
    if triples.is_empty() {
        return Err(Error::input("no triples to sweep"));
    }
    rotation_table(model)?;
    for t in triples {
        model.check_entity(t.head)?;
        model.check_entity(t.tail)?;
        model.check_relation(t.relation)?;
    }
    let d = model.dim();
    let mut rels: Vec<usize> = triples.iter().map(|t| t.relation as usize).collect();
    rels.sort_unstable();
    rels.dedup();
    let mut work = model.clone();
    let mut rows = Vec::with_capacity(grid.len());
    for &theta in grid {
        let tab = work.rotation_mut().expect("rotation table");
        for &r in &rels {
            tab.theta_r[r * d..(r + 1) * d].fill(theta);
        }
        let sc = work.scorer();
        let loss: f64 = triples
            .iter()
            .map(|t| {
                let dist =
                    sc.distance_unchecked(t.head as usize, t.relation as usize, t.tail as usize);
                -log_sigmoid(gamma - dist)
            })
            .sum();
        rows.push((theta, loss));
    }
    Ok(rows)
}

/// Indices of strict local minima of a sampled curve; endpoints count when
/// lower than their single neighbour.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] < values[i - 1];
            let right = i + 1 == n || values[i] < values[i + 1];
            n > 1 && left && right
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceRow {
    pub entity: EntityId,
    pub x: f64,
    pub y: f64,
    pub projected_x: f64,
    pub projected_y: f64,
    pub theta_p: f64,
}

/// Raw and projected coordinates of `entities` in dimension `k` under `relation`.
pub fn export_embedding_slice(
    model: &Model,
    entities: &[EntityId],
    relation: RelationId,
    k: usize,
) -> Result<Vec<SliceRow>> {
    if k >= model.dim() {
        return Err(Error::input(format!(
            "dimension {k} out of range (d = {})",
            model.dim()
        )));
    }
    model.check_relation(relation)?;
    let t = rotation_table(model)?;
    let spec = t.projection(relation as usize, k);
    entities
        .iter()
        .map(|&e| {
            model.check_entity(e)?;
            let p = model.entities.point(e as usize, k);
            let q = project(p, &spec);
            Ok(SliceRow {
                entity: e,
                x: p.x,
                y: p.y,
                projected_x: q.x,
                projected_y: q.y,
                theta_p: spec.theta_p,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("phase,loss\n");
    for (p, l) in rows {
        s.push_str(&format!("{p},{l}\n"));
    }
    s
}

pub fn collinearity_csv(residuals: &[f64]) -> String {
    let mut s = String::from("dim,residual\n");
    for (k, r) in residuals.iter().enumerate() {
        s.push_str(&format!("{k},{r}\n"));
    }
    s
}

/// Rows carry entity names resolved by `name`.
pub fn slice_csv(rows: &[SliceRow], name: impl Fn(EntityId) -> String) -> String {
    let mut s = String::from("entity,x,y,projected_x,projected_y,theta_p\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name(r.entity),
            r.x,
            r.y,
            r.projected_x,
            r.projected_y,
            r.theta_p
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::construct::ChainConstruction;
    use crate::model::tests::random_model;
    use crate::model::{DistanceNorm, ModelKind};
    use std::f64::consts::PI;

    #[test]
    fn identity_projections_give_empty_histogram() {
        let m = Model::zeros(ModelKind::RotPro, DistanceNorm::Modulus, 3, 2, 5);
        let h = phase_histogram(&m, None, NONTRIVIAL_TOLERANCE, 36).unwrap();
        assert_eq!(h.total(), 0);
        assert_eq!(h.to_csv(), "bin_lo,bin_hi,count\n");
    }

    #[test]
    fn hand_built_histogram_counts() {
        let mut m = Model::zeros(ModelKind::RotPro, DistanceNorm::Modulus, 1, 1, 6);
        let t = m.rotation_mut().unwrap();
        t.theta_r.copy_from_slice(&[0.0, PI, 0.0, PI, -PI, 1.0]);
        t.a.copy_from_slice(&[1.0, 1.0, 0.0, 0.02, 1.0, 1.0]);
        t.b.copy_from_slice(&[0.0, 0.0, 1.0, 0.97, 0.05, 1.0]);
        let h = phase_histogram(&m, Some(0), 0.1, 4).unwrap();
        // θ = 0 twice in bin 0; θ = π and −π (wrapped to π) in bin 2; dim 5 is identity.
        assert_eq!(h.counts, vec![2, 0, 3, 0]);
        assert!(h.total() <= m.n_relations() * m.dim());
    }

    #[test]
    fn collinearity_of_construction_is_zero() {
        let m = ChainConstruction::new(5, 6).seed(1).build();
        let chain = TransitiveChain::new(vec![0, 1, 2, 3, 4], 0).unwrap();
        assert!(collinearity_check(&m, &chain)
            .unwrap()
            .iter()
            .all(|&r| r < 1e-12));
    }

    #[test]
    fn collinearity_matches_direct_recomputation() {
        let m = random_model(ModelKind::RotPro, 6, 1, 4, 9);
        let chain = TransitiveChain::new(vec![5, 2, 0], 0).unwrap();
        let res = collinearity_check(&m, &chain).unwrap();
        let t = m.rotation().unwrap();
        for k in 0..4 {
            let (s, c) = t.theta_p[k].sin_cos();
            let xs: Vec<f64> = [5usize, 2, 0]
                .iter()
                .map(|&e| c * m.entities.re[e * 4 + k] - s * m.entities.im[e * 4 + k])
                .collect();
            let mean = (xs[0] + xs[1] + xs[2]) / 3.0;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 3.0;
            assert!((res[k] - var.sqrt()).abs() < 1e-14);
        }
        let short = TransitiveChain {
            entities: vec![1],
            relation: 0,
        };
        assert!(collinearity_check(&m, &short).is_err());
    }

    #[test]
    fn single_point_sweep_equals_direct_loss() {
        let m = random_model(ModelKind::RotPro, 4, 1, 3, 2);
        let triples = [Triple::new(0, 0, 1), Triple::new(2, 0, 3)];
        let rows = loss_phase_sweep(&m, &triples, &[0.7], 2.0).unwrap();
        let mut direct = m.clone();
        direct.rotation_mut().unwrap().theta_r.fill(0.7);
        let want: f64 = triples
            .iter()
            .map(|t| -log_sigmoid(2.0 - direct.distance(t.head, t.relation, t.tail).unwrap()))
            .sum();
        assert_eq!(rows, vec![(0.7, want)]);
        assert!(loss_phase_sweep(&m, &triples, &[], 2.0).is_err());
    }

    #[test]
    fn sweep_on_construction_has_minima_at_ends() {
        let m = ChainConstruction::new(4, 4).seed(0).build();
        let triples = [
            Triple::new(0, 0, 1),
            Triple::new(1, 0, 2),
            Triple::new(2, 0, 3),
        ];
        let grid = phase_grid(65);
        let rows = loss_phase_sweep(&m, &triples, &grid, 1.0).unwrap();
        assert_eq!(rows.len(), 65);
        let losses: Vec<f64> = rows.iter().map(|r| r.1).collect();
        assert_eq!(local_minima(&losses), vec![0, 64]);
    }

    #[test]
    fn slice_matches_geometry() {
        let m = random_model(ModelKind::RotPro, 5, 2, 3, 4);
        let rows = export_embedding_slice(&m, &[0, 3, 4], 1, 2).unwrap();
        let spec = m.rotation().unwrap().projection(1, 2);
        for r in &rows {
            let p = m.entities.point(r.entity as usize, 2);
            let q = project(p, &spec);
            assert_eq!((r.projected_x, r.projected_y), (q.x, q.y));
        }
        assert!(export_embedding_slice(&m, &[0], 1, 3).is_err());
        let id = Model::zeros(ModelKind::RotPro, DistanceNorm::Modulus, 2, 1, 2);
        for r in export_embedding_slice(&id, &[0, 1], 0, 1).unwrap() {
            assert_eq!((r.x, r.y), (r.projected_x, r.projected_y));
        }
    }

    #[test]
    fn construction_line_entities_project_identically() {
        let m = ChainConstruction::new(4, 2).seed(6).build();
        let rows = export_embedding_slice(&m, &[0, 1, 2, 3], 0, 1).unwrap();
        for r in &rows[1..] {
            assert!((r.projected_x - rows[0].projected_x).abs() < 1e-12);
            assert!((r.projected_y - rows[0].projected_y).abs() < 1e-12);
        }
    }
}

//! Parameter tables and scoring.
//!
//! Entity embeddings are stored structure-of-arrays: one `n × d` plane of real
//! parts and one of imaginary parts, row-major. Relation parameters follow the
//! same layout. All distances are sums over dimensions of a per-dimension
//! complex residual reduced by [`DistanceNorm`].

mod checkpoint;
pub mod construct;
mod kernel;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, ProjectionSpec};
use crate::{Error, Result};

pub use checkpoint::{
    load_checkpoint, save_checkpoint, vocab_hash, CheckpointManifest, LoadedCheckpoint,
    CHECKPOINT_FORMAT,
};
pub use kernel::Scorer;

pub type EntityId = u32;
pub type RelationId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    RotPro,
    RotatE,
    TransE,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RotPro => "rotpro",
            ModelKind::RotatE => "rotate",
            ModelKind::TransE => "transe",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rotpro" | "rot-pro" => Ok(ModelKind::RotPro),
            "rotate" => Ok(ModelKind::RotatE),
            "transe" => Ok(ModelKind::TransE),
            other => Err(format!(
                "unknown model `{other}` (expected rotpro, rotate, transe)"
            )),
        }
    }
}

/// Per-dimension reduction of the complex residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceNorm {
    /// Sum over dimensions of the complex modulus.
    Modulus,
    /// Sum over dimensions of the squared modulus.
    Squared,
}

impl DistanceNorm {
    #[inline]
    pub fn reduce(self, dx: f64, dy: f64) -> f64 {
        match self {
            DistanceNorm::Modulus => (dx * dx + dy * dy).sqrt(),
            DistanceNorm::Squared => dx * dx + dy * dy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceNorm::Modulus => "modulus",
            DistanceNorm::Squared => "squared",
        }
    }
}

impl fmt::Display for DistanceNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceNorm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "modulus" | "l1" => Ok(DistanceNorm::Modulus),
            "squared" | "l2sq" => Ok(DistanceNorm::Squared),
            other => Err(format!(
                "unknown norm `{other}` (expected modulus, squared)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityTable {
    pub n: usize,
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl EntityTable {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            n,
            dim,
            re: vec![0.0; n * dim],
            im: vec![0.0; n * dim],
        }
    }

    #[inline]
    pub fn point(&self, e: usize, k: usize) -> Point2 {
        let i = e * self.dim + k;
        Point2::new(self.re[i], self.im[i])
    }

    pub fn set_point(&mut self, e: usize, k: usize, p: Point2) {
        let i = e * self.dim + k;
        self.re[i] = p.x;
        self.im[i] = p.y;
    }
}

/// Rotation phases, projection-axis phases and diagonal relaxations.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationTable {
    pub n: usize,
    pub dim: usize,
    pub theta_r: Vec<f64>,
    pub theta_p: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl RelationTable {
    /// All-identity projections with zero phases.
    pub fn identity(n: usize, dim: usize) -> Self {
        Self {
            n,
            dim,
            theta_r: vec![0.0; n * dim],
            theta_p: vec![0.0; n * dim],
            a: vec![1.0; n * dim],
            b: vec![1.0; n * dim],
        }
    }

    pub fn projection(&self, r: usize, k: usize) -> ProjectionSpec {
        let i = r * self.dim + k;
        ProjectionSpec::new(self.a[i], self.b[i], self.theta_p[i])
    }
}

/// Complex translation vectors for the TransE baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    pub n: usize,
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Relations {
    Rotation(RelationTable),
    Translation(TranslationTable),
}

impl Relations {
    pub fn len(&self) -> usize {
        match self {
            Relations::Rotation(t) => t.n,
            Relations::Translation(t) => t.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub norm: DistanceNorm,
    pub entities: EntityTable,
    pub relations: Relations,
}

impl Model {
    /// Zero entities and identity relations (zero translations for TransE).
    pub fn zeros(
        kind: ModelKind,
        norm: DistanceNorm,
        n_entities: usize,
        n_relations: usize,
        dim: usize,
    ) -> Self {
        let relations = match kind {
            ModelKind::TransE => Relations::Translation(TranslationTable {
                n: n_relations,
                dim,
                re: vec![0.0; n_relations * dim],
                im: vec![0.0; n_relations * dim],
            }),
            _ => Relations::Rotation(RelationTable::identity(n_relations, dim)),
        };
        Self {
            kind,
            norm,
            entities: EntityTable::zeros(n_entities, dim),
            relations,
        }
    }

    pub fn dim(&self) -> usize {
        self.entities.dim
    }

    pub fn n_entities(&self) -> usize {
        self.entities.n
    }

    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn rotation(&self) -> Option<&RelationTable> {
        match &self.relations {
            Relations::Rotation(t) => Some(t),
            Relations::Translation(_) => None,
        }
    }

    pub fn rotation_mut(&mut self) -> Option<&mut RelationTable> {
        match &mut self.relations {
            Relations::Rotation(t) => Some(t),
            Relations::Translation(_) => None,
        }
    }

    /// Names of the parameter planes in checkpoint order.
    pub fn plane_names(&self) -> &'static [&'static str] {
        match self.relations {
            Relations::Rotation(_) => &["entity_re", "entity_im", "theta_r", "theta_p", "a", "b"],
            Relations::Translation(_) => {
                &["entity_re", "entity_im", "translation_re", "translation_im"]
            }
        }
    }

    /// Parameter planes in checkpoint order.
    pub fn planes(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.entities.re, &self.entities.im];
        match &self.relations {
            Relations::Rotation(t) => out.extend([&t.theta_r[..], &t.theta_p, &t.a, &t.b]),
            Relations::Translation(t) => out.extend([&t.re[..], &t.im]),
        }
        out
    }

    pub fn planes_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.entities.re, &mut self.entities.im];
        match &mut self.relations {
            Relations::Rotation(t) => {
                out.extend([&mut t.theta_r[..], &mut t.theta_p, &mut t.a, &mut t.b])
            }
            Relations::Translation(t) => out.extend([&mut t.re[..], &mut t.im]),
        }
        out
    }

    /// Planes the optimizer must leave untouched.
    ///
    /// RotatE is RotPro with `a = b = 1` held fixed, so its projection planes
    /// are frozen.
    pub fn frozen_planes(&self) -> &'static [usize] {
        match self.kind {
            ModelKind::RotatE => &[3, 4, 5],
            _ => &[],
        }
    }

    /// Rounds every parameter to `f32`, the checkpoint storage precision.
    pub fn round_to_f32(&mut self) {
        for plane in self.planes_mut() {
            for v in plane.iter_mut() {
                *v = f64::from(*v as f32);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.planes()
            .iter()
            .all(|p| p.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn check_entity(&self, e: EntityId) -> Result<usize> {
        let i = e as usize;
        if i < self.n_entities() {
            Ok(i)
        } else {
            Err(Error::input(format!(
                "entity id {e} out of range (n_entities = {})",
                self.n_entities()
            )))
        }
    }

    pub(crate) fn check_relation(&self, r: RelationId) -> Result<usize> {
        let i = r as usize;
        if i < self.n_relations() {
            Ok(i)
        } else {
            Err(Error::input(format!(
                "relation id {r} out of range (n_relations = {})",
                self.n_relations()
            )))
        }
    }

    /// Distance `‖rot(p(h), θr) − p(t)‖` (TransE: `‖h + r − t‖`).
    pub fn distance(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<f64> {
        let h = self.check_entity(h)?;
        let r = self.check_relation(r)?;
        let t = self.check_entity(t)?;
        Ok(kernel::distance_direct(self, h, r, t))
    }

    /// Plausibility score: the negated distance.
    pub fn score(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<f64> {
        self.distance(h, r, t).map(|d| -d)
    }

    /// Builds a scorer with per-relation trigonometry precomputed.
    pub fn scorer(&self) -> Scorer<'_> {
        Scorer::new(self)
    }

    /// Elementwise [`Model::score`] over parallel id arrays.
    pub fn score_batch(
        &self,
        heads: &[EntityId],
        relations: &[RelationId],
        tails: &[EntityId],
    ) -> Result<Vec<f64>> {
        self.scorer().score_batch(heads, relations, tails)
    }

    /// Scores of `(h, r, i)` for every entity `i`.
    pub fn score_all_tails(&self, h: EntityId, r: RelationId) -> Result<Vec<f64>> {
        self.scorer().score_all_tails(h, r)
    }

    /// Scores of `(i, r, t)` for every entity `i`.
    pub fn score_all_heads(&self, r: RelationId, t: EntityId) -> Result<Vec<f64>> {
        self.scorer().score_all_heads(r, t)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::{project, rotate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    pub(crate) fn random_model(kind: ModelKind, n: usize, nr: usize, d: usize, seed: u64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Model::zeros(kind, DistanceNorm::Modulus, n, nr, d);
        for p in m.entities.re.iter_mut().chain(m.entities.im.iter_mut()) {
            *p = rng.random_range(-1.0..1.0);
        }
        match &mut m.relations {
            Relations::Rotation(t) => {
                for v in t.theta_r.iter_mut().chain(t.theta_p.iter_mut()) {
                    *v = rng.random_range(-PI..PI);
                }
                if kind == ModelKind::RotPro {
                    for v in t.a.iter_mut().chain(t.b.iter_mut()) {
                        *v = rng.random_range(-0.5..1.5);
                    }
                }
            }
            Relations::Translation(t) => {
                for v in t.re.iter_mut().chain(t.im.iter_mut()) {
                    *v = rng.random_range(-1.0..1.0);
                }
            }
        }
        m
    }

    /// Straight-line evaluation through the geometry primitives.
    fn oracle_distance(m: &Model, h: usize, r: usize, t: usize) -> f64 {
        let table = m.rotation().unwrap();
        (0..m.dim())
            .map(|k| {
                let spec = table.projection(r, k);
                let theta = table.theta_r[r * m.dim() + k];
                let lhs = rotate(project(m.entities.point(h, k), &spec), theta);
                let rhs = project(m.entities.point(t, k), &spec);
                let d = lhs - rhs;
                m.norm.reduce(d.x, d.y)
            })
            .sum()
    }

    #[test]
    fn identical_embeddings_under_identity_score_zero() {
        let mut m = random_model(ModelKind::RotPro, 3, 1, 4, 1);
        let t = m.rotation_mut().unwrap();
        t.theta_r.fill(0.0);
        t.a.fill(1.0);
        t.b.fill(1.0);
        assert_eq!(m.score(2, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn matches_scalar_oracle() {
        for norm in [DistanceNorm::Modulus, DistanceNorm::Squared] {
            let mut m = random_model(ModelKind::RotPro, 5, 2, 4, 7);
            m.norm = norm;
            for h in 0..5u32 {
                for t in 0..5u32 {
                    for r in 0..2u32 {
                        let got = m.distance(h, r, t).unwrap();
                        let want = oracle_distance(&m, h as usize, r as usize, t as usize);
                        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn rotpro_with_unit_diagonal_equals_rotate_exactly() {
        let mut pro = random_model(ModelKind::RotPro, 6, 2, 8, 3);
        {
            let t = pro.rotation_mut().unwrap();
            t.a.fill(1.0);
            t.b.fill(1.0);
        }
        let mut rot = pro.clone();
        rot.kind = ModelKind::RotatE;
        rot.rotation_mut().unwrap().theta_p.fill(0.0);
        for h in 0..6 {
            for t in 0..6 {
                assert_eq!(pro.score(h, 1, t).unwrap(), rot.score(h, 1, t).unwrap());
            }
        }
    }

    #[test]
    fn out_of_range_ids_are_rejected() {
        let m = random_model(ModelKind::RotPro, 3, 1, 2, 0);
        assert!(matches!(m.score(3, 0, 0), Err(Error::Input(_))));
        assert!(matches!(m.score(0, 1, 0), Err(Error::Input(_))));
        assert!(m.score_all_tails(0, 4).is_err());
    }

    #[test]
    fn batch_scoring_edge_cases() {
        let m = random_model(ModelKind::RotPro, 10, 2, 4, 11);
        assert!(m.score_batch(&[], &[], &[]).unwrap().is_empty());
        assert_eq!(
            m.score_batch(&[1], &[1], &[7]).unwrap(),
            vec![m.score(1, 1, 7).unwrap()]
        );
        assert!(matches!(
            m.score_batch(&[1, 2], &[0], &[3, 4]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn batch_and_all_candidates_match_scalar_path() {
        for kind in [ModelKind::RotPro, ModelKind::RotatE, ModelKind::TransE] {
            let m = random_model(kind, 50, 3, 6, 5);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let hs: Vec<u32> = (0..100).map(|_| rng.random_range(0..50)).collect();
            let rs: Vec<u32> = (0..100).map(|_| rng.random_range(0..3)).collect();
            let ts: Vec<u32> = (0..100).map(|_| rng.random_range(0..50)).collect();
            let batch = m.score_batch(&hs, &rs, &ts).unwrap();
            for i in 0..100 {
                let s = m.score(hs[i], rs[i], ts[i]).unwrap();
                assert!((batch[i] - s).abs() < 1e-10);
            }
            let tails = m.score_all_tails(4, 2).unwrap();
            let heads = m.score_all_heads(1, 9).unwrap();
            assert_eq!(tails.len(), 50);
            for i in 0..50u32 {
                assert!((tails[i as usize] - m.score(4, 2, i).unwrap()).abs() < 1e-10);
                assert!((heads[i as usize] - m.score(i, 1, 9).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_construction_scores_symmetrically() {
        let mut m = random_model(ModelKind::RotPro, 8, 1, 6, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        {
            let t = m.rotation_mut().unwrap();
            t.a.fill(1.0);
            t.b.fill(1.0);
            for v in t.theta_r.iter_mut() {
                *v = if rng.random_bool(0.5) { PI } else { 0.0 };
            }
        }
        for h in 0..8 {
            for t in 0..8 {
                let ab = m.score(h, 0, t).unwrap();
                let ba = m.score(t, 0, h).unwrap();
                assert!((ab - ba).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn transe_uses_translation() {
        let mut m = Model::zeros(ModelKind::TransE, DistanceNorm::Modulus, 2, 1, 1);
        m.entities.set_point(0, 0, Point2::new(1.0, 0.0));
        m.entities.set_point(1, 0, Point2::new(1.0, 3.0));
        if let Relations::Translation(t) = &mut m.relations {
            t.im[0] = 3.0;
        }
        assert_eq!(m.distance(0, 0, 1).unwrap(), 0.0);
        assert_eq!(m.distance(1, 0, 0).unwrap(), 6.0);
    }
}

use crate::exec;
use crate::geometry::{Point2, Projector};
use crate::{Error, Result};

use super::{EntityId, Model, RelationId, Relations};

/// Per-relation, per-dimension trigonometry for fast repeated scoring.
///
/// Valid only for the parameter values it was built from.
pub struct Scorer<'a> {
    pub(crate) model: &'a Model,
    pub(crate) cos_r: Vec<f64>,
    pub(crate) sin_r: Vec<f64>,
    pub(crate) cos_p: Vec<f64>,
    pub(crate) sin_p: Vec<f64>,
    pub(crate) proj: Vec<Projector>,
}

impl<'a> Scorer<'a> {
    pub fn new(model: &'a Model) -> Self {
        let mut s = Scorer {
            model,
            cos_r: Vec::new(),
            sin_r: Vec::new(),
            cos_p: Vec::new(),
            sin_p: Vec::new(),
            proj: Vec::new(),
        };
        if let Relations::Rotation(t) = &model.relations {
            let len = t.n * t.dim;
            s.cos_r.reserve(len);
            s.sin_r.reserve(len);
            s.cos_p.reserve(len);
            s.sin_p.reserve(len);
            s.proj.reserve(len);
            for i in 0..len {
                let (sr, cr) = t.theta_r[i].sin_cos();
                let (sp, cp) = t.theta_p[i].sin_cos();
                s.cos_r.push(cr);
                s.sin_r.push(sr);
                s.cos_p.push(cp);
                s.sin_p.push(sp);
                s.proj.push(Projector::from_parts(t.a[i], t.b[i], cp, sp));
            }
        }
        s
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Transformed head coordinates: `rot(p(h), θr)`, or `h + r` for TransE.
    pub(crate) fn head_side(&self, h: usize, r: usize, out: &mut Vec<Point2>) {
        let m = self.model;
        let d = m.dim();
        out.clear();
        match &m.relations {
            Relations::Rotation(_) => {
                for k in 0..d {
                    let i = r * d + k;
                    let ph = self.proj[i].apply(m.entities.point(h, k));
                    out.push(rot(ph, self.cos_r[i], self.sin_r[i]));
                }
            }
            Relations::Translation(t) => {
                for k in 0..d {
                    let i = r * d + k;
                    let e = m.entities.point(h, k);
                    out.push(Point2::new(e.x + t.re[i], e.y + t.im[i]));
                }
            }
        }
    }

    /// Transformed tail coordinates: `p(t)`, or `t` for TransE.
    pub(crate) fn tail_side(&self, t: usize, r: usize, out: &mut Vec<Point2>) {
        let m = self.model;
        let d = m.dim();
        out.clear();
        match &m.relations {
            Relations::Rotation(_) => {
                for k in 0..d {
                    out.push(self.proj[r * d + k].apply(m.entities.point(t, k)));
                }
            }
            Relations::Translation(_) => {
                for k in 0..d {
                    out.push(m.entities.point(t, k));
                }
            }
        }
    }

    /// Distance for in-range ids.
    pub(crate) fn distance_unchecked(&self, h: usize, r: usize, t: usize) -> f64 {
        let m = self.model;
        let d = m.dim();
        let norm = m.norm;
        let ent = &m.entities;
        let mut acc = 0.0;
        match &m.relations {
            Relations::Rotation(_) => {
                for k in 0..d {
                    let i = r * d + k;
                    let pm = &self.proj[i];
                    let rh = rot(pm.apply(ent.point(h, k)), self.cos_r[i], self.sin_r[i]);
                    let pt = pm.apply(ent.point(t, k));
                    acc += norm.reduce(rh.x - pt.x, rh.y - pt.y);
                }
            }
            Relations::Translation(tr) => {
                for k in 0..d {
                    let i = r * d + k;
                    let hp = ent.point(h, k);
                    let tp = ent.point(t, k);
                    acc += norm.reduce(hp.x + tr.re[i] - tp.x, hp.y + tr.im[i] - tp.y);
                }
            }
        }
        acc
    }

    pub fn distance(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<f64> {
        let m = self.model;
        let (h, r, t) = (m.check_entity(h)?, m.check_relation(r)?, m.check_entity(t)?);
        Ok(self.distance_unchecked(h, r, t))
    }

    pub fn score(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<f64> {
        self.distance(h, r, t).map(|d| -d)
    }

    pub fn score_batch(
        &self,
        heads: &[EntityId],
        relations: &[RelationId],
        tails: &[EntityId],
    ) -> Result<Vec<f64>> {
        if heads.len() != relations.len() || heads.len() != tails.len() {
            return Err(Error::input(format!(
                "batch length mismatch: {} heads, {} relations, {} tails",
                heads.len(),
                relations.len(),
                tails.len()
            )));
        }
        let m = self.model;
        let mut idx = Vec::with_capacity(heads.len());
        for i in 0..heads.len() {
            idx.push((
                m.check_entity(heads[i])?,
                m.check_relation(relations[i])?,
                m.check_entity(tails[i])?,
            ));
        }
        Ok(exec::map(&idx, |&(h, r, t)| {
            -self.distance_unchecked(h, r, t)
        }))
    }

    /// Scores `(h, r, i)` for every entity with the head transform hoisted.
    pub fn score_all_tails(&self, h: EntityId, r: RelationId) -> Result<Vec<f64>> {
        let m = self.model;
        let (h, r) = (m.check_entity(h)?, m.check_relation(r)?);
        Ok(self.all_tails_unchecked(h, r))
    }

    /// Scores `(i, r, t)` for every entity with the tail transform hoisted.
    pub fn score_all_heads(&self, r: RelationId, t: EntityId) -> Result<Vec<f64>> {
        let m = self.model;
        let (r, t) = (m.check_relation(r)?, m.check_entity(t)?);
        Ok(self.all_heads_unchecked(r, t))
    }

    pub(crate) fn all_tails_unchecked(&self, h: usize, r: usize) -> Vec<f64> {
        let m = self.model;
        let d = m.dim();
        let norm = m.norm;
        let ent = &m.entities;
        let mut lhs = Vec::with_capacity(d);
        self.head_side(h, r, &mut lhs);
        let mut out = Vec::with_capacity(m.n_entities());
        match &m.relations {
            Relations::Rotation(_) => {
                let proj = &self.proj[r * d..(r + 1) * d];
                for e in 0..m.n_entities() {
                    let re = &ent.re[e * d..(e + 1) * d];
                    let im = &ent.im[e * d..(e + 1) * d];
                    let mut acc = 0.0;
                    for k in 0..d {
                        let pt = proj[k].apply(Point2::new(re[k], im[k]));
                        acc += norm.reduce(lhs[k].x - pt.x, lhs[k].y - pt.y);
                    }
                    out.push(-acc);
                }
            }
            Relations::Translation(_) => {
                for e in 0..m.n_entities() {
                    let re = &ent.re[e * d..(e + 1) * d];
                    let im = &ent.im[e * d..(e + 1) * d];
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += norm.reduce(lhs[k].x - re[k], lhs[k].y - im[k]);
                    }
                    out.push(-acc);
                }
            }
        }
        out
    }

    pub(crate) fn all_heads_unchecked(&self, r: usize, t: usize) -> Vec<f64> {
        let m = self.model;
        let d = m.dim();
        let norm = m.norm;
        let ent = &m.entities;
        let mut rhs = Vec::with_capacity(d);
        self.tail_side(t, r, &mut rhs);
        let mut out = Vec::with_capacity(m.n_entities());
        match &m.relations {
            Relations::Rotation(_) => {
                let base = r * d;
                for e in 0..m.n_entities() {
                    let re = &ent.re[e * d..(e + 1) * d];
                    let im = &ent.im[e * d..(e + 1) * d];
                    let mut acc = 0.0;
                    for k in 0..d {
                        let i = base + k;
                        let rh = rot(
                            self.proj[i].apply(Point2::new(re[k], im[k])),
                            self.cos_r[i],
                            self.sin_r[i],
                        );
                        acc += norm.reduce(rh.x - rhs[k].x, rh.y - rhs[k].y);
                    }
                    out.push(-acc);
                }
            }
            Relations::Translation(tr) => {
                let base = r * d;
                for e in 0..m.n_entities() {
                    let re = &ent.re[e * d..(e + 1) * d];
                    let im = &ent.im[e * d..(e + 1) * d];
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += norm.reduce(
                            re[k] + tr.re[base + k] - rhs[k].x,
                            im[k] + tr.im[base + k] - rhs[k].y,
                        );
                    }
                    out.push(-acc);
                }
            }
        }
        out
    }
}

#[inline]
fn rot(p: Point2, c: f64, s: f64) -> Point2 {
    crate::geometry::rotate_cs(p, c, s)
}

/// Single-triple distance without building a full [`Scorer`].
pub(crate) fn distance_direct(m: &Model, h: usize, r: usize, t: usize) -> f64 {
    let d = m.dim();
    let ent = &m.entities;
    let mut acc = 0.0;
    match &m.relations {
        Relations::Rotation(tab) => {
            for k in 0..d {
                let i = r * d + k;
                let (sr, cr) = tab.theta_r[i].sin_cos();
                let (sp, cp) = tab.theta_p[i].sin_cos();
                let pm = Projector::from_parts(tab.a[i], tab.b[i], cp, sp);
                let rh = rot(pm.apply(ent.point(h, k)), cr, sr);
                let pt = pm.apply(ent.point(t, k));
                acc += m.norm.reduce(rh.x - pt.x, rh.y - pt.y);
            }
        }
        Relations::Translation(tr) => {
            for k in 0..d {
                let i = r * d + k;
                let hp = ent.point(h, k);
                let tp = ent.point(t, k);
                acc += m
                    .norm
                    .reduce(hp.x + tr.re[i] - tp.x, hp.y + tr.im[i] - tp.y);
            }
        }
    }
    acc
}

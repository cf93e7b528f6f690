//! Area under the precision-recall curve.

use std::collections::HashSet;

use crate::data::{Triple, TripleStore};
use crate::model::{EntityId, Model, RelationId};
use crate::{Error, Result};

/// Trapezoidal AUC-PR.
///
/// Scores are swept from high to low with equal scores grouped into a single
/// threshold. The curve starts at recall 0, precision 1.
pub fn auc_pr(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::input(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::UndefinedMetric(
            "AUC-PR needs at least one positive label".into(),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::UndefinedMetric("AUC-PR over NaN scores".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tp, mut prev_precision) = (0usize, 1.0);
    // Accumulated in units of true positives so perfect separation sums to exactly 1.
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        area += (tp - prev_tp) as f64 * (precision + prev_precision) / 2.0;
        prev_tp = tp;
        prev_precision = precision;
    }
    Ok(area / positives as f64)
}

/// Scores every (country, relation, region) pair for the countries in the
/// test split and computes AUC-PR with the test triples as positives.
pub fn auc_pr_countries(
    model: &Model,
    store: &TripleStore,
    relation: RelationId,
    regions: &[EntityId],
) -> Result<f64> {
    let test: Vec<Triple> = store
        .test()
        .iter()
        .filter(|t| t.relation == relation)
        .copied()
        .collect();
    let truth: HashSet<Triple> = test.iter().copied().collect();
    let mut countries: Vec<EntityId> = test.iter().map(|t| t.head).collect();
    countries.sort_unstable();
    countries.dedup();
    let mut scores = Vec::with_capacity(countries.len() * regions.len());
    let mut labels = Vec::with_capacity(scores.capacity());
    for &c in &countries {
        for &r in regions {
            scores.push(model.score(c, relation, r)?);
            labels.push(truth.contains(&Triple::new(c, relation, r)));
        }
    }
    auc_pr(&scores, &labels)
}

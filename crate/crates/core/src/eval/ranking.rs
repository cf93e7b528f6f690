//! Filtered link-prediction ranking.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::data::{Triple, TripleStore};
use crate::exec;
use crate::model::{EntityId, Model};
use crate::{Error, Result};

/// Head and tail rank of one evaluated triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleRanks {
    pub triple: Triple,
    pub head: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// Ranked queries (two per triple).
    pub queries: usize,
    pub mr: f64,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

impl Metrics {
    fn from_ranks(ranks: impl Iterator<Item = f64>) -> Self {
        let (mut n, mut sum, mut rr, mut h1, mut h3, mut h10) =
            (0usize, 0.0, 0.0, 0usize, 0usize, 0usize);
        for r in ranks {
            n += 1;
            sum += r;
            rr += 1.0 / r;
            h1 += (r <= 1.0) as usize;
            h3 += (r <= 3.0) as usize;
            h10 += (r <= 10.0) as usize;
        }
        let nf = n as f64;
        Metrics {
            queries: n,
            mr: sum / nf,
            mrr: rr / nf,
            hits1: h1 as f64 / nf,
            hits3: h3 as f64 / nf,
            hits10: h10 as f64 / nf,
        }
    }

    pub fn hits(&self, k: usize) -> Option<f64> {
        match k {
            1 => Some(self.hits1),
            3 => Some(self.hits3),
            10 => Some(self.hits10),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingReport {
    pub overall: Metrics,
    pub per_relation: BTreeMap<String, Metrics>,
}

impl std::ops::Deref for RankingReport {
    type Target = Metrics;

    fn deref(&self) -> &Metrics {
        &self.overall
    }
}

impl RankingReport {
    pub fn from_ranks(store: &TripleStore, ranks: &[TripleRanks]) -> Self {
        let overall = Metrics::from_ranks(ranks.iter().flat_map(|r| [r.tail, r.head]));
        let mut by_rel: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in ranks {
            let name = store
                .relations
                .name(r.triple.relation)
                .unwrap_or("?")
                .to_string();
            by_rel.entry(name).or_default().extend([r.tail, r.head]);
        }
        let per_relation = by_rel
            .into_iter()
            .map(|(k, v)| (k, Metrics::from_ranks(v.into_iter())))
            .collect();
        RankingReport {
            overall,
            per_relation,
        }
    }

    /// `scope,queries,MR,MRR,hits@1,hits@3,hits@10` with an `all` row first.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scope,queries,MR,MRR,hits@1,hits@3,hits@10\n");
        let row = |name: &str, m: &Metrics| {
            format!(
                "{name},{},{},{},{},{},{}\n",
                m.queries, m.mr, m.mrr, m.hits1, m.hits3, m.hits10
            )
        };
        s.push_str(&row("all", &self.overall));
        for (name, m) in &self.per_relation {
            s.push_str(&row(name, m));
        }
        s
    }
}

impl fmt::Display for RankingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<24} {:>8} {:>10} {:>8} {:>8} {:>8} {:>8}",
            "scope", "queries", "MR", "MRR", "H@1", "H@3", "H@10"
        )?;
        let mut line = |name: &str, m: &Metrics| {
            writeln!(
                f,
                "{:<24} {:>8} {:>10.3} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                name, m.queries, m.mr, m.mrr, m.hits1, m.hits3, m.hits10
            )
        };
        line("all", &self.overall)?;
        for (name, m) in &self.per_relation {
            line(name, m)?;
        }
        Ok(())
    }
}

/// `1 + #better + #tied / 2` over candidates other than `target` that are not excluded.
pub fn rank_of(scores: &[f64], target: EntityId, excluded: impl Fn(EntityId) -> bool) -> f64 {
    let s = scores[target as usize];
    let (mut better, mut tied) = (0usize, 0usize);
    for (e, &c) in scores.iter().enumerate() {
        let e = e as EntityId;
        if e == target || !(c >= s) {
            continue;
        }
        if excluded(e) {
            continue;
        }
        if c > s {
            better += 1;
        } else {
            tied += 1;
        }
    }
    1.0 + better as f64 + tied as f64 / 2.0
}

fn check(model: &Model, store: &TripleStore, triples: &[Triple]) -> Result<()> {
    if triples.is_empty() {
        return Err(Error::input("cannot evaluate an empty split"));
    }
    if model.n_entities() != store.n_entities() || model.n_relations() != store.n_relations() {
        return Err(Error::input(format!(
            "model has {} entities / {} relations but the store has {} / {}",
            model.n_entities(),
            model.n_relations(),
            store.n_entities(),
            store.n_relations()
        )));
    }
    for t in triples {
        model.check_entity(t.head)?;
        model.check_entity(t.tail)?;
        model.check_relation(t.relation)?;
    }
    Ok(())
}

/// Ranks of both corruption directions; `filter` decides which candidates to skip.
fn ranks_with<F>(model: &Model, triples: &[Triple], filter: F) -> Vec<TripleRanks>
where
    F: Fn(&Triple) -> bool + Sync + Send,
{
    let sc = model.scorer();
    exec::map(triples, |t| {
        let (h, r, tl) = (t.head as usize, t.relation as usize, t.tail as usize);
        let tails = sc.all_tails_unchecked(h, r);
        let tail = rank_of(&tails, t.tail, |e| {
            filter(&Triple::new(t.head, t.relation, e))
        });
        let heads = sc.all_heads_unchecked(r, tl);
        let head = rank_of(&heads, t.head, |e| {
            filter(&Triple::new(e, t.relation, t.tail))
        });
        TripleRanks {
            triple: *t,
            head,
            tail,
        }
    })
}

/// Filtered ranks; candidates true in any split or in `extra` are skipped.
pub fn filtered_ranks(
    model: &Model,
    store: &TripleStore,
    triples: &[Triple],
    extra: Option<&HashSet<Triple>>,
) -> Result<Vec<TripleRanks>> {
    check(model, store, triples)?;
    Ok(ranks_with(model, triples, |c| {
        store.is_known_true(c.head, c.relation, c.tail) || extra.is_some_and(|x| x.contains(c))
    }))
}

/// Unfiltered ranks.
pub fn raw_ranks(
    model: &Model,
    store: &TripleStore,
    triples: &[Triple],
) -> Result<Vec<TripleRanks>> {
    check(model, store, triples)?;
    Ok(ranks_with(model, triples, |_| false))
}

pub fn evaluate_filtered(
    model: &Model,
    store: &TripleStore,
    triples: &[Triple],
    extra: Option<&HashSet<Triple>>,
) -> Result<RankingReport> {
    let ranks = filtered_ranks(model, store, triples, extra)?;
    Ok(RankingReport::from_ranks(store, &ranks))
}

pub fn evaluate_raw(
    model: &Model,
    store: &TripleStore,
    triples: &[Triple],
) -> Result<RankingReport> {
    let ranks = raw_ranks(model, store, triples)?;
    Ok(RankingReport::from_ranks(store, &ranks))
}

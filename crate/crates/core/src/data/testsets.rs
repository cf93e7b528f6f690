//! Transitivity test sets for one relation.
//!
//! - `S1`: the relation's instances in the original test split.
//! - `S2`: closure pairs whose shortest path has exactly two edges (one
//!   intermediate hop) and which are absent from every split.
//! - `S3`: closure pairs whose shortest path has three or more edges, absent
//!   from every split.
//!
//! Path lengths are measured in the relation's subgraph over all splits.

use std::path::Path;

use crate::model::RelationId;
use crate::Result;

use super::closure::shortest_path_lengths;
use super::store::write_triples;
use super::{Triple, TripleStore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitivitySets {
    pub relation: RelationId,
    pub s1: Vec<Triple>,
    pub s2: Vec<Triple>,
    pub s3: Vec<Triple>,
}

impl TransitivitySets {
    pub fn is_empty(&self) -> bool {
        self.s1.is_empty() && self.s2.is_empty() && self.s3.is_empty()
    }

    /// `(name, triples)` for the three sets in order.
    pub fn named(&self) -> [(&'static str, &[Triple]); 3] {
        [("S1", &self.s1), ("S2", &self.s2), ("S3", &self.s3)]
    }

    /// Derived triples (S2 ∪ S3); true facts that belong in the ranking filter.
    pub fn derived(&self) -> Vec<Triple> {
        self.s2.iter().chain(&self.s3).copied().collect()
    }

    /// Writes `s1.txt`, `s2.txt` and `s3.txt` as TSV.
    pub fn write_tsv(&self, store: &TripleStore, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
        for (name, triples) in self.named() {
            write_triples(
                &dir.join(format!("{}.txt", name.to_lowercase())),
                store,
                triples,
            )?;
        }
        Ok(())
    }
}

pub fn build_transitivity_testsets(store: &TripleStore, r: RelationId) -> TransitivitySets {
    let s1: Vec<Triple> = store
        .test()
        .iter()
        .filter(|t| t.relation == r)
        .copied()
        .collect();
    let mut s2 = Vec::new();
    let mut s3 = Vec::new();
    for ((h, t), depth) in shortest_path_lengths(&store.edges_of(r)) {
        if store.is_known_true(h, r, t) {
            continue;
        }
        match depth {
            2 => s2.push(Triple::new(h, r, t)),
            d if d >= 3 => s3.push(Triple::new(h, r, t)),
            _ => {}
        }
    }
    TransitivitySets {
        relation: r,
        s1,
        s2,
        s3,
    }
}

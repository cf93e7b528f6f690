//! Countries-style link prediction tasks.
//!
//! The source graph holds `locatedIn` facts (country → subregion, country →
//! region, subregion → region) and symmetric `neighborOf` facts. A set of
//! held-out countries, each keeping at least one neighbor outside the held-out
//! set, forms the validation and test splits as `(country, locatedIn, region)`.
//! The three tasks remove progressively more of the evidence from train:
//!
//! - `S1`: the held-out countries' region facts.
//! - `S2`: additionally their subregion facts.
//! - `S3`: additionally the region facts of every neighbor of a held-out country.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::EntityId;
use crate::{Error, Result};

use super::store::read_named_triples;
use super::{Triple, TripleStore, Vocab};

pub const LOCATED_IN: &str = "locatedIn";
pub const NEIGHBOR_OF: &str = "neighborOf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountriesTask {
    S1,
    S2,
    S3,
}

impl fmt::Display for CountriesTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountriesTask::S1 => "S1",
            CountriesTask::S2 => "S2",
            CountriesTask::S3 => "S3",
        })
    }
}

impl std::str::FromStr for CountriesTask {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(CountriesTask::S1),
            "S2" => Ok(CountriesTask::S2),
            "S3" => Ok(CountriesTask::S3),
            other => Err(format!(
                "unknown countries task `{other}` (expected S1, S2, S3)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountriesSpec {
    pub task: CountriesTask,
    pub n_valid: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl CountriesSpec {
    pub fn new(task: CountriesTask, seed: u64) -> Self {
        Self {
            task,
            n_valid: 24,
            n_test: 24,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CountriesDataset {
    pub store: TripleStore,
    /// Candidate answers for the test queries.
    pub regions: Vec<EntityId>,
}

/// Region entities of a countries-style store: tails of `locatedIn` that are never heads.
pub fn region_entities(store: &TripleStore) -> Result<Vec<EntityId>> {
    let located = store.relation_id(LOCATED_IN)?;
    let edges = store.edges_of(located);
    let heads: HashSet<EntityId> = edges.iter().map(|e| e.0).collect();
    let regions: BTreeSet<EntityId> = edges
        .iter()
        .map(|e| e.1)
        .filter(|t| !heads.contains(t))
        .collect();
    Ok(regions.into_iter().collect())
}

/// Builds one task from a facts TSV file.
pub fn load_countries_task(facts: &Path, spec: &CountriesSpec) -> Result<CountriesDataset> {
    countries_task(&read_named_triples(facts)?, spec)
}

pub fn countries_task(facts: &[[String; 3]], spec: &CountriesSpec) -> Result<CountriesDataset> {
    let mut entities = Vocab::new();
    let relations = Vocab::from_names([LOCATED_IN, NEIGHBOR_OF])?;
    let mut all = Vec::with_capacity(facts.len());
    for [h, r, t] in facts {
        let rel = relations.id(r).ok_or_else(|| Error::UnknownSymbol {
            kind: "relation",
            name: r.clone(),
        })?;
        let h = entities.insert(h);
        let t = entities.insert(t);
        all.push(Triple::new(h, rel, t));
    }
    let (located, neighbor) = (0, 1);

    let located_heads: HashSet<EntityId> = all
        .iter()
        .filter(|t| t.relation == located)
        .map(|t| t.head)
        .collect();
    let located_tails: HashSet<EntityId> = all
        .iter()
        .filter(|t| t.relation == located)
        .map(|t| t.tail)
        .collect();
    let is_region = |e: EntityId| located_tails.contains(&e) && !located_heads.contains(&e);
    let is_country = |e: EntityId| located_heads.contains(&e) && !located_tails.contains(&e);

    let mut region_of: BTreeMap<EntityId, EntityId> = BTreeMap::new();
    let mut neighbors: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
    for t in &all {
        if t.relation == located && is_country(t.head) && is_region(t.tail) {
            region_of.insert(t.head, t.tail);
        }
        if t.relation == neighbor {
            neighbors.entry(t.head).or_default().insert(t.tail);
            neighbors.entry(t.tail).or_default().insert(t.head);
        }
    }

    let mut candidates: Vec<EntityId> = region_of
        .keys()
        .copied()
        .filter(|c| neighbors.get(c).is_some_and(|n| !n.is_empty()))
        .collect();
    let wanted = spec.n_valid + spec.n_test;
    if candidates.len() < wanted {
        return Err(Error::input(format!(
            "only {} countries with neighbors, {wanted} requested",
            candidates.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    candidates.shuffle(&mut rng);

    // Every held-out country must keep a neighbor outside the held-out set.
    let mut held: Vec<EntityId> = Vec::with_capacity(wanted);
    let mut held_set: HashSet<EntityId> = HashSet::new();
    let keeps_free_neighbor =
        |c: EntityId, held: &HashSet<EntityId>| neighbors[&c].iter().any(|n| !held.contains(n));
    for c in candidates {
        if held.len() == wanted {
            break;
        }
        held_set.insert(c);
        let ok = keeps_free_neighbor(c, &held_set)
            && held.iter().all(|&h| keeps_free_neighbor(h, &held_set));
        if ok {
            held.push(c);
        } else {
            held_set.remove(&c);
        }
    }
    if held.len() < wanted {
        return Err(Error::input("could not select enough held-out countries"));
    }
    let test_countries = &held[..spec.n_test];
    let valid_countries = &held[spec.n_test..];

    let mut removed: HashSet<Triple> = HashSet::new();
    for &c in &held {
        removed.insert(Triple::new(c, located, region_of[&c]));
        if spec.task != CountriesTask::S1 {
            for t in &all {
                if t.relation == located && t.head == c && !is_region(t.tail) {
                    removed.insert(*t);
                }
            }
        }
        if spec.task == CountriesTask::S3 {
            for &n in &neighbors[&c] {
                if let Some(&r) = region_of.get(&n) {
                    removed.insert(Triple::new(n, located, r));
                }
            }
        }
    }

    let train: Vec<Triple> = all
        .iter()
        .filter(|t| !removed.contains(t))
        .copied()
        .collect();
    let split = |cs: &[EntityId]| -> Vec<Triple> {
        cs.iter()
            .map(|&c| Triple::new(c, located, region_of[&c]))
            .collect()
    };
    let store = TripleStore::new(
        entities,
        relations,
        train,
        split(valid_countries),
        split(test_countries),
    )?;
    let regions = region_entities(&store)?;
    Ok(CountriesDataset { store, regions })
}

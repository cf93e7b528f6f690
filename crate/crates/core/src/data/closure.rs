//! Reachability over a single relation's edges.
//!
//! A transitive relation is the union of the closures of its transitive chains,
//! so the closure of the observed edges is exactly the set of pairs joined by a
//! directed path. Self-pairs are never reported, even inside cycles.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::exec;
use crate::model::{EntityId, RelationId};
use crate::{Error, Result};

use super::{Triple, TripleStore};

/// Adjacency lists keyed by source, with sorted deduplicated targets.
fn adjacency(edges: &[(EntityId, EntityId)]) -> BTreeMap<EntityId, Vec<EntityId>> {
    let mut adj: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
    }
    for targets in adj.values_mut() {
        targets.sort_unstable();
        targets.dedup();
    }
    adj
}

/// BFS depth of every vertex reachable from `source`, excluding the source.
fn bfs_depths(adj: &BTreeMap<EntityId, Vec<EntityId>>, source: EntityId) -> Vec<(EntityId, usize)> {
    let mut depth: HashMap<EntityId, usize> = HashMap::new();
    let mut queue = VecDeque::from([source]);
    depth.insert(source, 0);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        let du = depth[&u];
        for &v in adj.get(&u).map_or(&[][..], Vec::as_slice) {
            if let Entry::Vacant(e) = depth.entry(v) {
                e.insert(du + 1);
                out.push((v, du + 1));
                queue.push_back(v);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Shortest path length for every reachable ordered pair `(e, e′)` with `e ≠ e′`.
pub fn shortest_path_lengths(
    edges: &[(EntityId, EntityId)],
) -> BTreeMap<(EntityId, EntityId), usize> {
    let adj = adjacency(edges);
    let sources: Vec<EntityId> = adj.keys().copied().collect();
    let per_source = exec::map(&sources, |&s| bfs_depths(&adj, s));
    let mut out = BTreeMap::new();
    for (s, reached) in sources.iter().zip(per_source) {
        for (v, d) in reached {
            out.insert((*s, v), d);
        }
    }
    out
}

/// All pairs joined by a directed path, computed by one BFS per source vertex.
pub fn transitive_closure(edges: &[(EntityId, EntityId)]) -> BTreeSet<(EntityId, EntityId)> {
    shortest_path_lengths(edges).into_keys().collect()
}

/// Closure of relation `r` over every split of `store`, as triples.
pub fn relation_closure(store: &TripleStore, r: RelationId) -> Vec<Triple> {
    transitive_closure(&store.edges_of(r))
        .into_iter()
        .map(|(h, t)| Triple::new(h, r, t))
        .collect()
}

/// Distinct entities linked consecutively by one relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitiveChain {
    pub entities: Vec<EntityId>,
    pub relation: RelationId,
}

impl TransitiveChain {
    pub fn new(entities: Vec<EntityId>, relation: RelationId) -> Result<Self> {
        let mut seen = entities.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != entities.len() {
            return Err(Error::input("chain entities must be pairwise distinct"));
        }
        if entities.len() < 2 {
            return Err(Error::input("a chain needs at least two entities"));
        }
        Ok(Self { entities, relation })
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// The `m − 1` consecutive triples.
    pub fn edges(&self) -> Vec<Triple> {
        self.entities
            .windows(2)
            .map(|w| Triple::new(w[0], self.relation, w[1]))
            .collect()
    }

    /// All `m(m − 1)/2` forward pairs.
    pub fn closure(&self) -> Vec<Triple> {
        let m = self.entities.len();
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                out.push(Triple::new(
                    self.entities[i],
                    self.relation,
                    self.entities[j],
                ));
            }
        }
        out
    }

    /// Fails unless every consecutive edge is a known triple of `store`.
    pub fn validate(&self, store: &TripleStore) -> Result<()> {
        for t in self.edges() {
            if !store.is_known_true(t.head, t.relation, t.tail) {
                return Err(Error::input(format!(
                    "chain edge `{}` is not in the store",
                    store.format_triple(&t)
                )));
            }
        }
        Ok(())
    }
}

/// Maximal source-to-sink paths of a DAG, as entity sequences.
///
/// Every path of the graph is a sub-path of one of these, so the union of
/// their closures equals the closure of the graph.
pub fn maximal_chains(edges: &[(EntityId, EntityId)]) -> Result<Vec<Vec<EntityId>>> {
    let adj = adjacency(edges);
    let mut indegree: BTreeMap<EntityId, usize> = BTreeMap::new();
    for (&u, targets) in &adj {
        indegree.entry(u).or_insert(0);
        for &v in targets {
            *indegree.entry(v).or_insert(0) += 1;
        }
    }
    // Kahn's algorithm doubles as the cycle check.
    let mut remaining = indegree.clone();
    let mut queue: VecDeque<EntityId> = remaining
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    let mut visited = 0;
    while let Some(u) = queue.pop_front() {
        visited += 1;
        for &v in adj.get(&u).map_or(&[][..], Vec::as_slice) {
            let d = remaining.get_mut(&v).expect("vertex");
            *d -= 1;
            if *d == 0 {
                queue.push_back(v);
            }
        }
    }
    if visited != indegree.len() {
        return Err(Error::input(
            "graph contains a cycle; maximal chains are undefined",
        ));
    }

    let mut chains = Vec::new();
    let mut path = Vec::new();
    fn walk(
        adj: &BTreeMap<EntityId, Vec<EntityId>>,
        u: EntityId,
        path: &mut Vec<EntityId>,
        out: &mut Vec<Vec<EntityId>>,
    ) {
        path.push(u);
        match adj.get(&u) {
            Some(next) if !next.is_empty() => {
                for &v in next {
                    walk(adj, v, path, out);
                }
            }
            _ => out.push(path.clone()),
        }
        path.pop();
    }
    for (&v, &d) in &indegree {
        if d == 0 {
            walk(&adj, v, &mut path, &mut chains);
        }
    }
    Ok(chains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Floyd–Warshall reachability, excluding the diagonal.
    pub(crate) fn floyd_warshall(n: usize, edges: &[(u32, u32)]) -> BTreeSet<(u32, u32)> {
        let mut reach = vec![vec![false; n]; n];
        for &(u, v) in edges {
            reach[u as usize][v as usize] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && reach[i][j] {
                    out.insert((i as u32, j as u32));
                }
            }
        }
        out
    }

    fn random_graph(n: u32, p: f64, dag: bool, seed: u64) -> Vec<(u32, u32)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && (!dag || u < v) && rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    #[test]
    fn four_chain_has_six_closure_edges() {
        let edges = [(0, 1), (1, 2), (2, 3)];
        let closure = transitive_closure(&edges);
        assert_eq!(closure.len(), 6);
        assert!(
            closure.contains(&(0, 2)) && closure.contains(&(1, 3)) && closure.contains(&(0, 3))
        );
        let depths = shortest_path_lengths(&edges);
        assert_eq!(depths[&(0, 2)], 2);
        assert_eq!(depths[&(0, 3)], 3);
    }

    #[test]
    fn single_edge_is_its_own_closure() {
        assert_eq!(transitive_closure(&[(4, 9)]), BTreeSet::from([(4, 9)]));
    }

    #[test]
    fn cycles_exclude_self_pairs() {
        let closure = transitive_closure(&[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(closure.len(), 6);
        assert!(!closure.contains(&(0, 0)));
    }

    #[test]
    fn matches_floyd_warshall_on_random_graphs() {
        for seed in 0..20 {
            let edges = random_graph(30, 0.06, seed % 2 == 0, seed);
            assert_eq!(transitive_closure(&edges), floyd_warshall(30, &edges));
        }
    }

    #[test]
    fn chain_closure_counts() {
        let chain = TransitiveChain::new(vec![5, 3, 8, 1, 2], 0).unwrap();
        assert_eq!(chain.edges().len(), 4);
        assert_eq!(chain.closure().len(), 10);
        assert!(TransitiveChain::new(vec![1, 2, 1], 0).is_err());
    }

    #[test]
    fn maximal_chains_rejects_cycles() {
        assert!(maximal_chains(&[(0, 1), (1, 0)]).is_err());
        let chains = maximal_chains(&[(0, 1), (1, 2), (0, 3)]).unwrap();
        assert_eq!(chains, vec![vec![0, 1, 2], vec![0, 3]]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn closure_is_idempotent(seed in 0u64..10_000, dag in any::<bool>()) {
            let edges = random_graph(15, 0.12, dag, seed);
            let once = transitive_closure(&edges);
            let pairs: Vec<_> = once.iter().copied().collect();
            prop_assert_eq!(transitive_closure(&pairs), once);
        }

        #[test]
        fn union_of_chain_closures_is_graph_closure(seed in 0u64..10_000) {
            let edges = random_graph(12, 0.15, true, seed);
            let mut union = BTreeSet::new();
            for chain in maximal_chains(&edges).unwrap() {
                if chain.len() < 2 {
                    continue;
                }
                for t in TransitiveChain::new(chain, 0).unwrap().closure() {
                    union.insert((t.head, t.tail));
                }
            }
            prop_assert_eq!(union, floyd_warshall(12, &edges));
        }
    }
}

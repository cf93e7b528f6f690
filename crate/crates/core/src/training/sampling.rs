//! Corrupted-triple sampling.

use rand::Rng;

use crate::data::{Triple, TripleStore};
use crate::{Error, Result};

/// Rejection attempts per negative before falling back to enumeration.
const MAX_ATTEMPTS: usize = 64;

/// Positives with `per_positive` negatives each, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeBatch {
    pub positives: Vec<Triple>,
    pub negatives: Vec<Triple>,
    pub per_positive: usize,
}

impl NegativeBatch {
    pub fn negatives_of(&self, i: usize) -> &[Triple] {
        &self.negatives[i * self.per_positive..(i + 1) * self.per_positive]
    }
}

fn corrupt(t: &Triple, head: bool, e: u32) -> Triple {
    if head {
        Triple::new(e, t.relation, t.tail)
    } else {
        Triple::new(t.head, t.relation, e)
    }
}

/// Draws `n` corruptions per positive.
///
/// Each negative independently picks the head or tail side with probability
/// one half and a uniform replacement entity. With `filter`, corruptions that
/// are train facts are redrawn; valid and test
/// triples never influence sampling; if rejection keeps failing, the
/// valid corruptions are enumerated and one is picked uniformly.
pub fn sample_negatives<R: Rng>(
    store: &TripleStore,
    positives: &[Triple],
    n: usize,
    filter: bool,
    rng: &mut R,
) -> Result<NegativeBatch> {
    let n_ent = store.n_entities() as u32;
    if n_ent < 2 {
        return Err(Error::Sampling(
            "need at least two entities to corrupt triples".into(),
        ));
    }
    let mut negatives = Vec::with_capacity(positives.len() * n);
    for pos in positives {
        for _ in 0..n {
            let mut chosen = None;
            for _ in 0..if filter { MAX_ATTEMPTS } else { 1 } {
                let cand = corrupt(pos, rng.random_bool(0.5), rng.random_range(0..n_ent));
                if !filter || !store.is_train_fact(cand.head, cand.relation, cand.tail) {
                    chosen = Some(cand);
                    break;
                }
            }
            let neg = match chosen {
                Some(c) => c,
                None => {
                    let valid: Vec<Triple> = [true, false]
                        .into_iter()
                        .flat_map(|side| (0..n_ent).map(move |e| corrupt(pos, side, e)))
                        .filter(|c| !store.is_train_fact(c.head, c.relation, c.tail))
                        .collect();
                    if valid.is_empty() {
                        return Err(Error::Sampling(format!(
                            "no valid corruption exists for {}",
                            store.format_triple(pos)
                        )));
                    }
                    valid[rng.random_range(0..valid.len())]
                }
            };
            negatives.push(neg);
        }
    }
    Ok(NegativeBatch {
        positives: positives.to_vec(),
        negatives,
        per_positive: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Vocab;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn store(n: usize, train: Vec<Triple>) -> TripleStore {
        let ents = Vocab::from_names((0..n).map(|i| format!("e{i}"))).unwrap();
        let rels = Vocab::from_names(["r"]).unwrap();
        TripleStore::new(ents, rels, train, vec![], vec![]).unwrap()
    }

    #[test]
    fn corruption_entities_are_uniform() {
        let s = store(100, vec![Triple::new(0, 0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let b = sample_negatives(&s, &[Triple::new(0, 0, 1)], draws, false, &mut rng).unwrap();
        let mut counts = [0usize; 100];
        let mut heads = 0;
        for neg in &b.negatives {
            if *neg == Triple::new(0, 0, 1) {
                continue;
            }
            if neg.head != 0 {
                heads += 1;
                counts[neg.head as usize] += 1;
            } else {
                counts[neg.tail as usize] += 1;
            }
        }
        let p = 0.01;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        // Entities 0 and 1 absorb the draws that reproduce the positive on either side.
        for (e, &c) in counts.iter().enumerate().skip(2) {
            assert!(
                (c as f64 - mean).abs() < 3.0 * sigma,
                "entity {e}: {c} vs {mean}±{sigma}"
            );
        }
        let side_sigma = (draws as f64 * 0.25).sqrt();
        assert!(
            (heads as f64 - 0.5 * draws as f64 * 0.99).abs() < 4.0 * side_sigma,
            "{heads}"
        );
    }

    #[test]
    fn filtered_sampling_avoids_known_triples() {
        // Entity 0 is related to everything except entity 5 as a tail.
        let train: Vec<Triple> = (1..5).map(|t| Triple::new(0, 0, t)).collect();
        let s = store(6, train.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = sample_negatives(&s, &train, 200, true, &mut rng).unwrap();
        assert!(b
            .negatives
            .iter()
            .all(|n| !s.is_known_true(n.head, n.relation, n.tail)));
        assert_eq!(b.negatives_of(3).len(), 200);
    }

    #[test]
    fn held_out_triples_do_not_steer_sampling() {
        let train = vec![Triple::new(0, 0, 1)];
        let test = vec![Triple::new(0, 0, 2)];
        let ents = Vocab::from_names(["e0", "e1", "e2"]).unwrap();
        let s = TripleStore::new(
            ents,
            Vocab::from_names(["r"]).unwrap(),
            train.clone(),
            vec![],
            test,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = sample_negatives(&s, &train, 400, true, &mut rng).unwrap();
        assert!(b.negatives.contains(&Triple::new(0, 0, 2)));
        assert!(!b.negatives.contains(&Triple::new(0, 0, 1)));
    }

    #[test]
    fn exhausted_corruptions_are_an_error() {
        // Complete graph with self loops: every corruption is true.
        let mut train = Vec::new();
        for h in 0..3 {
            for t in 0..3 {
                train.push(Triple::new(h, 0, t));
            }
        }
        let s = store(3, train);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = sample_negatives(&s, &[Triple::new(0, 0, 1)], 1, true, &mut rng).unwrap_err();
        assert!(matches!(e, Error::Sampling(_)));
    }

    #[test]
    fn single_entity_is_rejected() {
        let s = store(1, vec![Triple::new(0, 0, 0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_negatives(&s, s.train(), 1, false, &mut rng).is_err());
    }
}

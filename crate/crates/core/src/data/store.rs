use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::model::{EntityId, RelationId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub const fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

/// Bidirectional string ↔ id mapping; ids are dense and assigned in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocab::new();
        for n in names {
            let n = n.into();
            if v.index.contains_key(&n) {
                return Err(Error::input(format!("duplicate vocabulary entry `{n}`")));
            }
            v.insert(&n);
        }
        Ok(v)
    }

    pub fn insert(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(format!(
                "unknown split `{other}` (expected train, valid, test)"
            )),
        }
    }
}

/// Integer-encoded triples with train/valid/test splits and a filtered-truth index.
#[derive(Debug, Clone)]
pub struct TripleStore {
    pub entities: Vocab,
    pub relations: Vocab,
    train: Vec<Triple>,
    valid: Vec<Triple>,
    test: Vec<Triple>,
    known: HashSet<Triple>,
    train_known: HashSet<Triple>,
    tails_of: HashMap<(EntityId, RelationId), Vec<EntityId>>,
    heads_of: HashMap<(RelationId, EntityId), Vec<EntityId>>,
}

impl TripleStore {
    /// Builds a store, dropping duplicate triples within each split.
    pub fn new(
        entities: Vocab,
        relations: Vocab,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self> {
        let mut splits = [train, valid, test];
        for split in &mut splits {
            for t in split.iter() {
                if t.head as usize >= entities.len()
                    || t.tail as usize >= entities.len()
                    || t.relation as usize >= relations.len()
                {
                    return Err(Error::input(format!("triple {t:?} has unresolvable ids")));
                }
            }
            dedup_in_order(split);
        }
        let [train, valid, test] = splits;
        let train_known: HashSet<Triple> = train.iter().copied().collect();

        let mut known = HashSet::new();
        let mut tails_of: HashMap<_, Vec<_>> = HashMap::new();
        let mut heads_of: HashMap<_, Vec<_>> = HashMap::new();
        for t in train.iter().chain(&valid).chain(&test) {
            if known.insert(*t) {
                tails_of
                    .entry((t.head, t.relation))
                    .or_default()
                    .push(t.tail);
                heads_of
                    .entry((t.relation, t.tail))
                    .or_default()
                    .push(t.head);
            }
        }
        Ok(Self {
            entities,
            relations,
            train,
            valid,
            test,
            known,
            train_known,
            tails_of,
            heads_of,
        })
    }

    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn train(&self) -> &[Triple] {
        &self.train
    }

    pub fn valid(&self) -> &[Triple] {
        &self.valid
    }

    pub fn test(&self) -> &[Triple] {
        &self.test
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    /// Membership in the union of all splits.
    pub fn is_known_true(&self, h: EntityId, r: RelationId, t: EntityId) -> bool {
        self.known.contains(&Triple::new(h, r, t))
    }

    /// Membership in the train split alone.
    pub fn is_train_fact(&self, h: EntityId, r: RelationId, t: EntityId) -> bool {
        self.train_known.contains(&Triple::new(h, r, t))
    }

    pub fn known_tails(&self, h: EntityId, r: RelationId) -> &[EntityId] {
        self.tails_of.get(&(h, r)).map_or(&[], Vec::as_slice)
    }

    pub fn known_heads(&self, r: RelationId, t: EntityId) -> &[EntityId] {
        self.heads_of.get(&(r, t)).map_or(&[], Vec::as_slice)
    }

    pub fn known_count(&self) -> usize {
        self.known.len()
    }

    /// All triples of every split with relation `r`.
    pub fn edges_of(&self, r: RelationId) -> Vec<(EntityId, EntityId)> {
        self.train
            .iter()
            .chain(&self.valid)
            .chain(&self.test)
            .filter(|t| t.relation == r)
            .map(|t| (t.head, t.tail))
            .collect()
    }

    pub fn entity_id(&self, name: &str) -> Result<EntityId> {
        self.entities.id(name).ok_or_else(|| Error::UnknownSymbol {
            kind: "entity",
            name: name.to_string(),
        })
    }

    pub fn relation_id(&self, name: &str) -> Result<RelationId> {
        self.relations.id(name).ok_or_else(|| Error::UnknownSymbol {
            kind: "relation",
            name: name.to_string(),
        })
    }

    pub fn format_triple(&self, t: &Triple) -> String {
        format!(
            "{}\t{}\t{}",
            self.entities.name(t.head).unwrap_or("?"),
            self.relations.name(t.relation).unwrap_or("?"),
            self.entities.name(t.tail).unwrap_or("?")
        )
    }

    pub fn stats(&self) -> StoreStats {
        StoreStats {
            entities: self.n_entities(),
            relations: self.n_relations(),
            train: self.train.len(),
            valid: self.valid.len(),
            test: self.test.len(),
        }
    }

    /// Writes `train.txt`, `valid.txt` and `test.txt` in the TSV layout read by [`ingest`].
    pub fn write_tsv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for split in Split::ALL {
            write_triples(&dir.join(format!("{split}.txt")), self, self.split(split))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct StoreStats {
    pub entities: usize,
    pub relations: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl fmt::Display for StoreStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} entities, {} relations, {} train / {} valid / {} test triples",
            self.entities, self.relations, self.train, self.valid, self.test
        )
    }
}

pub fn write_triples(path: &Path, store: &TripleStore, triples: &[Triple]) -> Result<()> {
    let mut text = String::new();
    for t in triples {
        text.push_str(&store.format_triple(t));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn dedup_in_order(triples: &mut Vec<Triple>) {
    let mut seen = HashSet::with_capacity(triples.len());
    let before = triples.len();
    triples.retain(|t| seen.insert(*t));
    if triples.len() != before {
        log::warn!("dropped {} duplicate triples", before - triples.len());
    }
}

/// Non-fatal observations made while ingesting.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub warnings: Vec<String>,
}

/// Reads a dataset directory holding `train`, `valid` and `test` splits.
///
/// Each split is `<name>.txt` or `<name>.tsv` with one `head<TAB>relation<TAB>tail`
/// triple per line. Blank lines are ignored. The train and test splits must be
/// non-empty; a missing or empty validation split only produces a warning.
pub fn ingest(dir: &Path) -> Result<(TripleStore, IngestReport)> {
    ingest_impl(dir, None)
}

/// Like [`ingest`] but resolves symbols against fixed vocabularies.
///
/// Fails on the first symbol absent from them.
pub fn ingest_with_vocab(
    dir: &Path,
    entities: Vocab,
    relations: Vocab,
) -> Result<(TripleStore, IngestReport)> {
    ingest_impl(dir, Some((entities, relations)))
}

fn ingest_impl(dir: &Path, fixed: Option<(Vocab, Vocab)>) -> Result<(TripleStore, IngestReport)> {
    let frozen = fixed.is_some();
    let (mut entities, mut relations) = fixed.unwrap_or_default();
    let mut report = IngestReport::default();
    let mut splits: [Vec<Triple>; 3] = Default::default();

    for (i, split) in Split::ALL.iter().enumerate() {
        let Some(path) = split_path(dir, *split) else {
            if *split == Split::Valid {
                report
                    .warnings
                    .push(format!("no validation split in {}", dir.display()));
                continue;
            }
            return Err(Error::io(
                dir.join(format!("{split}.txt")),
                std::io::Error::new(std::io::ErrorKind::NotFound, "split file not found"),
            ));
        };
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut triples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let Some(fields) = parse_line(&path, lineno + 1, line)? else {
                continue;
            };
            let resolve = |vocab: &mut Vocab, name: &str, kind: &'static str| {
                if frozen {
                    vocab.id(name).ok_or_else(|| Error::UnknownSymbol {
                        kind,
                        name: name.to_string(),
                    })
                } else {
                    Ok(vocab.insert(name))
                }
            };
            let h = resolve(&mut entities, fields[0], "entity")?;
            let r = resolve(&mut relations, fields[1], "relation")?;
            let t = resolve(&mut entities, fields[2], "entity")?;
            triples.push(Triple::new(h, r, t));
        }
        if triples.is_empty() {
            if *split == Split::Valid {
                report
                    .warnings
                    .push(format!("validation split {} is empty", path.display()));
            } else {
                return Err(Error::EmptySplit {
                    split: split.name().to_string(),
                    path,
                });
            }
        }
        splits[i] = triples;
    }

    let mut in_train = vec![false; entities.len()];
    for t in &splits[0] {
        in_train[t.head as usize] = true;
        in_train[t.tail as usize] = true;
    }
    let mut missing: Vec<u32> = splits[1]
        .iter()
        .chain(&splits[2])
        .flat_map(|t| [t.head, t.tail])
        .filter(|&e| !in_train[e as usize])
        .collect();
    missing.sort_unstable();
    missing.dedup();
    if !missing.is_empty() {
        report.warnings.push(format!(
            "{} evaluation entities never occur in train (first: `{}`); they are kept and will rank poorly",
            missing.len(),
            entities.name(missing[0]).unwrap_or("?")
        ));
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }

    let [train, valid, test] = splits;
    let store = TripleStore::new(entities, relations, train, valid, test)?;
    Ok((store, report))
}

fn parse_line<'a>(path: &Path, lineno: usize, line: &'a str) -> Result<Option<[&'a str; 3]>> {
    let line = line.trim_end_matches('\r');
    if line.trim().is_empty() {
        return Ok(None);
    }
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
        return Err(Error::MalformedLine {
            path: path.to_path_buf(),
            line: lineno,
            reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
        });
    }
    Ok(Some([fields[0], fields[1], fields[2]]))
}

/// Reads a single TSV file of named triples without building a store.
pub fn read_named_triples(path: &Path) -> Result<Vec<[String; 3]>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some([h, r, t]) = parse_line(path, lineno + 1, line)? {
            out.push([h.to_string(), r.to_string(), t.to_string()]);
        }
    }
    Ok(out)
}

fn split_path(dir: &Path, split: Split) -> Option<PathBuf> {
    ["txt", "tsv"]
        .iter()
        .map(|ext| dir.join(format!("{}.{ext}", split.name())))
        .find(|p| p.is_file())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn write_split(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn toy_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "train.txt", "a\tr\tb\nb\tr\tc\na\tr\tb\n");
        write_split(dir.path(), "valid.txt", "a\tr\tc\n");
        write_split(dir.path(), "test.txt", "c\ts\td\n");
        dir
    }

    #[test]
    fn ingests_and_dedups() {
        let dir = toy_dir();
        let (store, report) = ingest(dir.path()).unwrap();
        assert_eq!(store.stats().train, 2);
        assert_eq!(store.n_entities(), 4);
        assert_eq!(store.n_relations(), 2);
        assert!(store.is_known_true(0, 0, 1));
        assert!(store.is_known_true(0, 0, 2));
        assert!(!store.is_known_true(1, 0, 0));
        assert_eq!(report.warnings.len(), 1, "{:?}", report.warnings);
        assert_eq!(store.known_tails(0, 0), &[1, 2]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "train.txt", "a\tr\tb\n\nbad line\n");
        write_split(dir.path(), "test.txt", "a\tr\tb\n");
        match ingest(dir.path()) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_split_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "train.txt", "");
        write_split(dir.path(), "test.txt", "a\tr\tb\n");
        assert!(matches!(ingest(dir.path()), Err(Error::EmptySplit { .. })));
    }

    #[test]
    fn frozen_vocab_names_first_unknown_symbol() {
        let dir = toy_dir();
        let ents = Vocab::from_names(["a", "b", "c"]).unwrap();
        let rels = Vocab::from_names(["r", "s"]).unwrap();
        match ingest_with_vocab(dir.path(), ents, rels) {
            Err(Error::UnknownSymbol { name, .. }) => assert_eq!(name, "d"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vocab_round_trip() {
        let v = Vocab::from_names(["x", "y", "z"]).unwrap();
        for id in 0..3u32 {
            assert_eq!(v.id(v.name(id).unwrap()), Some(id));
        }
        assert!(Vocab::from_names(["x", "x"]).is_err());
    }

    #[test]
    fn membership_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ents = Vocab::from_names((0..30).map(|i| format!("e{i}"))).unwrap();
        let rels = Vocab::from_names(["r0", "r1", "r2"]).unwrap();
        let mut gen = |n: usize| -> Vec<Triple> {
            (0..n)
                .map(|_| {
                    Triple::new(
                        rng.random_range(0..30),
                        rng.random_range(0..3),
                        rng.random_range(0..30),
                    )
                })
                .collect()
        };
        let (train, valid, test) = (gen(200), gen(20), gen(20));
        let all: Vec<Triple> = train.iter().chain(&valid).chain(&test).copied().collect();
        let store = TripleStore::new(ents, rels, train, valid, test).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let t = Triple::new(
                rng.random_range(0..30),
                rng.random_range(0..3),
                rng.random_range(0..30),
            );
            assert_eq!(
                store.is_known_true(t.head, t.relation, t.tail),
                all.contains(&t)
            );
        }
        for t in store.train() {
            assert!(store.is_known_true(t.head, t.relation, t.tail));
        }
    }

    #[test]
    fn write_then_ingest_preserves_triples() {
        let dir = toy_dir();
        let (store, _) = ingest(dir.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        store.write_tsv(out.path()).unwrap();
        let (again, _) = ingest(out.path()).unwrap();
        assert_eq!(again.train(), store.train());
        assert_eq!(again.test(), store.test());
        assert_eq!(again.entities, store.entities);
    }
}

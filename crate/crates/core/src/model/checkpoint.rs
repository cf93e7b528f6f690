//! On-disk model checkpoints.
//!
//! A checkpoint directory holds:
//!
//! - `model.json`: manifest (format tag, model kind, norm, sizes, plane order,
//!   config echo, SHA-256 of both vocabularies).
//! - `model.bin`: every parameter plane as little-endian `f32`, concatenated in
//!   plane order (`entity_re`, `entity_im`, `theta_r`, `theta_p`, `a`, `b`; for
//!   TransE `entity_re`, `entity_im`, `translation_re`, `translation_im`). Each
//!   plane is row-major `rows × dim`.
//! - `entities.dict`, `relations.dict`: `id<TAB>name` per line.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DistanceNorm, Model, ModelKind};
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "rotpro-checkpoint-v1";

const MANIFEST_FILE: &str = "model.json";
const BINARY_FILE: &str = "model.bin";
const ENTITY_FILE: &str = "entities.dict";
const RELATION_FILE: &str = "relations.dict";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub kind: ModelKind,
    pub norm: DistanceNorm,
    pub dim: usize,
    pub n_entities: usize,
    pub n_relations: usize,
    pub planes: Vec<String>,
    pub binary: String,
    pub binary_bytes: u64,
    pub entity_vocab_sha256: String,
    pub relation_vocab_sha256: String,
    pub config: BTreeMap<String, String>,
}

/// Hash of a vocabulary in id order, names joined by newlines.
pub fn vocab_hash(names: &[String]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

pub fn save_checkpoint(
    dir: &Path,
    model: &Model,
    config: &BTreeMap<String, String>,
    entities: &[String],
    relations: &[String],
) -> Result<CheckpointManifest> {
    if entities.len() != model.n_entities() || relations.len() != model.n_relations() {
        return Err(Error::Checkpoint(format!(
            "vocabulary sizes ({}, {}) do not match model ({}, {})",
            entities.len(),
            relations.len(),
            model.n_entities(),
            model.n_relations()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let planes = model.planes();
    let total: usize = planes.iter().map(|p| p.len()).sum();
    let mut bytes = Vec::with_capacity(total * 4);
    for plane in &planes {
        for &v in plane.iter() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }

    let manifest = CheckpointManifest {
        format: CHECKPOINT_FORMAT.to_string(),
        kind: model.kind,
        norm: model.norm,
        dim: model.dim(),
        n_entities: model.n_entities(),
        n_relations: model.n_relations(),
        planes: model.plane_names().iter().map(|s| s.to_string()).collect(),
        binary: BINARY_FILE.to_string(),
        binary_bytes: bytes.len() as u64,
        entity_vocab_sha256: vocab_hash(entities),
        relation_vocab_sha256: vocab_hash(relations),
        config: config.clone(),
    };

    write(&dir.join(BINARY_FILE), &bytes)?;
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write(&dir.join(MANIFEST_FILE), json.as_bytes())?;
    write(&dir.join(ENTITY_FILE), dict_text(entities).as_bytes())?;
    write(&dir.join(RELATION_FILE), dict_text(relations).as_bytes())?;
    Ok(manifest)
}

pub struct LoadedCheckpoint {
    pub model: Model,
    pub manifest: CheckpointManifest,
    pub entities: Vec<String>,
    pub relations: Vec<String>,
}

pub fn load_checkpoint(dir: &Path) -> Result<LoadedCheckpoint> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)?;
    if manifest.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!(
            "unsupported format `{}`",
            manifest.format
        )));
    }

    let entities = read_dict(&dir.join(ENTITY_FILE))?;
    let relations = read_dict(&dir.join(RELATION_FILE))?;
    if vocab_hash(&entities) != manifest.entity_vocab_sha256
        || vocab_hash(&relations) != manifest.relation_vocab_sha256
    {
        return Err(Error::Checkpoint("vocabulary hash mismatch".into()));
    }

    let mut model = Model::zeros(
        manifest.kind,
        manifest.norm,
        manifest.n_entities,
        manifest.n_relations,
        manifest.dim,
    );
    if model.plane_names() != manifest.planes.as_slice() {
        return Err(Error::Checkpoint(format!(
            "plane order {:?} does not match model kind {}",
            manifest.planes, manifest.kind
        )));
    }

    let bin_path = dir.join(&manifest.binary);
    let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    let expected: usize = model.planes().iter().map(|p| p.len() * 4).sum();
    if bytes.len() != expected || bytes.len() as u64 != manifest.binary_bytes {
        return Err(Error::Checkpoint(format!(
            "binary has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut chunks = bytes.chunks_exact(4);
    for plane in model.planes_mut() {
        for (v, c) in plane.iter_mut().zip(&mut chunks) {
            *v = f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        }
    }

    Ok(LoadedCheckpoint {
        model,
        manifest,
        entities,
        relations,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn dict_text(names: &[String]) -> String {
    let mut s = String::new();
    for (i, n) in names.iter().enumerate() {
        s.push_str(&format!("{i}\t{n}\n"));
    }
    s
}

fn read_dict(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut names = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let (id, name) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            path: path.to_path_buf(),
            line: lineno + 1,
            reason: "expected `id<TAB>name`".into(),
        })?;
        if id.parse::<usize>().ok() != Some(names.len()) {
            return Err(Error::MalformedLine {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("id `{id}` out of sequence"),
            });
        }
        names.push(name.to_string());
    }
    Ok(names)
}

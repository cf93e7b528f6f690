use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Writes through a sibling temp file so a failed run never leaves a partial artifact.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Split files of a dataset directory, sorted by name.
pub fn split_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for split in ["train", "valid", "test"] {
        for ext in ["txt", "tsv"] {
            let p = dir.join(format!("{split}.{ext}"));
            if p.is_file() {
                out.push(p);
                break;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// SHA-256 over `name NUL contents NUL` of every split file.
pub fn dataset_hash(dir: &Path) -> Result<String> {
    let mut h = Sha256::new();
    for p in split_files(dir)? {
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let bytes = fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
        h.update(name.as_bytes());
        h.update([0]);
        h.update(&bytes);
        h.update([0]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Routes data-parallel sections: one thread means the sequential path.
pub fn configure_threads(threads: usize) -> Result<()> {
    if threads == 1 {
        rotpro::exec::set_mode(rotpro::exec::Mode::Sequential);
        return Ok(());
    }
    rotpro::exec::set_mode(rotpro::exec::Mode::Parallel);
    if threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|x| x.trim().to_string())
        .filter(|x| !x.is_empty())
        .collect()
}

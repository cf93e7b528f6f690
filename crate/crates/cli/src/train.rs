use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use rotpro::data::ingest;
use rotpro::model::save_checkpoint;
use rotpro::training::{init_parameters, resolve_config, train_from, write_trace_csv, TrainConfig};

use crate::io::{dataset_hash, unix_now, write_atomic};
use crate::manifest::{DatasetIdentity, RunManifest, RunStatus, RUN_FORMAT};
use crate::HyperFlags;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory with train/valid/test splits.
    #[arg(long, required_unless_present = "manifest")]
    data: Option<PathBuf>,
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fb15k-237, wn18rr, yago3-10, countries-s1, countries-s2 or countries-s3.
    #[arg(long)]
    preset: Option<String>,
    /// Repeat the run recorded in a run manifest.
    #[arg(long, conflicts_with_all = ["data", "config", "preset"])]
    manifest: Option<PathBuf>,
    /// Output directory for checkpoint, trace and manifest.
    #[arg(long, default_value = "run")]
    out: PathBuf,
    #[command(flatten)]
    flags: HyperFlags,
}

fn resolve(args: &TrainArgs, threads: usize) -> Result<(TrainConfig, PathBuf, usize)> {
    if let Some(path) = &args.manifest {
        let old = RunManifest::read(path)?;
        let mut cfg = TrainConfig::from_map(&old.config)
            .with_context(|| format!("config recorded in {}", path.display()))?;
        for (k, v) in args.flags.overrides()? {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        let actual = dataset_hash(&old.dataset.path)?;
        if actual != old.dataset.sha256 {
            bail!(
                "dataset {} changed since the recorded run (sha256 {} != {})",
                old.dataset.path.display(),
                actual,
                old.dataset.sha256
            );
        }
        let threads = if threads == 0 { old.threads } else { threads };
        if threads != old.threads {
            log::warn!(
                "recorded run used --threads {}; this run uses {threads}",
                old.threads
            );
        }
        return Ok((cfg, old.dataset.path, threads));
    }
    let file_text = match &args.config {
        Some(p) => {
            Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
        }
        None => None,
    };
    let cfg = resolve_config(
        args.preset.as_deref(),
        file_text.as_deref(),
        &args.flags.overrides()?,
    )?;
    let data = args.data.clone().expect("clap enforces --data");
    Ok((cfg, data, threads))
}

pub fn run(args: TrainArgs, threads: usize) -> Result<()> {
    let (cfg, data, threads) = resolve(&args, threads)?;
    if threads == 1 {
        rotpro::exec::set_mode(rotpro::exec::Mode::Sequential);
    }
    let (store, report) = ingest(&data)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    log::info!("{}", store.stats());

    let out = args.out;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let manifest_path = out.join("run.json");
    let trace_path = out.join("trace.csv");
    let mut manifest = RunManifest {
        format: RUN_FORMAT.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.to_map(),
        seed: cfg.seed,
        threads,
        dataset: DatasetIdentity {
            sha256: dataset_hash(&data)?,
            path: data.clone(),
        },
        started_unix: unix_now(),
        finished_unix: None,
        status: RunStatus::Running,
        outputs: BTreeMap::from([
            ("checkpoint".to_string(), out.clone()),
            ("trace".to_string(), trace_path.clone()),
            ("config".to_string(), out.join("config.txt")),
        ]),
        error: None,
    };
    manifest.write(&manifest_path)?;
    write_atomic(&out.join("config.txt"), cfg.to_file_string().as_bytes())?;

    let result = train_and_save(&cfg, &store, &out, &trace_path);
    manifest.finished_unix = Some(unix_now());
    match &result {
        Ok(()) => manifest.status = RunStatus::Finished,
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(format!("{e:#}"));
        }
    }
    manifest.write(&manifest_path)?;
    result?;
    println!("wrote checkpoint, trace and manifest to {}", out.display());
    Ok(())
}

fn train_and_save(
    cfg: &TrainConfig,
    store: &rotpro::data::TripleStore,
    out: &Path,
    trace_path: &Path,
) -> Result<()> {
    let init = init_parameters(cfg, store.n_entities(), store.n_relations());
    let mut outcome = train_from(cfg, store, init, &mut |_| {})?;
    write_trace_csv(trace_path, &outcome.trace)?;
    outcome.model.round_to_f32();
    save_checkpoint(
        out,
        &outcome.model,
        &cfg.to_map(),
        store.entities.names(),
        store.relations.names(),
    )?;
    Ok(())
}

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};

use rotpro::data::{ingest_with_vocab, TransitiveChain, Vocab};
use rotpro::eval::diagnostics::{collinearity_csv, slice_csv, sweep_csv};
use rotpro::eval::{
    collinearity_check, export_embedding_slice, local_minima, loss_phase_sweep, phase_grid,
    phase_histogram, NONTRIVIAL_TOLERANCE,
};
use rotpro::model::{load_checkpoint, LoadedCheckpoint};

use crate::io::{split_list, write_atomic};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Checkpoint directory written by `train`.
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    /// CSV output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    kind: AnalyzeKind,
}

#[derive(Debug, Subcommand)]
enum AnalyzeKind {
    /// Histogram of rotation phases over non-trivially projected dimensions.
    Phases {
        #[arg(long)]
        relation: Option<String>,
        #[arg(long, default_value_t = 36)]
        bins: usize,
        #[arg(long, default_value_t = NONTRIVIAL_TOLERANCE)]
        tolerance: f64,
    },
    /// Spread of chain entities along each projection axis.
    Collinearity {
        #[arg(long)]
        relation: String,
        /// Comma-separated entity names in chain order.
        #[arg(long, conflicts_with = "chains")]
        chain: Option<String>,
        /// File with one tab-separated chain per line; reports the first.
        #[arg(long)]
        chains: Option<PathBuf>,
    },
    /// Positive-triple loss as one relation's phases sweep a grid over [0, 2π].
    LossSweep {
        /// Dataset whose train triples of the relation are scored.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        relation: String,
        #[arg(long, default_value_t = 65)]
        points: usize,
        /// Margin; defaults to the checkpoint's training margin.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Raw and projected coordinates for one dimension under one relation.
    Slice {
        #[arg(long)]
        relation: String,
        #[arg(long)]
        dim: usize,
        /// Comma-separated entity names; all entities when omitted.
        #[arg(long)]
        entities: Option<String>,
    },
}

fn entity(ckpt: &LoadedCheckpoint, name: &str) -> Result<u32> {
    ckpt.entities
        .iter()
        .position(|e| e == name)
        .map(|i| i as u32)
        .with_context(|| format!("unknown entity `{name}`"))
}

fn relation(ckpt: &LoadedCheckpoint, name: &str) -> Result<u32> {
    ckpt.relations
        .iter()
        .position(|r| r == name)
        .map(|i| i as u32)
        .with_context(|| format!("unknown relation `{name}`"))
}

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let Some(dir) = &args.checkpoint else {
        bail!("--checkpoint is required");
    };
    let ckpt =
        load_checkpoint(dir).with_context(|| format!("loading checkpoint {}", dir.display()))?;
    let model = &ckpt.model;

    let csv = match args.kind {
        AnalyzeKind::Phases {
            relation: rel,
            bins,
            tolerance,
        } => {
            let r = rel.as_deref().map(|n| relation(&ckpt, n)).transpose()?;
            let h = phase_histogram(model, r, tolerance, bins)?;
            println!("{} non-trivial dimensions", h.total());
            h.to_csv()
        }
        AnalyzeKind::Collinearity {
            relation: rel,
            chain,
            chains,
        } => {
            let r = relation(&ckpt, &rel)?;
            let names: Vec<String> = match (chain, chains) {
                (Some(c), _) => split_list(&c),
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
                    line.split('\t').map(|s| s.trim().to_string()).collect()
                }
                (None, None) => bail!("pass --chain or --chains"),
            };
            let ids = names
                .iter()
                .map(|n| entity(&ckpt, n))
                .collect::<Result<Vec<_>>>()?;
            let residuals = collinearity_check(model, &TransitiveChain::new(ids, r)?)?;
            let max = residuals.iter().copied().fold(0.0, f64::max);
            println!("max axis spread {max:.6}");
            collinearity_csv(&residuals)
        }
        AnalyzeKind::LossSweep {
            data,
            relation: rel,
            points,
            gamma,
        } => {
            let (store, _) = ingest_with_vocab(
                &data,
                Vocab::from_names(ckpt.entities.iter().cloned())?,
                Vocab::from_names(ckpt.relations.iter().cloned())?,
            )?;
            let r = store.relation_id(&rel)?;
            let triples: Vec<_> = store
                .train()
                .iter()
                .filter(|t| t.relation == r)
                .copied()
                .collect();
            let gamma = match gamma {
                Some(g) => g,
                None => ckpt
                    .manifest
                    .config
                    .get("gamma")
                    .context("checkpoint has no recorded gamma; pass --gamma")?
                    .parse()
                    .context("recorded gamma")?,
            };
            let rows = loss_phase_sweep(model, &triples, &phase_grid(points), gamma)?;
            let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let minima: Vec<String> = local_minima(&values)
                .into_iter()
                .map(|i| format!("{:.4}", rows[i].0))
                .collect();
            println!("local minima at θ = {}", minima.join(", "));
            sweep_csv(&rows)
        }
        AnalyzeKind::Slice {
            relation: rel,
            dim,
            entities,
        } => {
            let r = relation(&ckpt, &rel)?;
            let ids: Vec<u32> = match entities {
                Some(list) => split_list(&list)
                    .iter()
                    .map(|n| entity(&ckpt, n))
                    .collect::<Result<_>>()?,
                None => (0..model.n_entities() as u32).collect(),
            };
            let rows = export_embedding_slice(model, &ids, r, dim)?;
            slice_csv(&rows, |e| ckpt.entities[e as usize].clone())
        }
    };
    match &args.out {
        Some(out) => write_atomic(out, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}

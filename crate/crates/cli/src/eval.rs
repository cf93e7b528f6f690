use std::collections::HashSet;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use rotpro::data::countries::{region_entities, LOCATED_IN};
use rotpro::data::{build_transitivity_testsets, ingest_with_vocab, Split, Triple, Vocab};
use rotpro::eval::{auc_pr_countries, evaluate_filtered, evaluate_raw};
use rotpro::model::load_checkpoint;

use crate::io::write_atomic;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint directory written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset directory; symbols must exist in the checkpoint vocabulary.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "test")]
    split: Split,
    /// Unfiltered ranks.
    #[arg(long)]
    raw: bool,
    /// Report the S1/S2/S3 transitivity sets of this relation instead of a split.
    #[arg(long, value_name = "RELATION", conflicts_with = "countries")]
    transitivity: Option<String>,
    /// AUC-PR of `locatedIn` test queries against all regions.
    #[arg(long)]
    countries: bool,
    /// CSV output path; stdout always gets a table.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.checkpoint)
        .with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let (store, report) = ingest_with_vocab(
        &args.data,
        Vocab::from_names(ckpt.entities.iter().cloned())?,
        Vocab::from_names(ckpt.relations.iter().cloned())?,
    )?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let model = &ckpt.model;

    let csv = if args.countries {
        let rel = store.relation_id(LOCATED_IN)?;
        let regions = region_entities(&store)?;
        let auc = auc_pr_countries(model, &store, rel, &regions)?;
        println!("AUC-PR {auc:.4}");
        format!("metric,value\nauc_pr,{auc}\n")
    } else if let Some(rel) = &args.transitivity {
        let r = store.relation_id(rel)?;
        let sets = build_transitivity_testsets(&store, r);
        let extra: HashSet<Triple> = sets.derived().into_iter().collect();
        let mut csv = String::from("set,queries,MR,MRR,hits@1,hits@3,hits@10\n");
        for (name, triples) in sets.named() {
            if triples.is_empty() {
                println!("{name}: empty");
                continue;
            }
            let m = evaluate_filtered(model, &store, triples, Some(&extra))?;
            println!("{name} ({} triples)\n{m}", triples.len());
            csv.push_str(&format!(
                "{name},{},{},{},{},{},{}\n",
                m.queries, m.mr, m.mrr, m.hits1, m.hits3, m.hits10
            ));
        }
        csv
    } else {
        let triples = store.split(args.split);
        let m = if args.raw {
            evaluate_raw(model, &store, triples)?
        } else {
            evaluate_filtered(model, &store, triples, None)?
        };
        println!("{m}");
        m.to_csv()
    };
    if let Some(out) = &args.out {
        write_atomic(out, csv.as_bytes())?;
    }
    Ok(())
}

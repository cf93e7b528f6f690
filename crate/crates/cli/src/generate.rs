use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use clap::{Args, Subcommand};
use serde_json::{json, Value};

use rotpro::data::{
    build_transitivity_testsets, generate_synthetic, ingest, load_countries_task, relation_closure,
    CountriesSpec, CountriesTask, SyntheticSpec, TripleStore,
};

use crate::io::{dataset_hash, sha256_hex, unix_now, write_atomic};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
}

#[derive(Debug, Subcommand)]
enum GenerateKind {
    /// Disjoint chains under one relation with a partial closure in train.
    SyntheticChains {
        #[arg(long, default_value_t = 20)]
        chains: usize,
        #[arg(long, default_value_t = 6)]
        length: usize,
        /// Fraction of non-adjacent closure pairs kept in train.
        #[arg(long, default_value_t = 0.3)]
        keep: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// S1/S2/S3 test sets for one relation of an existing dataset.
    TransitivitySets {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        relation: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// One Countries task built from a facts file.
    Countries {
        /// TSV with `locatedIn` and `neighborOf` facts.
        #[arg(long, default_value = "data/countries/facts.tsv")]
        facts: PathBuf,
        #[arg(long)]
        task: CountriesTask,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_provenance(out: &Path, generator: &str, params: Value, store_stats: Value) -> Result<()> {
    let doc = json!({
        "generator": generator,
        "version": env!("CARGO_PKG_VERSION"),
        "created_unix": unix_now(),
        "params": params,
        "stats": store_stats,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_atomic(&out.join("provenance.json"), text.as_bytes())
}

fn write_store(store: &TripleStore, out: &Path) -> Result<String> {
    store.write_tsv(out)?;
    dataset_hash(out)
}

pub fn run(args: GenerateArgs) -> Result<()> {
    match args.kind {
        GenerateKind::SyntheticChains {
            chains,
            length,
            keep,
            seed,
            out,
        } => {
            let spec = SyntheticSpec {
                chains,
                length,
                keep,
                seed,
            };
            let ds = generate_synthetic(&spec)?;
            for c in &ds.chains {
                c.validate(&ds.store)?;
            }
            let hash = write_store(&ds.store, &out)?;
            let mut listing = String::new();
            for c in &ds.chains {
                let names: Vec<&str> = c
                    .entities
                    .iter()
                    .map(|&e| ds.store.entities.name(e).unwrap_or("?"))
                    .collect();
                listing.push_str(&names.join("\t"));
                listing.push('\n');
            }
            write_atomic(&out.join("chains.txt"), listing.as_bytes())?;
            write_provenance(
                &out,
                "synthetic-chains",
                json!({ "spec": spec, "dataset_sha256": hash }),
                json!(ds.store.stats()),
            )?;
            println!("{} -> {}", ds.store.stats(), out.display());
        }
        GenerateKind::TransitivitySets {
            data,
            relation,
            out,
        } => {
            let (store, _) = ingest(&data)?;
            let r = store.relation_id(&relation)?;
            let sets = build_transitivity_testsets(&store, r);
            let closure: HashSet<_> = relation_closure(&store, r).into_iter().collect();
            for t in sets.derived() {
                ensure!(
                    closure.contains(&t),
                    "derived triple `{}` is outside the closure",
                    store.format_triple(&t)
                );
                ensure!(
                    !store.is_known_true(t.head, t.relation, t.tail),
                    "derived triple `{}` is already a fact",
                    store.format_triple(&t)
                );
            }
            sets.write_tsv(&store, &out)?;
            let mut hashes = serde_json::Map::new();
            for (name, _) in sets.named() {
                let file = format!("{}.txt", name.to_lowercase());
                let bytes =
                    std::fs::read(out.join(&file)).with_context(|| format!("reading {file}"))?;
                hashes.insert(file, json!(sha256_hex(&bytes)));
            }
            write_provenance(
                &out,
                "transitivity-sets",
                json!({
                    "source": data,
                    "source_sha256": dataset_hash(&data)?,
                    "relation": relation,
                    "files_sha256": hashes,
                }),
                json!({ "S1": sets.s1.len(), "S2": sets.s2.len(), "S3": sets.s3.len() }),
            )?;
            println!(
                "S1 {} / S2 {} / S3 {} -> {}",
                sets.s1.len(),
                sets.s2.len(),
                sets.s3.len(),
                out.display()
            );
        }
        GenerateKind::Countries {
            facts,
            task,
            seed,
            out,
        } => {
            let spec = CountriesSpec::new(task, seed);
            let ds = load_countries_task(&facts, &spec)?;
            let bytes =
                std::fs::read(&facts).with_context(|| format!("reading {}", facts.display()))?;
            let hash = write_store(&ds.store, &out)?;
            write_provenance(
                &out,
                "countries",
                json!({
                    "spec": spec,
                    "facts": facts,
                    "facts_sha256": sha256_hex(&bytes),
                    "dataset_sha256": hash,
                    "regions": ds.regions.len(),
                }),
                json!(ds.store.stats()),
            )?;
            println!("{task}: {} -> {}", ds.store.stats(), out.display());
        }
    }
    Ok(())
}

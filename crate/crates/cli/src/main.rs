//! `rotpro`: train, evaluate, generate datasets and analyse embeddings.

mod analyze;
mod eval;
mod generate;
mod io;
mod manifest;
mod train;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "rotpro",
    version,
    about = "Rotation-projection knowledge graph embeddings"
)]
struct Cli {
    /// Worker threads for data-parallel sections (1 = sequential, 0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write checkpoint, trace and run manifest.
    Train(Box<train::TrainArgs>),
    /// Evaluate a checkpoint on a dataset split or on transitivity test sets.
    Eval(eval::EvalArgs),
    /// Generate datasets.
    Generate(generate::GenerateArgs),
    /// Embedding diagnostics written as CSV.
    Analyze(analyze::AnalyzeArgs),
}

/// Per-key overrides mirroring the training config.
#[derive(Debug, Clone, Default, Args)]
pub struct HyperFlags {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    negatives: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma_m: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// `abs` or `signed`.
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    adversarial_temperature: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    #[arg(long)]
    lr_decay_every: Option<String>,
    #[arg(long)]
    lr_decay_factor: Option<String>,
    #[arg(long)]
    max_steps: Option<String>,
    /// `pi`, `half-pi` or `lo,hi`.
    #[arg(long)]
    phase_init: Option<String>,
    /// `none`, `clamp` or `wrap`.
    #[arg(long)]
    phase_constraint: Option<String>,
    #[arg(long)]
    constraint_interval: Option<String>,
    #[arg(long)]
    entity_init: Option<String>,
    #[arg(long)]
    ab_init: Option<String>,
    #[arg(long)]
    filter_negatives: Option<String>,
    #[arg(long)]
    valid_every: Option<String>,
    #[arg(long)]
    log_every: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Any config key as `key=value`; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl HyperFlags {
    pub fn overrides(&self) -> anyhow::Result<Vec<(String, String)>> {
        let named = [
            ("model", &self.model),
            ("norm", &self.norm),
            ("dim", &self.dim),
            ("batch_size", &self.batch_size),
            ("negatives", &self.negatives),
            ("gamma", &self.gamma),
            ("alpha", &self.alpha),
            ("gamma_m", &self.gamma_m),
            ("beta", &self.beta),
            ("gate", &self.gate),
            ("adversarial_temperature", &self.adversarial_temperature),
            ("learning_rate", &self.learning_rate),
            ("lr_decay_every", &self.lr_decay_every),
            ("lr_decay_factor", &self.lr_decay_factor),
            ("max_steps", &self.max_steps),
            ("phase_init", &self.phase_init),
            ("phase_constraint", &self.phase_constraint),
            ("constraint_interval", &self.constraint_interval),
            ("entity_init", &self.entity_init),
            ("ab_init", &self.ab_init),
            ("filter_negatives", &self.filter_negatives),
            ("valid_every", &self.valid_every),
            ("log_every", &self.log_every),
            ("seed", &self.seed),
        ];
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got `{s}`"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        // Named flags win over --set.
        for (k, v) in named {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        Ok(out)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(e) = io::configure_threads(cli.threads) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    let result = match cli.command {
        Command::Train(a) => train::run(*a, cli.threads),
        Command::Eval(a) => eval::run(a),
        Command::Generate(a) => generate::run(a),
        Command::Analyze(a) => analyze::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

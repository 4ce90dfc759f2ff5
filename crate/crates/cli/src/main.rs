//! `ctt` — computational Turing test pipeline driver.
//!
//! Commands communicate through files in the run directory configured by
//! `--config` (overridable with `--out`). Structured logs go to stderr;
//! exit status is 0 on success (warnings included), 1 on errors, 2 on
//! usage mistakes.

mod paths;
mod pipeline;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ctt_core::config::RunConfig;
use ctt_core::fixtures::{write_fixture, FixtureSpec};
use pipeline::{Ctx, SelectionMode};

#[derive(Parser)]
#[command(
    name = "ctt",
    version,
    about = "Measure how distinguishable generated social media replies are from human ones"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the sampling seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the artifact directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the encoder spec (fallback[:dim=N,seed=N] | url#dim=N |
    /// file:vectors.json).
    #[arg(long)]
    encoder: Option<String>,
    /// Worker threads for batch steps.
    #[arg(long, default_value_t = 4)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    /// Evaluate the first candidate of each set.
    First,
    /// Evaluate the cosine-optimal selection (needs `ctt select`).
    Cosine,
    /// Evaluate the ML-optimal selection (needs `ctt select`).
    Ml,
}

impl From<SelectionArg> for SelectionMode {
    fn from(a: SelectionArg) -> Self {
        match a {
            SelectionArg::First => SelectionMode::First,
            SelectionArg::Cosine => SelectionMode::Cosine,
            SelectionArg::Ml => SelectionMode::Ml,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which candidate of each set to evaluate.
    #[arg(long, value_enum, default_value_t = SelectionArg::First)]
    selection: SelectionArg,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize a corpus; sample evaluation users; write the
    /// run manifest.
    Ingest(CommonArgs),
    /// Synthesize personas for the sampled evaluation users.
    Persona(CommonArgs),
    /// Generate candidate replies for every sampled test message.
    Generate(CommonArgs),
    /// Train the embedding detector and the interpretable forest detector.
    Detect(EvalArgs),
    /// Score generated/reference semantic similarity.
    Semsim(EvalArgs),
    /// Topical divergence testing with FDR control.
    Topics(EvalArgs),
    /// Best-of-N selection (cosine-optimal and ML-optimal) plus overlap.
    Select(CommonArgs),
    /// Assemble the report bundle from stored artifacts.
    Report(CommonArgs),
    /// Write a synthetic corpus fixture for offline runs.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct FixtureArgs {
    /// Output JSONL path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    users: usize,
    #[arg(long, default_value_t = 30)]
    train_per_user: usize,
    #[arg(long, default_value_t = 25)]
    test_per_user: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn build_ctx(args: &CommonArgs) -> Result<Ctx> {
    let config = RunConfig::load(&args.config)?;
    Ok(Ctx::new(
        config,
        args.out.as_deref(),
        args.seed,
        args.encoder.as_deref(),
        args.jobs,
    ))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => pipeline::cmd_ingest(&build_ctx(&args)?),
        Command::Persona(args) => pipeline::cmd_persona(&build_ctx(&args)?),
        Command::Generate(args) => pipeline::cmd_generate(&build_ctx(&args)?),
        Command::Detect(args) => {
            pipeline::cmd_detect(&build_ctx(&args.common)?, args.selection.into())
        }
        Command::Semsim(args) => {
            pipeline::cmd_semsim(&build_ctx(&args.common)?, args.selection.into())
        }
        Command::Topics(args) => {
            pipeline::cmd_topics(&build_ctx(&args.common)?, args.selection.into())
        }
        Command::Select(args) => pipeline::cmd_select(&build_ctx(&args)?),
        Command::Report(args) => pipeline::cmd_report(&build_ctx(&args)?),
        Command::Fixture(args) => {
            let spec = FixtureSpec {
                n_users: args.users,
                train_per_user: args.train_per_user,
                test_per_user: args.test_per_user,
                seed: args.seed,
            };
            if let Some(parent) = args.out.parent() {
                std::fs::create_dir_all(parent)?;
            }
            write_fixture(&args.out, &spec)?;
            log::info!(
                "wrote fixture corpus ({} users) to {}",
                args.users,
                args.out.display()
            );
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        log::error!("{e:#}");
        std::process::exit(1);
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use neoscope::pipeline::{Pipeline, PipelineConfig, PipelineError, Stage};

/// Run one stage of a neology study, or all of them.
#[derive(Parser)]
#[command(name = "neoscope", version)]
struct Cli {
    /// synth, ingest, lexicon, train, align, select, stats, glm, report or all
    stage: Stage,
    /// JSON study config; defaults apply to anything it leaves out.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Work directory for artifacts (overrides the config and NEOSCOPE_WORKDIR).
    #[arg(long, short)]
    workdir: Option<PathBuf>,
    /// Corpus manifest (`slice<TAB>partition<TAB>path` lines).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Tagged `token<TAB>tag` stream for the part-of-speech lexicon.
    #[arg(long)]
    pos_source: Option<PathBuf>,
    /// Top-level seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if cli.manifest.is_some() {
        config.manifest = cli.manifest;
    }
    if cli.pos_source.is_some() {
        config.pos_source = cli.pos_source;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.print_config {
        config.validate()?;
        print!("{}", config.to_json());
        return Ok(());
    }
    let workdir = config.resolve_workdir(cli.workdir.as_deref())?;
    let mut pipeline = Pipeline::new(config, workdir)?;
    let result = pipeline.run(cli.stage);
    for line in pipeline.log() {
        eprintln!("{line}");
    }
    result
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, PipelineError::Config(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

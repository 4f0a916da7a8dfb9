use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collabnet_cli::{exit_code, run_stage, Outcome, Overrides, PipelineError, RunConfig, Stage, EXIT_FATAL, EXIT_PARTIAL};

/// Collaboration networks, stable communities and their evolution from
/// research-funding tables.
#[derive(Debug, Parser)]
#[command(name = "collabnet", version, about)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, short, global = true, default_value = "collabnet.toml")]
    config: PathBuf,
    /// Base seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); never changes results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output root; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Parse, merge and filter the tables; write yearly weights.
    Ingest,
    /// Build yearly graphs, centrality and resolved partitions.
    Analyze,
    /// Link communities across years and assign global labels.
    Temporal,
    /// Collect plot-ready data into one bundle.
    Report,
    /// All stages in order.
    Run,
}

fn stages(c: Command) -> &'static [Stage] {
    match c {
        Command::Ingest => &[Stage::Ingest],
        Command::Analyze => &[Stage::Analyze],
        Command::Temporal => &[Stage::Temporal],
        Command::Report => &[Stage::Report],
        Command::Run => &Stage::ALL,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut config = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FATAL as u8);
        }
    };
    config.apply(&Overrides {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out.clone(),
    });

    let mut code = 0;
    for &stage in stages(cli.command) {
        let result: Result<Outcome, PipelineError> = run_stage(stage, &config);
        match &result {
            Err(e) => eprintln!("error: {stage}: {e}"),
            Ok(o) => {
                for f in &o.failures {
                    eprintln!("warning: {stage}: year {} failed: {}", f.year, f.error);
                }
            }
        }
        code = code.max(exit_code(&result));
        if code == EXIT_FATAL {
            break;
        }
    }
    if code == EXIT_PARTIAL {
        eprintln!("finished with failures");
    }
    ExitCode::from(code as u8)
}

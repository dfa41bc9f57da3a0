mod commands;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Modular knowledge-graph retrieval: run instances, generate answers, compare runs.
#[derive(Debug, Parser)]
#[command(name = "lego", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a triple file and a query file and snapshot them into a data directory.
    Ingest {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute an instance over a data directory and write its run report.
    Run(RunArgs),
    /// Generate answers from the final paths of a run.
    Generate {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        llm_config: PathBuf,
        #[arg(long, default_value = "0")]
        shots: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the metric and timing table of a run.
    Eval {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        gen: Option<PathBuf>,
    },
    /// Compare several runs in one stage-timing table.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// List the built-in instances.
    ListInstances,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Built-in instance id (0-20).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    instance: Option<u32>,
    /// Instance YAML file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory written by `ingest`.
    #[arg(long)]
    data: PathBuf,
    /// Run report (JSON) to write.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the instance seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Replaces the endpoint of every model-backed scorer.
    #[arg(long)]
    scorer_endpoint: Option<String>,
    /// Also write final paths as JSON lines.
    #[arg(long)]
    paths_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Csv,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

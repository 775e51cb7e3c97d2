//! CLI entry point: load a run configuration, execute the identity and
//! inequality suites over the configured grids, and emit machine-readable
//! reports.
//!
//! Exit codes: 0 all checks passed (inconclusive allowed), 1 any check
//! failed or errored, 2 configuration problem.

use clap::{Args, Parser, Subcommand};
use infotheo::report::{run, sweep_csv, Report, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "infotheo", version, about = "Numerical identity/inequality suites for information functionals of one-dimensional densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured checks and write a JSON report.
    Report(RunArgs),
    /// Run the configured checks and write one CSV row per
    /// (check, pair, lambda, t).
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path (.json for report, .csv for sweep).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Record wall-clock duration in the report metadata. Off by default so
    /// identical configs produce byte-identical output.
    #[arg(long)]
    timing: bool,
}

fn load_config(path: &PathBuf) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    RunConfig::from_toml(&text).map_err(|e| e.to_string())
}

fn execute(args: &RunArgs) -> Result<Report, (u8, String)> {
    let config = load_config(&args.config).map_err(|m| (2, m))?;
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| (2, format!("cannot configure {threads} threads: {e}")))?;
    }
    let started = Instant::now();
    let mut report = run(&config).map_err(|e| (2, e.to_string()))?;
    if args.timing {
        report.meta.elapsed_ms = Some(started.elapsed().as_millis() as u64);
    }
    Ok(report)
}

fn write_out(path: &PathBuf, contents: &str) -> Result<(), (u8, String)> {
    std::fs::write(path, contents)
        .map_err(|e| (1, format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, as_csv) = match &cli.command {
        Command::Report(a) => (a, false),
        Command::Sweep(a) => (a, true),
    };
    match execute(args) {
        Ok(report) => {
            let payload = if as_csv { sweep_csv(&report) } else { report.to_json() };
            if let Err((code, msg)) = write_out(&args.out, &payload) {
                eprintln!("{msg}");
                return ExitCode::from(code);
            }
            let s = &report.summary;
            eprintln!(
                "{} checks: {} passed, {} failed, {} inconclusive, {} errors",
                report.entries.len(),
                s.passed,
                s.failed,
                s.inconclusive,
                s.errors
            );
            ExitCode::from(report.exit_code() as u8)
        }
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use weightlab::{
    run_catalog, run_check_pair, run_region_map, run_scan_global, run_verify_theorem, CliError,
    CliResult, ExperimentConfig, Outcome,
};

#[derive(Parser, Debug)]
#[command(
    name = "weightlab",
    version,
    about = "Two-weight commutator inequality experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the (1/r, δ̃) window into parameter regions.
    RegionMap(Args),
    /// Symbolic and numeric membership of one weight pair.
    CheckPair(Args),
    /// Seminorm ratio experiment for the commutator.
    VerifyTheorem(Args),
    /// Global functional against the exterior truncation.
    ScanGlobal(Args),
    /// Example pairs available at the configured setting.
    Catalog(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; `WEIGHTLAB_THREADS` takes precedence.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var("WEIGHTLAB_THREADS") {
        Ok(v) => {
            v.trim().parse::<usize>().map(Some).map_err(|_| {
                CliError::Config(format!("WEIGHTLAB_THREADS={v} is not a thread count"))
            })
        }
        Err(_) => Ok(flag),
    }
}

type Runner = fn(&ExperimentConfig, &std::path::Path) -> CliResult<Outcome>;

fn run(cli: Cli) -> CliResult<Outcome> {
    let (args, f): (&Args, Runner) = match &cli.command {
        Command::RegionMap(a) => (a, run_region_map),
        Command::CheckPair(a) => (a, run_check_pair),
        Command::VerifyTheorem(a) => (a, run_verify_theorem),
        Command::ScanGlobal(a) => (a, run_scan_global),
        Command::Catalog(a) => (a, run_catalog),
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = threads(args.threads)? {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    f(&cfg, &out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("experiment failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use convex_decay::experiment::{generate_report, run_to_dir, ExperimentConfig};
use convex_decay::Error;

#[derive(Parser)]
#[command(
    name = "convex-decay",
    version,
    about = "Fourier-decay and lattice-point experiments for convex hypersurface measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform decay sweeps.
    Decay(RunArgs),
    /// Slab-measure decay profiles.
    Slab(RunArgs),
    /// Bounded-ratio theorem checks (thm11, thm12, uniform, lemma15, eq31,
    /// union, full-report).
    Verify(RunArgs),
    /// Lattice-point counting and discrepancy exponents.
    Lattice(RunArgs),
    /// Consolidate finished runs into report.md and .dat plot files.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for sampled validation; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding one subdirectory per finished run.
    #[arg(long)]
    out: PathBuf,
    /// Accepted for symmetry; report generation is single-threaded.
    #[arg(long)]
    threads: Option<usize>,
}

const INVALID_CONFIG: u8 = 2;
const FAILED: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Decay(args) => run(args, &["decay"]),
        Command::Slab(args) => run(args, &["slab"]),
        Command::Verify(args) => run(
            args,
            &[
                "thm11",
                "thm12",
                "uniform",
                "lemma15",
                "eq31",
                "union",
                "full-report",
            ],
        ),
        Command::Lattice(args) => run(args, &["lattice"]),
        Command::Report(args) => report(args),
    };
    ExitCode::from(code)
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
}

fn run(args: &RunArgs, allowed: &[&str]) -> u8 {
    init_threads(args.threads);
    let text = match fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read config {:?}: {e}", args.config);
            return INVALID_CONFIG;
        }
    };
    let config = match ExperimentConfig::from_json(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("{e}");
            return INVALID_CONFIG;
        }
    };
    if !allowed.contains(&config.experiment.as_str()) {
        eprintln!(
            "experiment '{}' does not belong to this subcommand (expected one of: {})",
            config.experiment,
            allowed.join(", ")
        );
        return INVALID_CONFIG;
    }
    let out_dir = match args.out.clone().or_else(|| config.output.clone()) {
        Some(dir) => dir,
        None => {
            eprintln!("no output directory: pass --out or set `output` in the config");
            return INVALID_CONFIG;
        }
    };
    let seed = args.seed.or(config.seed).unwrap_or(0);
    match run_to_dir(&config, &out_dir, seed) {
        Ok(pass) => {
            println!(
                "{}: {} (results in {})",
                config.experiment,
                if pass { "pass" } else { "FAIL" },
                out_dir.display()
            );
            if pass {
                0
            } else {
                FAILED
            }
        }
        Err(e @ (Error::Config(_) | Error::UnknownName(_))) => {
            eprintln!("{e}");
            INVALID_CONFIG
        }
        Err(e) => {
            eprintln!("{e}");
            FAILED
        }
    }
}

fn report(args: &ReportArgs) -> u8 {
    match generate_report(&args.out) {
        Ok(()) => {
            println!("report written to {}", args.out.join("report.md").display());
            0
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            INVALID_CONFIG
        }
        Err(e) => {
            eprintln!("{e}");
            FAILED
        }
    }
}

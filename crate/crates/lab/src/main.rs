use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mre_lab::config::FlatConfig;
use mre_lab::experiments;
use mre_lab::report::ExperimentReport;

#[derive(Parser)]
#[command(
    name = "mre-lab",
    about = "Exact and neural-network estimation experiments for measured relative entropies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for all randomized work.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output directory for tables, summary, and manifest.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Worker threads (default: MRE_LAB_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Flat key-value config file with dotted keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Inline config overrides, e.g. --set sweep.trials=50.
    #[arg(long = "set", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact divergences with the measurement-search cross-check.
    Exact,
    /// One estimator run against the exact value.
    QneRun,
    /// Error-versus-sample-size sweep with slope and bound checks.
    SweepN,
    /// Deviation tail study at a fixed sample size.
    Tail,
    /// Permutation-invariant compression experiments.
    Perminv,
    /// The full property suite.
    Props,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = mre_lab::resolve_threads(cli.threads);
    mre_lab::init_threads(threads);

    let mut cfg = match &cli.config {
        Some(path) => match FlatConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        },
        None => FlatConfig::empty(),
    };
    if let Err(e) = cfg.apply_overrides(&cli.set) {
        eprintln!("{e}");
        return ExitCode::from(2);
    }

    let (name, result): (&str, Result<ExperimentReport, _>) = match cli.command {
        Command::Exact => ("exact", experiments::run_exact(&cfg, cli.seed)),
        Command::QneRun => ("qne-run", experiments::run_qne_once(&cfg, cli.seed)),
        Command::SweepN => ("sweep-n", experiments::run_sweep(&cfg, cli.seed)),
        Command::Tail => ("tail", experiments::run_tail(&cfg, cli.seed)),
        Command::Perminv => ("perminv", experiments::run_perminv(&cfg, cli.seed)),
        Command::Props => ("props", experiments::run_props(&cfg, cli.seed)),
    };

    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{name}: {e}");
            return ExitCode::from(2);
        }
    };
    match report.write(&cli.out_dir, name, cli.seed, threads, cfg.resolved_map()) {
        Ok(paths) => {
            for p in &paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("failed to write report: {e}");
            return ExitCode::from(2);
        }
    }
    println!(
        "{name}: {}",
        if report.passed { "PASS" } else { "FAIL" }
    );
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

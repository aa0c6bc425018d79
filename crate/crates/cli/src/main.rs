use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mmnoma::EstimateSource;
use mmnoma_cli::validate::{run_one, Budget};
use mmnoma_cli::{emit_summary, load_config, run_experiment, write_csv};

#[derive(Debug, Parser)]
#[command(name = "mmnoma", version, about = "mmWave-NOMA device pairing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config and write CSV.
    Simulate {
        config: PathBuf,
        /// Monte Carlo trials per grid point.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path; `-` writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of mc, cf, quad.
        #[arg(long, value_delimiter = ',')]
        sources: Option<Vec<EstimateSource>>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the oracle suite; exits nonzero if any criterion fails.
    Validate {
        /// Smaller samples, for a smoke run.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria (1-9).
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn simulate(
    config: PathBuf,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    sources: Option<Vec<EstimateSource>>,
    threads: Option<usize>,
) -> Result<bool> {
    let mut spec = load_config(&config)?;
    if let Some(t) = trials {
        anyhow::ensure!(t > 0, "--trials must be at least 1");
        spec.trials = t;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(s) = sources {
        spec.sources = s;
    }
    if let Some(t) = threads {
        spec.threads = t;
    }
    // Relative output paths in a config resolve next to the config.
    let out = out.or_else(|| {
        spec.output.as_ref().map(|p| match config.parent() {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.clone(),
        })
    });

    let table = run_experiment(&spec);
    match out.as_deref() {
        Some(path) if path.as_os_str() != "-" => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&table, BufWriter::new(file))?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        _ => write_csv(&table, io::stdout().lock())?,
    }
    eprint!("{}", emit_summary(&table));
    if let Some(reason) = &table.failure {
        eprintln!("error: run stopped early: {reason}");
    }
    Ok(table.is_complete())
}

fn validate(quick: bool, only: Option<Vec<u8>>, seed: Option<u64>, threads: Option<usize>) -> Result<bool> {
    let mut budget = if quick { Budget::quick() } else { Budget::full() };
    if let Some(s) = seed {
        budget.seed = s;
    }
    if let Some(t) = threads {
        budget.threads = t;
    }
    let ids = only.unwrap_or_else(|| (1..=9).collect());
    let mut all_passed = true;
    let mut stdout = io::stdout().lock();
    for id in ids {
        let report = run_one(id, &budget).with_context(|| format!("no criterion {id}"))?;
        all_passed &= report.passed;
        write!(stdout, "{report}")?;
        stdout.flush()?;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate {
            config,
            trials,
            seed,
            out,
            sources,
            threads,
        } => simulate(config, trials, seed, out, sources, threads),
        Command::Validate {
            quick,
            only,
            seed,
            threads,
        } => validate(quick, only, seed, threads),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

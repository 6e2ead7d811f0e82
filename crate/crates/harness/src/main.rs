use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use diagfim::Family;
use diagfim_harness::experiment::{run_experiment, TRACE_FILE};
use diagfim_harness::report::{bounds_report, load_checkpoint, parse_input_row};
use diagfim_harness::{verify, ExperimentConfig, HarnessError};

/// Diagonal Fisher information estimators: exact variances, bounds and experiments.
#[derive(Debug, Parser)]
#[command(name = "diagfim", version)]
struct Cli {
    /// Output directory (overrides `output_dir` in the config; `bounds` also writes its table here).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// RNG seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-input bound computations (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network and write trace.csv, config.json and checkpoint_final.json.
    Run {
        /// Experiment config (JSON).
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Run the oracle consistency suite and print a pass/fail table.
    Verify,
    /// Per-group FIM, variances and bounds for a saved network at one input.
    Bounds {
        /// Checkpoint JSON as written by `run`.
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
        /// Comma-separated input coordinates, e.g. "0.5,-1.2".
        #[arg(long, value_name = "CSV_ROW", allow_hyphen_values = true)]
        input: String,
        /// Output head; required if the checkpoint does not record one.
        #[arg(long, value_enum)]
        head: Option<HeadArg>,
        /// Sample count N in the variances.
        #[arg(long, default_value_t = 1000)]
        n_samples: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HeadArg {
    Gaussian,
    Categorical,
}

impl From<HeadArg> for Family {
    fn from(h: HeadArg) -> Self {
        match h {
            HeadArg::Gaussian => Family::IsotropicGaussian,
            HeadArg::Categorical => Family::Categorical,
        }
    }
}

enum Outcome {
    Ok,
    NumericalFailure,
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n >= 1, HarnessError::Config("--threads must be at least 1".into()));
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(dir) = cli.output_dir {
                cfg.output_dir = dir;
            }
            let trace = run_experiment(&cfg)?;
            println!(
                "wrote {} rows to {} (final loss {:.6})",
                trace.rows.len(),
                cfg.output_dir.join(TRACE_FILE).display(),
                trace.losses.last().copied().unwrap_or(f64::NAN)
            );
            Ok(Outcome::Ok)
        }
        Command::Verify => {
            let results = verify::run_all();
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed()).count();
            println!("{} of {} suites passed", results.len() - failed, results.len());
            Ok(if failed == 0 { Outcome::Ok } else { Outcome::NumericalFailure })
        }
        Command::Bounds {
            checkpoint,
            input,
            head,
            n_samples,
        } => {
            let ck = load_checkpoint(&checkpoint)?;
            let x = parse_input_row(&input)?;
            let report = bounds_report(&ck, head.map(Family::from), &x, n_samples)?;
            let table = report.to_table();
            print!("{table}");
            if let Some(dir) = cli.output_dir {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join("bounds.txt");
                std::fs::write(&path, &table).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if report.all_within() { Outcome::Ok } else { Outcome::NumericalFailure })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NumericalFailure) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<HarnessError>().map_or(1, HarnessError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

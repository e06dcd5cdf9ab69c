use std::path::PathBuf;
use std::process::ExitCode;

use accredo::experiment::{self, Status};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

const EXIT_ERROR: u8 = 1;
const EXIT_NO_ACCEPTED: u8 = 3;

#[derive(Parser)]
#[command(name = "accredo", version, about = "Accreditation-filtered error mitigation on simulated noisy hardware")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mitigation campaign and write runs.csv, report.json and summary.txt.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long, env = "ACCREDO_SEED")]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the error-versus-depth study from a preset file or built-in name.
    DepthSweep {
        preset: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "ACCREDO_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a campaign config without running it.
    Validate { config: PathBuf },
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            anyhow::ensure!(w > 0, "--workers must be at least 1");
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().context("building worker pool")?;
            Ok(pool.install(f))
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Run { config, out, seed, workers } => {
            let mut cfg = experiment::load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (status, _) = in_pool(workers, || experiment::run_experiment(&cfg, &out))??;
            print!("{}", std::fs::read_to_string(out.join(experiment::SUMMARY_TXT))?);
            Ok(status)
        }
        Command::DepthSweep { preset, out, seed, workers } => {
            let mut preset = experiment::load_preset(&preset)?;
            if let Some(s) = seed {
                for (_, c) in &mut preset.campaigns {
                    c.seed = s;
                }
            }
            let (status, _) = in_pool(workers, || experiment::depth_sweep_experiment(&preset, &out))??;
            print!("{}", std::fs::read_to_string(out.join(experiment::DEPTH_SWEEP_CSV))?);
            Ok(status)
        }
        Command::Validate { config } => {
            let cfg = experiment::load_config(&config)?;
            println!(
                "ok: n={} m={} K={} M={} theta={} behaviours={} acceptance={}",
                cfg.target.n(),
                cfg.target.m(),
                cfg.runs,
                cfg.params.traps,
                experiment::fmt12(cfg.params.theta),
                cfg.behaviours.len(),
                cfg.params.mode
            );
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NoAcceptedRuns) => {
            eprintln!("accredo: no run was accepted; the mitigated estimate is undefined");
            ExitCode::from(EXIT_NO_ACCEPTED)
        }
        Err(e) => {
            eprintln!("accredo: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

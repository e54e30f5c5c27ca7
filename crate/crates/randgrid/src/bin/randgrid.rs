//! Batch experiment runner: `randgrid run` executes one experiment config,
//! `randgrid sweep` runs a family of configs differing along one axis.
//!
//! Exit codes: 0 = all checks passed, 1 = a statistical check failed,
//! 2 = configuration error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use randgrid::config::ExperimentConfig;
use randgrid::experiment::{run, sweep, RunOptions};

#[derive(Parser)]
#[command(name = "randgrid", version, about = "Random-grid stochastic integral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `runs/<config stem>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker count; results are identical for any value.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment config.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run several configs that differ only along one declared axis.
    Sweep {
        /// Experiment configs (TOML), one --config per file.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        /// The parameter axis the configs vary along
        /// (n, paths, seed, mesh_factor, mesh_steps, theta.value, theta.c,
        /// theta.budget).
        #[arg(long)]
        axis: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn default_out(config: &PathBuf) -> PathBuf {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());
    PathBuf::from("runs").join(stem)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Run { config, common } => {
            let out = common.out.clone().unwrap_or_else(|| default_out(&config));
            ExperimentConfig::from_path(&config).and_then(|cfg| {
                let report = run(
                    &cfg,
                    &out,
                    &RunOptions {
                        seed_override: common.seed,
                        jobs: common.jobs,
                    },
                )?;
                println!(
                    "{:?} seed={} pass={} out={} ({:.2}s)",
                    report.kind,
                    report.seed,
                    report.pass,
                    out.display(),
                    started.elapsed().as_secs_f64()
                );
                for (k, v) in &report.key_stats {
                    println!("  {k} = {v}");
                }
                Ok(report.pass)
            })
        }
        Command::Sweep {
            config,
            axis,
            common,
        } => {
            let out = common
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("runs/sweep"));
            config
                .iter()
                .map(|p| ExperimentConfig::from_path(p))
                .collect::<randgrid::Result<Vec<_>>>()
                .and_then(|configs| {
                    let report = sweep(
                        &configs,
                        &axis,
                        &out,
                        &RunOptions {
                            seed_override: common.seed,
                            jobs: common.jobs,
                        },
                    )?;
                    println!(
                        "sweep over {} ({} runs) pass={} out={} ({:.2}s)",
                        report.axis,
                        report.runs.len(),
                        report.pass,
                        out.display(),
                        started.elapsed().as_secs_f64()
                    );
                    Ok(report.pass)
                })
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

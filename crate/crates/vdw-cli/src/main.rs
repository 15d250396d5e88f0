//! Batch front-end for the two-atom dispersion library: parameter sweeps,
//! closed-form vs oracle comparison reports, and plot-ready CSV emission.

// negated comparisons like `!(a < b)` are NaN-rejecting validity guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod exec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Resolved;
use exec::{Failure, EXIT_CONFIG, EXIT_TOLERANCE};

#[derive(Parser)]
#[command(name = "vdw", version, about = "Two-atom dispersion energy sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one quantity over the configured sweep and write a CSV.
    Run {
        config: PathBuf,
        /// Output path (overrides the config's `output`, default out.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweep evaluation (assembly stays in order).
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Evaluate the configured quantity pair and report deviations.
    Compare {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Relative tolerance for pass/fail (overrides the config's value).
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn load(config: &Path) -> Result<Resolved, Failure> {
    Resolved::load(config).map_err(|e| Failure {
        code: EXIT_CONFIG,
        message: format!("{e:#}"),
    })
}

fn out_path(resolved: &Resolved, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| resolved.config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out.csv"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let failure = match cli.command {
        Command::Run {
            config,
            out,
            threads,
        } => load(&config).and_then(|resolved| {
            let path = out_path(&resolved, out);
            exec::run(&resolved, &path, threads)
        }),
        Command::Compare {
            config,
            out,
            threads,
            tolerance,
        } => load(&config).and_then(|resolved| {
            let path = out_path(&resolved, out);
            let tol = tolerance.or(resolved.config.tolerance).unwrap_or(1e-2);
            exec::compare(&resolved, &path, threads, tol).and_then(|summary| {
                if summary.passed {
                    Ok(())
                } else {
                    Err(Failure {
                        code: EXIT_TOLERANCE,
                        message: format!(
                            "comparison tolerance exceeded: max_rel {:.3e} > {tol:.3e}",
                            summary.max_rel
                        ),
                    })
                }
            })
        }),
    };
    match failure {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}

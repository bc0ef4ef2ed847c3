use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quadsym::cli::{cmd_analyze, cmd_cuts, cmd_orbit, cmd_validate, AnalyzeArgs, CliError};

/// Symmetry groups of quadratically constrained quadratic programs.
#[derive(Parser)]
#[command(name = "quadsym", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem file and the positive definiteness of the constraint sum.
    Validate { problem: PathBuf },
    /// Compute the symmetry group.
    Analyze {
        problem: PathBuf,
        /// Ignore the objective (symmetries of the feasible set only).
        #[arg(long)]
        constraints_only: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Random starts per (permutation, determinant) pair.
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        tol_residual: Option<f64>,
        #[arg(long)]
        tol_rank: Option<f64>,
        /// Write the full report as JSON to this path.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
        /// Cap on admissible constraint permutations.
        #[arg(long)]
        max_perms: Option<usize>,
    },
    /// Print the orbit of a point.
    Orbit {
        problem: PathBuf,
        report: PathBuf,
        /// Comma-separated coordinates, e.g. 0.3,0.1
        #[arg(allow_hyphen_values = true)]
        point: String,
        /// Random continuous elements per coset.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Print symmetry-breaking cuts a·x >= 0.
    Cuts { problem: PathBuf, report: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Validate { problem } => cmd_validate(&problem, &mut out),
        Command::Analyze {
            problem,
            constraints_only,
            seed,
            restarts,
            tol_residual,
            tol_rank,
            json,
            max_perms,
        } => {
            let args = AnalyzeArgs {
                constraints_only,
                seed,
                restarts,
                tol_residual,
                tol_rank,
                max_perms,
                json,
            };
            cmd_analyze(&problem, &args, &mut out)
        }
        Command::Orbit {
            problem,
            report,
            point,
            samples,
        } => cmd_orbit(&problem, &report, &point, samples, &mut out),
        Command::Cuts { problem, report } => cmd_cuts(&problem, &report, &mut out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

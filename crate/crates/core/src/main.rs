//! `mas-lab`: batch experiments for the exterior/interior circular and
//! exterior elliptic magnetostatic problems.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 solver failure.

use clap::{Parser, Subcommand};
use mas_lab::experiment::{self, FigureId, ScenarioConfig};
use mas_lab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mas-lab", version, about = "MAS/MFS experiments for 2D Laplace-Neumann problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON scenario config: solve, probe, write CSV + report.
    Run {
        /// Path to the scenario config (JSON).
        config: PathBuf,
    },
    /// Emit the plot-ready CSV for one of the canned figure datasets.
    Figure {
        /// One of fig2a, fig2b, fig3a, fig3b, fig4.
        id: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Cross-check the closed-form kernels against the quadrature oracle.
    VerifyKernels {
        /// Failure threshold for the worst deviation.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Evaluate a single case `m x y` and print both routes.
        #[arg(long, num_args = 3, value_names = ["M", "X", "Y"])]
        case: Option<Vec<f64>>,
    },
    /// Show the two solution routes diverging through roundoff at N=101.
    RoundoffDemo,
    /// Re-solve a scenario with noisy boundary data and report sensitivity.
    Perturb {
        /// Path to the scenario config (JSON; exterior circular problem).
        config: PathBuf,
        /// Relative noise amplitude applied to each rhs entry.
        #[arg(long)]
        noise: f64,
        /// RNG seed (runs are deterministic given the seed).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(path: &PathBuf) -> mas_lab::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

fn run(cli: Cli) -> mas_lab::Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let report = experiment::run(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Figure { id, out } => {
            let id: FigureId = id.parse()?;
            let entry = experiment::figure(id, &out)?;
            println!("wrote {} ({} bytes, sha256 {})", entry.path, entry.bytes, entry.sha256);
        }
        Command::VerifyKernels { tol, case } => {
            if let Some(case) = case {
                let (closed, quad) = experiment::kernel_case(case[0] as u32, case[1], case[2])?;
                println!("closed form: {closed:.16e}");
                println!("quadrature:  {quad:.16e}");
                println!("deviation:   {:.3e}", (closed - quad).abs());
                return Ok(());
            }
            let report = experiment::verify_kernels(tol)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.pass {
                let (m, x, y) = report.worst_case;
                return Err(Error::Singular(format!(
                    "kernel verification failed at tol {tol:.3e}; worst case J({m}, {x}, {y}) \
                     deviates by {:.3e}",
                    report.worst_grid_deviation
                )));
            }
        }
        Command::RoundoffDemo => {
            let demo = experiment::roundoff_demo()?;
            println!("{}", serde_json::to_string_pretty(&demo)?);
        }
        Command::Perturb { config, noise, seed } => {
            let cfg = load_config(&config)?;
            let report = experiment::perturb(&cfg, noise, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Domain(_) | Error::Config(_) | Error::Json(_) | Error::Io(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

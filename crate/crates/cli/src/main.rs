//! `chb` — config-driven runner for the censored heavy-ball simulator.
//!
//! Subcommands: `run <config>`, `plot <csv...> -o <svg>`, `inspect`,
//! `gen-data <config>`. Exit codes: 0 success, 1 config error, 2 data
//! error, 3 divergence of any run.

mod config;
mod gendata;
mod inspect;
mod plot;
mod runner;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chb", version, about = "Censored heavy-ball federated optimization simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every algorithm in a config; one CSV trace per algorithm plus a
    /// summary table.
    Run { config: PathBuf },
    /// Render traces as a two-panel SVG (metric vs communications and vs
    /// iterations).
    Plot {
        /// Trace CSVs; legend follows this order.
        #[arg(required = true)]
        csvs: Vec<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        /// gap | grad | objective
        #[arg(long, default_value = "gap")]
        metric: String,
    },
    /// Evaluate the descent conditions and rate constant for explicit
    /// parameters, or print the rate-matching recipe.
    Inspect {
        /// key=value pairs: L= mu= delta= M=
        #[arg(long, num_args = 1.., value_name = "K=V")]
        recipe: Option<Vec<String>>,
        /// key=value pairs: alpha= [beta= eps1= eta1= l= mu= m= rho1..3= lambda=]
        #[arg(long, num_args = 1.., value_name = "K=V")]
        params: Option<Vec<String>>,
    },
    /// Materialize a config's synthetic dataset as LIBSVM shard files.
    GenData { config: PathBuf },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

fn load_config(path: &PathBuf) -> Result<config::ExperimentConfig, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_CONFIG
    })?;
    let base = path.parent().unwrap_or(std::path::Path::new("."));
    config::parse_config(&text, base).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn run_error_code(e: &runner::RunError) -> u8 {
    match e {
        runner::RunError::Config(_) => EXIT_CONFIG,
        runner::RunError::Data(_) => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { config } => match load_config(&config) {
            Err(code) => code,
            Ok(cfg) => match runner::execute(&cfg) {
                Ok(outcome) => {
                    if outcome.any_diverged {
                        EXIT_DIVERGED
                    } else {
                        0
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    run_error_code(&e)
                }
            },
        },
        Cmd::Plot { csvs, out, metric } => {
            let Some(metric) = plot::Metric::parse(&metric) else {
                eprintln!("unknown metric `{metric}` (expected gap, grad or objective)");
                return ExitCode::from(EXIT_CONFIG);
            };
            match plot::plot_files(&csvs, &out, metric) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_DATA
                }
            }
        }
        Cmd::Inspect { recipe, params } => {
            let result = match (recipe, params) {
                (Some(args), None) => inspect::inspect_recipe(&args),
                (None, Some(args)) => inspect::inspect_params(&args),
                _ => Err("pass exactly one of --recipe or --params".to_string()),
            };
            match result {
                Ok(text) => {
                    print!("{text}");
                    0
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_CONFIG
                }
            }
        }
        Cmd::GenData { config } => match load_config(&config) {
            Err(code) => code,
            Ok(cfg) => match gendata::generate(&cfg) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    0
                }
                Err(e) => {
                    eprintln!("{e}");
                    run_error_code(&e)
                }
            },
        },
    };
    ExitCode::from(code)
}

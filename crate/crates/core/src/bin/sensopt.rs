use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sensopt::cli::{self, CliError, ExperimentSpec, Overrides, SensitivityArgs};

#[derive(Parser)]
#[command(name = "sensopt", version, about = "Sobol-constrained derivative-free minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment over one or more seeds and write a CSV table.
    Run {
        /// JSON experiment file; flags below override its fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Constraint preset: A, B, C or D.
        #[arg(long)]
        preset: Option<String>,
        /// Seeds, e.g. `1..20`, `1-5,9` or `7`.
        #[arg(long, alias = "seed")]
        seeds: Option<String>,
        /// Number of certification solves per run.
        #[arg(long)]
        budget: Option<usize>,
        /// Maximal per-coordinate polynomial degree.
        #[arg(long)]
        degree: Option<usize>,
        /// Output CSV path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate first-order and total Sobol indices of a test function.
    Sensitivity {
        #[arg(long)]
        objective: String,
        /// Input dimension (defaults to the function's own).
        #[arg(long)]
        dim: Option<usize>,
        /// Lower edge of the box applied to every coordinate.
        #[arg(long, requires = "hi", allow_hyphen_values = true)]
        lo: Option<f64>,
        /// Upper edge of the box applied to every coordinate.
        #[arg(long, requires = "lo", allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long = "n-base")]
        n_base: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            spec,
            preset,
            seeds,
            budget,
            degree,
            out,
        } => {
            let mut experiment = match &spec {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| {
                        CliError::Config(format!("cannot read spec {}: {e}", path.display()))
                    })?;
                    ExperimentSpec::from_json(&text)?
                }
                None => ExperimentSpec::default(),
            };
            Overrides {
                preset,
                seeds,
                budget,
                degree,
                out,
            }
            .apply(&mut experiment);
            let csv = cli::cmd_run(&experiment)?;
            write_output(experiment.out.as_ref(), &csv)
        }
        Command::Sensitivity {
            objective,
            dim,
            lo,
            hi,
            n_base,
            seed,
            out,
        } => {
            let args = SensitivityArgs {
                objective,
                dim,
                bounds: lo.zip(hi),
                n_base,
                seed,
            };
            let csv = cli::cmd_sensitivity(&args)?;
            write_output(out.as_ref(), &csv)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sensopt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

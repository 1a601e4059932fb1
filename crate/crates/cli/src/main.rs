//! Batch front-end for Davenport series analysis.
//!
//! One scenario JSON file configures the family and the command parameters;
//! each subcommand writes CSV/JSON artifacts into the output directory. With
//! a fixed seed, repeated runs produce byte-identical artifacts.
//!
//! Exit codes: 1 = configuration/validation/IO, 2 = resource limit,
//! 3 = numeric failure.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use davenport_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "davenport",
    about = "Construct, transform and analyze multivariate Davenport series",
    version
)]
struct Cli {
    /// Scenario configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory (overrides the scenario's out_dir).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Seed for the low-discrepancy samplers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the main truncation radius R of the subcommand.
    #[arg(long = "R", global = true)]
    r_override: Option<f64>,
    /// Override the evaluation truncation N.
    #[arg(long = "N", global = true)]
    n_override: Option<f64>,
    /// Override the grid resolution (applied to every axis).
    #[arg(long = "grid", global = true)]
    grid_override: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the partial sum on a grid; writes grid.csv + grid.meta.json.
    Eval,
    /// Jump and maximal tables, theta report, inversion residual.
    Jumps,
    /// Pointwise Hölder exponent estimates at the configured probe points.
    Exponent,
    /// Empirical multifractal spectrum with the predicted overlay.
    Spectrum,
    /// Sobolev convergence-space classification (plus optional norms).
    Sobolev,
    /// Run the built-in deterministic battery into the output directory.
    Selftest,
}

pub struct Overrides {
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub r: Option<f64>,
    pub n: Option<f64>,
    pub grid: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's help/version go to stdout with success.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        r: cli.r_override,
        n: cli.n_override,
        grid: cli.grid_override,
    };
    let result = match cli.command {
        Command::Selftest => commands::cmd_selftest(&overrides),
        ref cmd => {
            let path = match &cli.config {
                Some(p) => p.clone(),
                None => {
                    eprintln!("error: --config is required for this subcommand");
                    return ExitCode::from(1);
                }
            };
            match commands::load_scenario(&path, &overrides) {
                Err(e) => Err(e),
                Ok(scenario) => match cmd {
                    Command::Eval => commands::cmd_eval(&scenario, &overrides),
                    Command::Jumps => commands::cmd_jumps(&scenario, &overrides),
                    Command::Exponent => commands::cmd_exponent(&scenario, &overrides),
                    Command::Spectrum => commands::cmd_spectrum(&scenario, &overrides),
                    Command::Sobolev => commands::cmd_sobolev(&scenario, &overrides),
                    Command::Selftest => unreachable!(),
                },
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::InvalidInput(_)) => 1,
        Some(CoreError::ResourceLimit(_)) => 2,
        Some(CoreError::Numeric(_)) => 3,
        None => 1,
    }
}

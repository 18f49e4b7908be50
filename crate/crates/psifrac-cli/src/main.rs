//! Command-line front end for the psifrac solver.
//!
//! Subcommands:
//! - `solve`: run the Picard solver on a problem definition file and write
//!   the solution table (CSV or JSON) plus a diagnostics record on stdout.
//! - `check`: evaluate the Banach contraction bound or the Leray-Schauder
//!   growth-bound hypothesis from the config's checker block.
//! - `validate`: solve the built-in closed-form reference problems over a
//!   list of resolutions and report errors and convergence orders.
//!
//! Exit codes: 0 ok/satisfied, 1 hypothesis unsatisfied or validation over
//! budget, 2 non-convergence, 3 divergence, 4 I/O error, 5 config error.

// Validation predicates are written as negated comparisons on purpose: a NaN
// field must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CheckKind, OutputFormat};

#[derive(Parser)]
#[command(
    name = "psifrac",
    version,
    about = "Boundary-value solver for psi-Caputo fractional differential equations of order in (2,3)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a config file.
    Solve {
        /// Problem definition file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output path for the solution table.
        #[arg(long)]
        out: PathBuf,
        /// Table format.
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Evaluate a solvability hypothesis from the config's checker block.
    Check {
        /// Problem definition file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Which hypothesis to check.
        #[arg(long, value_enum)]
        which: CheckKind,
    },
    /// Run the built-in reference problems and report convergence.
    Validate {
        /// Comma-separated grid resolutions.
        #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
        n: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve {
            config,
            out,
            format,
        } => commands::cmd_solve(&config, &out, format),
        Command::Check { config, which } => commands::cmd_check(&config, which),
        Command::Validate { n } => commands::cmd_validate(&n),
    };
    ExitCode::from(code as u8)
}

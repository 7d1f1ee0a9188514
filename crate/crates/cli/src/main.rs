//! Command-line front end for fractional operators on metric graphs.
//!
//! Exit codes: 0 pass, 1 internal error, 2 configuration error,
//! 3 verification/consistency failure.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{CmdError, FracKind, FracSide, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fracgraph",
    about = "Fractional differential operators on metric graphs: verification and spectral runs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonRunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports and CSV files.
    #[arg(long)]
    out: PathBuf,
    /// Override the grid size (cells per edge).
    #[arg(long)]
    n: Option<usize>,
    /// Override the grading exponent.
    #[arg(long)]
    grading: Option<f64>,
    /// Override the fractional order.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify self-adjointness of the vertex conditions numerically.
    CheckSa {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Override the number of random trials per family.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Build and validate the spectral solution on a star graph.
    Solve {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Override the reference rate on bond 1.
        #[arg(long)]
        k1: Option<f64>,
        /// Override the flux coefficient on bond 1.
        #[arg(long)]
        b1: Option<f64>,
        /// Override the kernel coefficient on bond 1.
        #[arg(long)]
        c1: Option<f64>,
        /// Fail on inconsistent sum constraints.
        #[arg(long, conflicts_with = "permissive")]
        strict: bool,
        /// Report inconsistent sum constraints without failing.
        #[arg(long)]
        permissive: bool,
    },
    /// Evaluate the two-parameter Mittag-Leffler function.
    Ml {
        alpha: f64,
        beta: f64,
        /// Arguments to evaluate at.
        #[arg(required = true)]
        z: Vec<f64>,
    },
    /// Evaluate a fractional integral or derivative of a power expression.
    Frac {
        /// Expression: sums of constants and power terms, e.g. "3*t^0.5 + 2".
        #[arg(long)]
        expr: String,
        /// Fractional order in (0, 1).
        #[arg(long)]
        alpha: f64,
        /// Operator side.
        #[arg(long, value_enum)]
        side: SideArg,
        /// Integral or derivative.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Grid cells.
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// Grading exponent.
        #[arg(long, default_value_t = 2.0)]
        grading: f64,
        /// Interval length.
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Integral,
    Derivative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CheckSa { common, trials } => {
            let overrides = Overrides {
                n: common.n,
                grading: common.grading,
                alpha: common.alpha,
                tol: common.tol,
                seed: common.seed,
                trials,
                ..Overrides::default()
            };
            commands::cmd_check_sa(&common.config, &common.out, &overrides)
        }
        Command::Solve {
            common,
            k1,
            b1,
            c1,
            strict,
            permissive,
        } => {
            let overrides = Overrides {
                n: common.n,
                grading: common.grading,
                alpha: common.alpha,
                tol: common.tol,
                seed: common.seed,
                k1,
                b1,
                c1,
                strict: if strict {
                    Some(true)
                } else if permissive {
                    Some(false)
                } else {
                    None
                },
                ..Overrides::default()
            };
            commands::cmd_solve(&common.config, &common.out, &overrides)
        }
        Command::Ml { alpha, beta, z } => commands::cmd_ml(alpha, beta, &z),
        Command::Frac {
            expr,
            alpha,
            side,
            kind,
            n,
            grading,
            length,
            out,
        } => commands::cmd_frac(
            &expr,
            alpha,
            match side {
                SideArg::Left => FracSide::Left,
                SideArg::Right => FracSide::Right,
            },
            match kind {
                KindArg::Integral => FracKind::Integral,
                KindArg::Derivative => FracKind::Derivative,
            },
            n,
            grading,
            length,
            out.as_ref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(exit_code_u8(&e))
        }
    }
}

fn exit_code_u8(e: &CmdError) -> u8 {
    e.exit_code() as u8
}

//! `kdv-star`: checks, profiles, phase portraits and simulations of KdV
//! solitary waves on star graphs.
//!
//! Exit status: 0 pass, 1 negative verdict, 2 usage or configuration error,
//! 3 blow-up during a simulation.

mod check;
mod config;
mod error;
mod output;
mod phase;
mod simulate;
mod wave;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "kdv-star",
    version,
    about = "KdV solitary waves on metric star graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the compatibility checklist for the graph and coupling in a file.
    Check {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Overrides the file's tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sample the closed-form profile of every edge.
    Wave {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
        /// `LO:HI:STEP` in the travelling coordinate.
        #[arg(long, allow_hyphen_values = true, default_value = "-20:20:0.05")]
        range: String,
    },
    /// Phase portrait of the reduced first-order system.
    Phase {
        /// Take the coefficients from an edge of this graph file.
        #[arg(long, conflicts_with_all = ["alpha", "beta", "gamma", "c"])]
        graph: Option<PathBuf>,
        /// Edge as `minus<i>` or `plus<i>`.
        #[arg(long, default_value = "minus0", requires = "graph")]
        edge: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// Integration constant `A`.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        a: f64,
        /// `LO:HI:N` for both axes of the vector-field grid.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate the travelling wave with the finite-difference solver.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_final: Option<f64>,
        /// Grid spacing; the time step follows the stability bound.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Simulate even when the checklist fails.
        #[arg(long)]
        override_check: bool,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Check { graph, common, tol } => check::run(&graph, &common.out, tol),
        Command::Wave {
            graph,
            common,
            range,
        } => wave::run(&graph, &common.out, &range),
        Command::Phase {
            graph,
            edge,
            alpha,
            beta,
            gamma,
            c,
            a,
            range,
            common,
        } => {
            let source = match graph {
                Some(path) => phase::Source::Graph { path, edge },
                None => phase::Source::Inline {
                    alpha: alpha.ok_or_else(|| {
                        CliError::Config("--alpha is required without --graph".into())
                    })?,
                    beta: beta.unwrap_or(0.0),
                    gamma: gamma.ok_or_else(|| {
                        CliError::Config("--gamma is required without --graph".into())
                    })?,
                    c: c.ok_or_else(|| CliError::Config("--c is required without --graph".into()))?,
                },
            };
            phase::run(source, a, range.as_deref(), &common.out)
        }
        Command::Simulate {
            graph,
            common,
            t_final,
            h,
            tol,
            override_check,
        } => simulate::run(
            &graph,
            &common.out,
            simulate::Overrides {
                t_final,
                h,
                tol,
                override_check,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

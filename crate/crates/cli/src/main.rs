use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod artifact;
mod commands;
mod render;

use commands::CliError;

#[derive(Parser)]
#[command(name = "linkmorse", version, about = "Cyclic configurations of polygonal linkages and their Morse indices")]
struct Cli {
    #[command(flatten)]
    tol: Tolerances,
    #[command(subcommand)]
    command: Command,
}

/// Knobs shared by every subcommand.
#[derive(Args, Debug, Clone, Copy, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct Tolerances {
    /// Relative bracket width at which radius bisection stops.
    #[arg(long = "tol-root", global = true, default_value_t = 1e-14)]
    pub root: f64,
    /// Relative threshold for central edges, vanishing arcs, δ = 0 and
    /// circle fits of input configurations.
    #[arg(long = "tol-degen", global = true, default_value_t = 1e-7)]
    pub degen: f64,
    /// Relative threshold for zero eigenvalues in the numerical Hessian.
    #[arg(long = "tol-eig", global = true, default_value_t = 1e-7)]
    pub eig: f64,
    /// Seed for the randomized frame checks in `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate every cyclic configuration of a linkage.
    Enumerate {
        /// Linkage JSON: {"lengths": [...]}.
        #[arg(short, long)]
        input: PathBuf,
        /// Enumeration JSON; printed to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a flat CSV projection.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Morse index of one configuration, by formula and by numerical Hessian.
    Index {
        /// Configuration JSON: {"points": [[x, y], ...]}.
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Recompute an enumeration artifact and compare formula with oracle.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        /// Random tangent frames tried per configuration.
        #[arg(long, default_value_t = 2)]
        probes: usize,
    },
    /// Slide the vertices of one cyclic configuration to another along a
    /// fixed circle and log the sign events.
    Deform {
        #[arg(short = 'a', long = "from")]
        a: PathBuf,
        #[arg(short = 'b', long = "to")]
        b: PathBuf,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Numerical Hessian check every this many frames (0 = off).
        #[arg(long, default_value_t = 0)]
        oracle_stride: usize,
        /// Event log JSON; printed to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw an enumeration artifact (as a grid) or a single configuration.
    Render {
        #[arg(short, long)]
        input: PathBuf,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    cli.tol.validate()?;
    let tol = cli.tol;
    match cli.command {
        Command::Enumerate { input, output, csv } => {
            commands::enumerate(&input, output.as_deref(), csv.as_deref(), &tol)
        }
        Command::Index { input } => commands::index(&input, &tol),
        Command::Verify { input, probes } => commands::verify(&input, probes, &tol),
        Command::Deform { a, b, steps, oracle_stride, output } => {
            commands::deform(&a, &b, steps, oracle_stride, output.as_deref(), &tol)
        }
        Command::Render { input, output } => render::render(&input, &output, &tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

//! `parasdc`: experiment driver for the collocation/SDC library.
//!
//! Four subcommands, each emitting CSV plus a key=value manifest:
//! `landscape` (stiff-limit objective scan + minimizations), `itercounts`
//! (preconditioner comparison across parameter sweeps), `convrates`
//! (error-contraction slopes for SDC and the Newton variants), and `single`
//! (one run with full residual/error history).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use parasdc::collocation::PrecondKind;
use parasdc::problems::Stencil;
use parasdc::study::{Method, ProblemKey};

mod experiments;
mod manifest;

/// Errors split by exit code: usage problems exit 2, runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

#[derive(Parser)]
#[command(
    name = "parasdc",
    version,
    about = "Collocation/SDC experiment driver",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the M=2 stiff-limit spectral radius over (q1, q2) and run both
    /// canonical minimizations
    Landscape(LandscapeArgs),
    /// Iteration counts for the five preconditioner kinds across problem
    /// parameter sweeps
    Itercounts(ItercountsArgs),
    /// Error-contraction ratios and log-log slopes for SDC, simplified
    /// Newton, and inexact Newton
    Convrates(ConvratesArgs),
    /// One time-integration run with full residual and error history
    Single(SingleArgs),
}

#[derive(Args)]
pub struct LandscapeArgs {
    /// Per-axis grid resolution (default 400)
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Worker threads (any value gives bitwise-identical output)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV path; the manifest lands next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reproduce a recorded run; only --out and --workers may be combined
    #[arg(long = "from-manifest", value_name = "PATH")]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct ItercountsArgs {
    /// Restrict the sweep to one problem (A=heat, B=advection, C=vanderpol,
    /// D=kpp; default all four)
    #[arg(long)]
    pub problem: Option<ProblemKey>,
    /// Override the parameter sweep (requires --problem)
    #[arg(long, num_args = 1.., value_name = "FLOAT")]
    pub param: Option<Vec<f64>>,
    /// Collocation nodes (default 3)
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Step size; the run is one step, so T = dt (default 0.1)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Residual tolerance (default 1e-8)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Override the spatial resolution of the PDE problems
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Advection stencil: centered or upwind (default centered)
    #[arg(long)]
    pub stencil: Option<Stencil>,
    /// Worker threads (any value gives bitwise-identical output)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV path; the manifest lands next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reproduce a recorded run; only --out and --workers may be combined
    #[arg(long = "from-manifest", value_name = "PATH")]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConvratesArgs {
    /// Collocation nodes (default 5)
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// End time; steps 2,4,8,16 divide it (default 0.1)
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Spatial resolution (default 255)
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Publication-scale grid (N=2047)
    #[arg(long)]
    pub full: bool,
    /// Wave-speed parameter lambda0 (default 5)
    #[arg(long)]
    pub param: Option<f64>,
    /// Residual tolerance for the warm-up steps (default 1e-8)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads (any value gives bitwise-identical output)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV path; the manifest lands next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reproduce a recorded run; only --out and --workers may be combined
    #[arg(long = "from-manifest", value_name = "PATH")]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct SingleArgs {
    /// Problem selector (A=heat, B=advection, C=vanderpol, D=kpp; default A)
    #[arg(long)]
    pub problem: Option<ProblemKey>,
    /// Stiffness parameter (default: per-problem)
    #[arg(long)]
    pub param: Option<f64>,
    /// Collocation nodes (default 3)
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Step size (default 0.1)
    #[arg(long)]
    pub dt: Option<f64>,
    /// End time; give at most two of --dt, --T, --steps
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Number of steps (default 1)
    #[arg(long)]
    pub steps: Option<usize>,
    /// Residual tolerance (default 1e-8)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Preconditioner for sdc/inexact: ie, lu, qpar, iepar, min (default lu)
    #[arg(long)]
    pub precond: Option<PrecondKind>,
    /// Method: sdc, newton, simplified, inexact (default sdc)
    #[arg(long)]
    pub method: Option<Method>,
    /// Override the spatial resolution of the PDE problems
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Advection stencil: centered or upwind (default centered)
    #[arg(long)]
    pub stencil: Option<Stencil>,
    /// Worker threads (any value gives bitwise-identical output)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV path; solution CSV and manifest land next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reproduce a recorded run; only --out and --workers may be combined
    #[arg(long = "from-manifest", value_name = "PATH")]
    pub from_manifest: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Landscape(args) => experiments::landscape(args),
        Command::Itercounts(args) => experiments::itercounts(args),
        Command::Convrates(args) => experiments::convrates(args),
        Command::Single(args) => experiments::single(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

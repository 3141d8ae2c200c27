//! Collocation time integration built around spectral deferred corrections (SDC)
//! viewed as preconditioned Picard iteration, with both serial and node-parallel
//! preconditioners, plus diagonalization-based direct and (inexact) simplified
//! Newton solvers for the collocation problem.
//!
//! The building blocks, bottom to top:
//!
//! - [`linalg`]: dense matrices over `f64`/`Complex64`, LU with partial pivoting,
//!   Doolittle factorization, a dense nonsymmetric eigensolver, tridiagonal solves.
//! - [`collocation`]: Radau (right) collocation schemes on `[0, dt]` and the five
//!   preconditioners (`IE`, `LU`, `Qpar`, `IEpar`, `MIN`), together with the SDC
//!   iteration matrix and its stiff limit.
//! - [`minimizer`]: Nelder-Mead minimization of the stiff-limit spectral radius,
//!   which produces the `MIN` preconditioner and the objective-landscape scan.
//! - [`problems`]: the test problems (heat, advection, Van der Pol, KPP reaction
//!   diffusion, scalar Dahlquist) behind a common right-hand-side/solver trait.
//! - [`sweeper`]: SDC sweeps, per-step iteration to tolerance, and time stepping.
//! - [`solvers`]: direct linear collocation solve, simplified Newton, and inexact
//!   simplified Newton, all via diagonalization of the quadrature matrix.
//! - [`study`]: the computational parts of the experiment drivers (iteration-count
//!   tables and convergence-rate measurements) shared by the CLI and the tests.
//!
//! Everything is deterministic: runs with different `workers` settings produce
//! bitwise-identical results, because parallel loops only ever partition index
//! ranges whose per-index work is independent.

pub mod collocation;
pub mod error;
pub mod linalg;
pub mod minimizer;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod study;
pub mod sweeper;
pub mod workers;

pub use collocation::{CollocationScheme, PrecondKind, Preconditioner};
pub use error::{
    CollocationError, LinalgError, MinimizerError, ProblemError, SolverError, SweepError,
};
pub use linalg::{CMatrix, EigenDecomposition, Matrix, RMatrix};
pub use minimizer::MinimizerResult;
pub use problems::{
    AdvectionProblem, BoundaryKind, DahlquistProblem, HeatProblem, KppProblem, Problem,
    SpatialGrid, Stencil, VanDerPolProblem,
};
pub use solvers::{DiagSource, NewtonConfig, NewtonVariant, QDiagonalization};
pub use sweeper::{NodeStates, RunReport, SweepConfig, TimeSeries};

/// Library version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Error types, one enum per module layer. Numeric guard failures carry the
//! offending values so callers can report what tripped.

use thiserror::Error;

/// Dense linear algebra failures.
#[derive(Debug, Clone, Error)]
pub enum LinalgError {
    /// A pivot fell below the singularity threshold during elimination.
    #[error("singular matrix: pivot modulus {pivot:.3e} below {threshold:.3e} at column {col}")]
    SingularMatrix {
        col: usize,
        pivot: f64,
        threshold: f64,
    },
    /// Operand shapes are incompatible.
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
    /// An iterative stage (QR sweeps, inverse iteration, root finding) ran out
    /// of its iteration budget or failed a residual guard.
    #[error("convergence failure: {context}")]
    ConvergenceFailure { context: String },
    /// Eigendecomposition needs simple eigenvalues to produce an invertible V.
    #[error("eigenvalues not distinct: min gap {gap:.3e} below {threshold:.3e}")]
    EigenvaluesNotDistinct { gap: f64, threshold: f64 },
}

/// Collocation scheme construction failures.
#[derive(Debug, Clone, Error)]
pub enum CollocationError {
    /// Fewer than two collocation nodes requested.
    #[error("node count M={m} unsupported; need M >= 2")]
    InvalidNodeCount { m: usize },
    /// Node root-finding did not converge.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Nelder-Mead / MIN-preconditioner failures.
#[derive(Debug, Clone, Error)]
pub enum MinimizerError {
    /// The minimizer stopped without a usable preconditioner (objective >= 1
    /// means the stiff-limit iteration would not contract).
    #[error("minimization failed: objective {rho:.6e} after {iterations} iterations (converged: {converged})")]
    MinimizationFailed {
        rho: f64,
        iterations: usize,
        converged: bool,
    },
}

/// Problem-level failures (right-hand sides, node solves, exact solutions).
#[derive(Debug, Clone, Error)]
pub enum ProblemError {
    /// A nonlinear node solve exhausted its Newton budget.
    #[error("node solve diverged: residual {residual:.3e} after {iterations} Newton iterations")]
    DivergedNodeSolve { iterations: usize, residual: f64 },
    /// The problem has no closed-form solution to compare against.
    #[error("exact solution unavailable for problem '{name}'")]
    ExactSolutionUnavailable { name: &'static str },
    /// The traveling-wave parameter root-find failed.
    #[error("wave parameter solve failed: {context}")]
    WaveParameterFailure { context: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// SDC sweep / time-stepping failures.
#[derive(Debug, Clone, Error)]
pub enum SweepError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Collocation(#[from] CollocationError),
    #[error(transparent)]
    Minimizer(#[from] MinimizerError),
}

/// Experiment-driver failures.
#[derive(Debug, Clone, Error)]
pub enum StudyError {
    /// A run that the experiment requires to converge did not.
    #[error("run failed to converge: {context}")]
    NotConverged { context: String },
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Collocation(#[from] CollocationError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Diagonalization-based solver failures.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    /// The direct solve requires a linear right-hand side.
    #[error("direct collocation solve requires a linear problem, got '{name}'")]
    NotLinear { name: &'static str },
    /// Diagonalization needs simple eigenvalues.
    #[error("eigenvalues not distinct: min gap {gap:.3e} below {threshold:.3e}")]
    EigenvaluesNotDistinct { gap: f64, threshold: f64 },
    /// The recovered real iterate had a non-negligible imaginary part.
    #[error("imaginary residue {max_imag:.3e} above {threshold:.3e} in recovered state")]
    ImaginaryResidue { max_imag: f64, threshold: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

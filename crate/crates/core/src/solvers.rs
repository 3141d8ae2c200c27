//! Direct and Newton-type solvers for the collocation system
//!
//! ```text
//! G(U) = U - (1 ⊗ u0) - dt (Q ⊗ I) F(U) = 0
//! ```
//!
//! built on the diagonalization `Q = V diag(lambda) V^-1`:
//!
//! - [`linear_direct_solve`]: for linear `f`, transform by `V^-1`, solve the
//!   M decoupled complex systems `(I - dt lambda_i J) x_i = w_i`, transform
//!   back. The M solves are independent and can be distributed over workers.
//! - [`newton_full`]: the serial reference; assembles the dense MN x MN
//!   Jacobian of `G` each iteration (no node parallelism is possible because
//!   the node-dependent Jacobians destroy the Kronecker structure).
//! - [`newton_simplified`]: freezes the Jacobian at `u0`, which restores the
//!   Kronecker structure `I - dt Q (x) J(u0)` and lets every iteration reuse
//!   the diagonalization. Contracts like O(dt^2).
//! - [`newton_inexact`]: replaces `Q` by a triangular `Q_delta` in the frozen
//!   Jacobian, so each iteration is a block-forward substitution in real
//!   arithmetic (the point of the method: no complex solves). Contracts like
//!   O(dt).
//!
//! All iterations stop on the same collocation residual as the SDC sweeper
//! (shared contraction code), so "converged" means the same thing everywhere.

use num_complex::Complex64;

use crate::collocation::{CollocationScheme, Preconditioner};
use crate::error::{ProblemError, SolverError};
use crate::linalg::{eigendecompose, lu_factor_solve, vec_inf_norm, CMatrix, RMatrix};
use crate::problems::Problem;
use crate::sweeper::{collocation_residual, quadrature_states, NodeStates, RunReport};
use crate::workers::run_indexed;

/// Absolute bound on the imaginary residue left in reconstructed real states.
pub const IMAG_RESIDUE_THRESHOLD: f64 = 1e-10;

/// Relative bound on `|V diag V^-1 - Q|` at construction.
pub const RECONSTRUCTION_THRESHOLD: f64 = 1e-11;

/// Which matrix the eigendecomposition was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagSource {
    /// The full quadrature matrix `Q`.
    FullQ,
    /// A diagonal preconditioner matrix `Q_delta` (trivially diagonalized).
    /// Triangular kinds are excluded: they may be defective, and
    /// block-forward substitution solves them exactly instead.
    QDelta,
}

/// Eigendecomposition of the quadrature matrix (or of a diagonal
/// preconditioner), validated for use in the three-step solvers.
#[derive(Clone, Debug)]
pub struct QDiagonalization {
    source: DiagSource,
    values: Vec<Complex64>,
    vectors: CMatrix,
    inverse: CMatrix,
}

impl QDiagonalization {
    /// Diagonalize a scheme's `Q`. Fails if eigenvalues collide or the
    /// reconstruction drifts beyond [`RECONSTRUCTION_THRESHOLD`] (relative).
    pub fn from_scheme(scheme: &CollocationScheme) -> Result<Self, SolverError> {
        let q = scheme.q();
        let eig = eigendecompose(q).map_err(|e| match e {
            crate::error::LinalgError::EigenvaluesNotDistinct { gap, threshold } => {
                SolverError::EigenvaluesNotDistinct { gap, threshold }
            }
            other => SolverError::Linalg(other),
        })?;
        let m = scheme.m();
        let recon = eig.reconstruct();
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                err = err.max((recon[(i, j)] - q[(i, j)]).norm());
                scale = scale.max(q[(i, j)].abs());
            }
        }
        if err > RECONSTRUCTION_THRESHOLD * scale {
            return Err(SolverError::Linalg(
                crate::error::LinalgError::ConvergenceFailure {
                    context: format!(
                        "Q reconstruction residual {err:.3e} above {:.3e}",
                        RECONSTRUCTION_THRESHOLD * scale
                    ),
                },
            ));
        }
        Ok(Self {
            source: DiagSource::FullQ,
            values: eig.values,
            vectors: eig.vectors,
            inverse: eig.inverse,
        })
    }

    /// Trivial diagonalization of a diagonal preconditioner: `V = I`,
    /// eigenvalues are the diagonal. Panics on non-diagonal kinds.
    pub fn from_diagonal_precond(precond: &Preconditioner) -> Self {
        assert!(
            precond.is_parallel(),
            "only diagonal preconditioners are trivially diagonalizable"
        );
        let qd = precond.q_delta();
        let m = qd.rows();
        let values = (0..m).map(|i| Complex64::new(qd[(i, i)], 0.0)).collect();
        Self {
            source: DiagSource::QDelta,
            values,
            vectors: CMatrix::identity(m),
            inverse: CMatrix::identity(m),
        }
    }

    pub fn source(&self) -> DiagSource {
        self.source
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }
}

/// Newton flavor, used by the CLI dispatcher.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NewtonVariant {
    FullNewton,
    SimplifiedNewton,
    InexactSimplifiedNewton,
}

/// Iteration controls for the Newton-type solvers.
#[derive(Clone, Debug)]
pub struct NewtonConfig {
    /// Collocation residual stop.
    pub tol: f64,
    /// Update cap per step.
    pub max_iter: usize,
    pub variant: NewtonVariant,
    /// Worker threads for the decoupled complex/diagonal solves.
    pub workers: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            variant: NewtonVariant::SimplifiedNewton,
            workers: 1,
        }
    }
}

/// `out_m = sum_j mat[(m, j)] xs_j` for M complex node vectors.
fn combine(mat: &CMatrix, xs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let m = xs.len();
    let dim = xs.first().map_or(0, Vec::len);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; m];
    for (r, row) in out.iter_mut().enumerate() {
        for (j, x) in xs.iter().enumerate() {
            let w = mat[(r, j)];
            if w != Complex64::new(0.0, 0.0) {
                for i in 0..dim {
                    row[i] += w * x[i];
                }
            }
        }
    }
    out
}

/// Take real parts, guarding the imaginary residue (absolute).
fn realize(states: Vec<Vec<Complex64>>) -> Result<Vec<Vec<f64>>, SolverError> {
    let mut max_imag: f64 = 0.0;
    for row in &states {
        for z in row {
            max_imag = max_imag.max(z.im.abs());
        }
    }
    if max_imag > IMAG_RESIDUE_THRESHOLD {
        return Err(SolverError::ImaginaryResidue {
            max_imag,
            threshold: IMAG_RESIDUE_THRESHOLD,
        });
    }
    Ok(states
        .into_iter()
        .map(|row| row.into_iter().map(|z| z.re).collect())
        .collect())
}

/// `G_m(U) = u_m - u0 - dt sum_j q_mj F_j`, the negated collocation defect.
/// Its max-abs is exactly the sweeper's collocation residual.
fn collocation_defect(
    scheme: &CollocationScheme,
    dt: f64,
    u0: &[f64],
    ns: &NodeStates,
) -> Vec<Vec<f64>> {
    let quad = quadrature_states(scheme, dt, u0, &ns.rhs);
    ns.states
        .iter()
        .zip(quad)
        .map(|(u, q)| u.iter().zip(q).map(|(a, b)| a - b).collect())
        .collect()
}

/// Solve the linear collocation problem by diagonalization: transform the
/// right-hand side by `V^-1`, solve M independent shifted systems (dispatched
/// over `workers`), transform back, and discard the (checked) imaginary part.
pub fn linear_direct_solve(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    diag: &QDiagonalization,
    t0: f64,
    dt: f64,
    u0: &[f64],
    workers: usize,
) -> Result<NodeStates, SolverError> {
    assert_eq!(
        diag.source(),
        DiagSource::FullQ,
        "direct solve needs Q itself"
    );
    if !problem.is_linear() {
        return Err(SolverError::NotLinear {
            name: problem.name(),
        });
    }
    let m = scheme.m();
    assert_eq!(m, diag.m());
    let u0c: Vec<Complex64> = u0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let rhs: Vec<Vec<Complex64>> = vec![u0c; m];

    // step 1: tilde(b) = (V^-1 (x) I) b
    let w = combine(&diag.inverse, &rhs);
    // step 2: M decoupled complex solves, safe to run concurrently
    let solved = run_indexed(workers, m, |i| {
        problem.shifted_solve_complex(u0, dt * diag.values[i], &w[i])
    });
    let mut x = Vec::with_capacity(m);
    for item in solved {
        x.push(item?);
    }
    // step 3: back-transform and take the real part
    let states = realize(combine(&diag.vectors, &x))?;
    let times = scheme.node_times(t0, dt);
    let rhs = states
        .iter()
        .zip(&times)
        .map(|(u, &t)| problem.rhs(u, t))
        .collect();
    Ok(NodeStates { states, rhs })
}

/// Shared iteration shell: apply `update` until the collocation residual
/// reaches `tol` or `max_iter` updates have run. Mirrors the sweeper's
/// semantics (`iterations` = updates performed, residual checked after each).
fn iterate_newton(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    t0: f64,
    dt: f64,
    u0: &[f64],
    config: &NewtonConfig,
    mut update: impl FnMut(&mut NodeStates) -> Result<(), SolverError>,
) -> Result<RunReport, SolverError> {
    let times = scheme.node_times(t0, dt);
    let mut ns = NodeStates::spread(problem, &times, u0);
    let exact_end = match problem.exact(t0 + dt) {
        Ok(v) => Some(v),
        Err(ProblemError::ExactSolutionUnavailable { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut residual_history = Vec::new();
    let mut error_history = Vec::new();
    let mut converged = false;
    while residual_history.len() < config.max_iter {
        update(&mut ns)?;
        ns.refresh_rhs(problem, &times);
        let res = collocation_residual(scheme, dt, u0, &ns);
        residual_history.push(res);
        if let Some(exact) = &exact_end {
            let diff: Vec<f64> = ns
                .end_state()
                .iter()
                .zip(exact)
                .map(|(a, b)| a - b)
                .collect();
            error_history.push(vec_inf_norm(&diff));
        }
        if res <= config.tol {
            converged = true;
            break;
        }
    }
    let iterations = if converged {
        residual_history.len()
    } else {
        config.max_iter
    };
    Ok(RunReport {
        iterations,
        converged,
        residual_history,
        error_history,
        states: ns,
    })
}

/// Full Newton on `G(U) = 0`: assembles the dense MN x MN Jacobian with the
/// per-node Jacobians at the current iterate and solves for the update. The
/// reference method; exact for linear problems in one iteration.
pub fn newton_full(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    t0: f64,
    dt: f64,
    u0: &[f64],
    config: &NewtonConfig,
) -> Result<RunReport, SolverError> {
    let m = scheme.m();
    let nd = problem.dim();
    let q = scheme.q();
    iterate_newton(problem, scheme, t0, dt, u0, config, |ns| {
        let g = collocation_defect(scheme, dt, u0, ns);
        let mut big = RMatrix::identity(m * nd);
        for j in 0..m {
            let jac = problem.jacobian(&ns.states[j]);
            for r in 0..m {
                let w = dt * q[(r, j)];
                if w != 0.0 {
                    for a in 0..nd {
                        for b in 0..nd {
                            big[(r * nd + a, j * nd + b)] -= w * jac[(a, b)];
                        }
                    }
                }
            }
        }
        let rhs: Vec<f64> = g.iter().flat_map(|row| row.iter().map(|x| -x)).collect();
        let e = lu_factor_solve(&big, &rhs)?;
        for (mi, state) in ns.states.iter_mut().enumerate() {
            for (a, s) in state.iter_mut().enumerate() {
                *s += e[mi * nd + a];
            }
        }
        Ok(())
    })
}

/// Simplified Newton: Jacobian frozen at `u0`, so every iteration solves
/// `(I - dt Q (x) J(u0)) e = -G(U^k)` through the diagonalization of `Q`.
/// The M complex solves per iteration are independent.
pub fn newton_simplified(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    diag: &QDiagonalization,
    t0: f64,
    dt: f64,
    u0: &[f64],
    config: &NewtonConfig,
) -> Result<RunReport, SolverError> {
    assert_eq!(
        diag.source(),
        DiagSource::FullQ,
        "simplified Newton needs Q itself"
    );
    let m = scheme.m();
    assert_eq!(m, diag.m());
    iterate_newton(problem, scheme, t0, dt, u0, config, |ns| {
        let g = collocation_defect(scheme, dt, u0, ns);
        let neg_g: Vec<Vec<Complex64>> = g
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(-x, 0.0)).collect())
            .collect();
        let w = combine(&diag.inverse, &neg_g);
        let solved = run_indexed(config.workers, m, |i| {
            problem.shifted_solve_complex(u0, dt * diag.values[i], &w[i])
        });
        let mut x = Vec::with_capacity(m);
        for item in solved {
            x.push(item?);
        }
        let e = realize(combine(&diag.vectors, &x))?;
        for (state, em) in ns.states.iter_mut().zip(&e) {
            for (s, d) in state.iter_mut().zip(em) {
                *s += d;
            }
        }
        Ok(())
    })
}

/// Inexact simplified Newton: `Q` replaced by the (lower triangular)
/// preconditioner matrix in the frozen Jacobian, so each iteration is a
/// block-forward substitution in real arithmetic. Diagonal kinds decouple
/// completely and are dispatched over workers.
pub fn newton_inexact(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    precond: &Preconditioner,
    t0: f64,
    dt: f64,
    u0: &[f64],
    config: &NewtonConfig,
) -> Result<RunReport, SolverError> {
    let m = scheme.m();
    let qd = precond.q_delta();
    for r in 0..m {
        for c in r + 1..m {
            assert_eq!(qd[(r, c)], 0.0, "inexact Newton needs a triangular Q_delta");
        }
    }
    iterate_newton(problem, scheme, t0, dt, u0, config, |ns| {
        let g = collocation_defect(scheme, dt, u0, ns);
        let e: Vec<Vec<f64>> = if precond.is_parallel() {
            let solved = run_indexed(config.workers, m, |i| {
                let b: Vec<f64> = g[i].iter().map(|x| -x).collect();
                problem.shifted_solve_real(u0, dt * qd[(i, i)], &b)
            });
            let mut e = Vec::with_capacity(m);
            for item in solved {
                e.push(item?);
            }
            e
        } else {
            let mut e: Vec<Vec<f64>> = Vec::with_capacity(m);
            for r in 0..m {
                let mut b: Vec<f64> = g[r].iter().map(|x| -x).collect();
                for (j, ej) in e.iter().enumerate() {
                    let w = dt * qd[(r, j)];
                    if w != 0.0 {
                        let jv = problem.jacobian_apply(u0, ej);
                        for (bi, ji) in b.iter_mut().zip(&jv) {
                            *bi += w * ji;
                        }
                    }
                }
                e.push(problem.shifted_solve_real(u0, dt * qd[(r, r)], &b)?);
            }
            e
        };
        for (state, em) in ns.states.iter_mut().zip(&e) {
            for (s, d) in state.iter_mut().zip(em) {
                *s += d;
            }
        }
        Ok(())
    })
}

/// Max over nodes of the spatial max-abs difference.
pub fn error_on_nodes(states: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    assert_eq!(states.len(), reference.len());
    let mut err: f64 = 0.0;
    for (s, r) in states.iter().zip(reference) {
        assert_eq!(s.len(), r.len());
        for (a, b) in s.iter().zip(r) {
            err = err.max((a - b).abs());
        }
    }
    err
}

/// Exact solution sampled at the node times.
pub fn exact_states(problem: &dyn Problem, times: &[f64]) -> Result<Vec<Vec<f64>>, ProblemError> {
    times.iter().map(|&t| problem.exact(t)).collect()
}

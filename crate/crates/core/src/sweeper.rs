//! SDC sweeps and per-step iteration.
//!
//! One sweep applies the preconditioned Picard update: node `m` solves
//!
//! ```text
//! u_m - dt (QD)_mm f(u_m, t_m) = u0 + dt sum_j q_mj F_j
//!                                   - dt sum_{j<=m} (QD)_mj F_j
//!                                   + dt sum_{j<m}  (QD)_mj F_j^new
//! ```
//!
//! where `F` holds the right-hand sides from the previous sweep. Lower
//! triangular preconditioners (`IE`, `LU`) walk the nodes in order, feeding
//! each fresh value forward; diagonal ones (`Qpar`, `IEpar`, `MIN`) have no
//! forward coupling, so all node solves run independently and can be
//! distributed over workers without changing a single bit of the result.
//!
//! A step iterates sweeps until the collocation residual
//! `max_m |u0 + dt sum_j q_mj F_j - u_m|` drops to tolerance. `iterations`
//! counts sweeps performed; the residual is evaluated after each sweep, so a
//! vanishing right-hand side converges in exactly one iteration and
//! `residual_history.len() == iterations` on every converged run.

use crate::collocation::{CollocationScheme, PrecondKind, Preconditioner};
use crate::error::{ProblemError, SweepError};
use crate::linalg::vec_inf_norm;
use crate::problems::Problem;
use crate::workers::run_indexed;

/// Iteration controls for a single SDC step.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Collocation residual tolerance (max-abs).
    pub tol: f64,
    /// Sweep cap per step.
    pub max_iterations: usize,
    /// Tolerance handed to the inner nonlinear node solves.
    pub node_tol: f64,
    /// Worker threads for diagonal preconditioners (1 = serial).
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 100,
            node_tol: 1e-12,
            workers: 1,
        }
    }
}

/// States and right-hand sides at the collocation nodes of one step.
#[derive(Clone, Debug)]
pub struct NodeStates {
    /// `u_m`, one vector per node.
    pub states: Vec<Vec<f64>>,
    /// `f(u_m, t_m)`, kept in lockstep with `states`.
    pub rhs: Vec<Vec<f64>>,
}

impl NodeStates {
    /// Spread initial guess: every node starts at `u0`.
    pub fn spread(problem: &dyn Problem, times: &[f64], u0: &[f64]) -> Self {
        let states: Vec<Vec<f64>> = times.iter().map(|_| u0.to_vec()).collect();
        let rhs = times.iter().map(|&t| problem.rhs(u0, t)).collect();
        Self { states, rhs }
    }

    pub fn m(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    /// State at the last node. Radau-right schemes collocate the right
    /// endpoint, so this is the step result.
    pub fn end_state(&self) -> &[f64] {
        self.states.last().expect("at least one node")
    }

    /// Refresh `rhs[m]` after `states[m]` changed.
    pub fn refresh_rhs(&mut self, problem: &dyn Problem, times: &[f64]) {
        for (m, t) in times.iter().enumerate() {
            self.rhs[m] = problem.rhs(&self.states[m], *t);
        }
    }
}

/// Result of iterating one step to tolerance.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// Sweeps performed.
    pub iterations: usize,
    /// Whether the residual reached tolerance within the cap. Node-solve
    /// divergence reports `false` with `iterations = max_iterations`.
    pub converged: bool,
    /// Collocation residual after each sweep.
    pub residual_history: Vec<f64>,
    /// Max-abs error of the end state against the exact solution after each
    /// sweep; empty when the problem has no closed form.
    pub error_history: Vec<f64>,
    /// Node states after the final sweep.
    pub states: NodeStates,
}

impl RunReport {
    pub fn end_state(&self) -> &[f64] {
        self.states.end_state()
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .copied()
            .unwrap_or(f64::INFINITY)
    }
}

/// Build the preconditioner of the requested kind for a scheme. `MIN` runs
/// (or reuses the cached result of) the spectral-radius minimization.
pub fn preconditioner_for(
    scheme: &CollocationScheme,
    kind: PrecondKind,
) -> Result<Preconditioner, SweepError> {
    use crate::collocation as c;
    Ok(match kind {
        PrecondKind::IE => c::qdelta_implicit_euler(scheme),
        PrecondKind::LU => c::qdelta_lu(scheme)?,
        PrecondKind::QPar => c::qdelta_qpar(scheme),
        PrecondKind::IEPar => c::qdelta_iepar(scheme),
        PrecondKind::Min => crate::minimizer::qdelta_min(scheme)?.0,
    })
}

/// `u0 + dt * sum_j q_mj rhs_j` for every node `m`: the quadrature side of
/// the collocation system. The direct solvers use the same contraction, so
/// residuals agree bit for bit across code paths.
pub fn quadrature_states(
    scheme: &CollocationScheme,
    dt: f64,
    u0: &[f64],
    rhs: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let q = scheme.q();
    let m_nodes = scheme.m();
    let dim = u0.len();
    let mut out = vec![u0.to_vec(); m_nodes];
    for m in 0..m_nodes {
        for j in 0..m_nodes {
            let w = dt * q[(m, j)];
            let row = &mut out[m];
            let f = &rhs[j];
            for i in 0..dim {
                row[i] += w * f[i];
            }
        }
    }
    out
}

/// Collocation residual `max_m |u0 + dt sum_j q_mj F_j - u_m|` (max-abs over
/// nodes and components).
pub fn collocation_residual(
    scheme: &CollocationScheme,
    dt: f64,
    u0: &[f64],
    ns: &NodeStates,
) -> f64 {
    let quad = quadrature_states(scheme, dt, u0, &ns.rhs);
    let mut res: f64 = 0.0;
    for (qm, um) in quad.iter().zip(&ns.states) {
        for (a, b) in qm.iter().zip(um) {
            res = res.max((a - b).abs());
        }
    }
    res
}

/// One SDC sweep in place. `ns` enters holding `(u^k, F^k)` and leaves
/// holding `(u^{k+1}, F^{k+1})`.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    precond: &Preconditioner,
    t0: f64,
    dt: f64,
    u0: &[f64],
    ns: &mut NodeStates,
    config: &SweepConfig,
) -> Result<(), SweepError> {
    let m_nodes = scheme.m();
    let dim = u0.len();
    let qd = precond.q_delta();
    let times = scheme.node_times(t0, dt);

    // carry term from the previous sweep: quadrature minus the preconditioner
    // rows applied to the old right-hand sides
    let mut carry = quadrature_states(scheme, dt, u0, &ns.rhs);
    for m in 0..m_nodes {
        for j in 0..=m {
            let w = dt * qd[(m, j)];
            if w != 0.0 {
                let row = &mut carry[m];
                let f = &ns.rhs[j];
                for i in 0..dim {
                    row[i] -= w * f[i];
                }
            }
        }
    }

    if precond.is_parallel() {
        let solved = run_indexed(config.workers, m_nodes, |m| {
            let u = problem.node_solve(
                dt * qd[(m, m)],
                &carry[m],
                times[m],
                &ns.states[m],
                config.node_tol,
            )?;
            let f = problem.rhs(&u, times[m]);
            Ok::<_, ProblemError>((u, f))
        });
        for (m, item) in solved.into_iter().enumerate() {
            let (u, f) = item?;
            ns.states[m] = u;
            ns.rhs[m] = f;
        }
    } else {
        for m in 0..m_nodes {
            let mut b = carry[m].clone();
            for j in 0..m {
                let w = dt * qd[(m, j)];
                if w != 0.0 {
                    let f = &ns.rhs[j]; // already refreshed: F^{k+1}
                    for i in 0..dim {
                        b[i] += w * f[i];
                    }
                }
            }
            let u = problem.node_solve(
                dt * qd[(m, m)],
                &b,
                times[m],
                &ns.states[m],
                config.node_tol,
            )?;
            ns.rhs[m] = problem.rhs(&u, times[m]);
            ns.states[m] = u;
        }
    }
    Ok(())
}

/// Iterate sweeps on `[t0, t0 + dt]` starting from the spread initial guess
/// until the collocation residual reaches `config.tol` or the cap.
pub fn solve_step(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    precond: &Preconditioner,
    t0: f64,
    dt: f64,
    u0: &[f64],
    config: &SweepConfig,
) -> Result<RunReport, SweepError> {
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
    while residual_history.len() < config.max_iterations {
        match sweep(problem, scheme, precond, t0, dt, u0, &mut ns, config) {
            Ok(()) => {}
            // a diverged inner Newton means this preconditioner does not
            // handle the step; report a capped, non-converged run
            Err(SweepError::Problem(ProblemError::DivergedNodeSolve { .. })) => break,
            Err(e) => return Err(e),
        }
        let res = collocation_residual(scheme, dt, u0, &ns);
        residual_history.push(res);
        if let Some(exact) = &exact_end {
            let err = ns
                .end_state()
                .iter()
                .zip(exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            error_history.push(err);
        }
        if res <= config.tol {
            converged = true;
            break;
        }
    }
    let iterations = if converged {
        residual_history.len()
    } else {
        config.max_iterations
    };
    Ok(RunReport {
        iterations,
        converged,
        residual_history,
        error_history,
        states: ns,
    })
}

/// Step results over `[0, n_steps * dt]`.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub reports: Vec<RunReport>,
    pub final_state: Vec<f64>,
    pub t_end: f64,
}

impl TimeSeries {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }

    pub fn total_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }
}

/// March `n_steps` SDC steps of size `dt` from the problem's initial state.
pub fn run_timeseries(
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    precond: &Preconditioner,
    dt: f64,
    n_steps: usize,
    config: &SweepConfig,
) -> Result<TimeSeries, SweepError> {
    let mut u = problem.initial();
    let mut reports = Vec::with_capacity(n_steps);
    for s in 0..n_steps {
        let t0 = s as f64 * dt;
        let report = solve_step(problem, scheme, precond, t0, dt, &u, config)?;
        u = report.end_state().to_vec();
        reports.push(report);
    }
    Ok(TimeSeries {
        reports,
        final_state: u,
        t_end: n_steps as f64 * dt,
    })
}

/// Max-abs difference between two states.
pub fn state_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    vec_inf_norm(&diff)
}

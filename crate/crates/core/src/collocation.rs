//! Radau (right) collocation schemes and the SDC preconditioners.
//!
//! A scheme holds the nodes `0 < tau_1 < ... < tau_M = 1` of the normalized
//! interval and the quadrature matrix `Q` with `q_{mj} = integral of the j-th
//! Lagrange basis polynomial from 0 to tau_m`. The collocation problem on a
//! step of size `dt` reads `u_m = u_0 + dt * sum_j q_{mj} f(u_j, t_j)`; all
//! step-size dependence stays in the `dt` factor, so `Q` never changes under
//! affine mapping of the interval.

use num_complex::Complex64;

use crate::error::{CollocationError, LinalgError};
use crate::linalg::{doolittle, lu_factor, CMatrix, RMatrix};

/// Collocation scheme: nodes, interval, and quadrature matrix.
#[derive(Clone, Debug)]
pub struct CollocationScheme {
    m: usize,
    nodes: Vec<f64>,
    interval: (f64, f64),
    q: RMatrix,
}

impl CollocationScheme {
    /// Number of collocation nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Nodes in `(a, b]`; the right endpoint is always the last node.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Normalized quadrature matrix (invariant under affine maps).
    pub fn q(&self) -> &RMatrix {
        &self.q
    }

    /// True if the scheme lives on the normalized interval [0, 1].
    pub fn is_normalized(&self) -> bool {
        self.interval == (0.0, 1.0)
    }

    /// Affine copy of the scheme on `[a, b]`: nodes map, `Q` is unchanged.
    pub fn map_to(&self, a: f64, b: f64) -> CollocationScheme {
        let (a0, b0) = self.interval;
        let scale = (b - a) / (b0 - a0);
        CollocationScheme {
            m: self.m,
            nodes: self.nodes.iter().map(|&t| a + (t - a0) * scale).collect(),
            interval: (a, b),
            q: self.q.clone(),
        }
    }

    /// Evaluation times `t0 + dt * tau_m` for a step `[t0, t0 + dt]`.
    /// Requires a normalized scheme.
    pub fn node_times(&self, t0: f64, dt: f64) -> Vec<f64> {
        debug_assert!(self.is_normalized(), "node_times expects normalized nodes");
        self.nodes.iter().map(|&tau| t0 + dt * tau).collect()
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = next;
    }
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

/// Interior Radau-right polynomial with the root at x = -1 deflated:
/// s(x) = (P_{M-1}(x) + P_M(x)) / (1 + x), returned with its derivative.
fn radau_deflated(m: usize, x: f64) -> (f64, f64) {
    let (pa, da) = legendre_pair(m - 1, x);
    let (pb, db) = legendre_pair(m, x);
    let (r, dr) = (pa + pb, da + db);
    let s = r / (1.0 + x);
    let ds = (dr - s) / (1.0 + x);
    (s, ds)
}

/// Normalized Radau-right nodes: the M-1 interior roots found by Newton with
/// Maehly deflation (so no two Chebyshev starts collapse onto the same root),
/// mapped by tau = (1 - x)/2, plus the right endpoint tau = 1 exactly.
fn radau_right_nodes(m: usize) -> Result<Vec<f64>, LinalgError> {
    let n_int = m - 1;
    let mut found: Vec<f64> = Vec::with_capacity(n_int);
    for k in 0..n_int {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.5) / n_int as f64).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (f, d) = radau_deflated(m, x);
            let corr: f64 = found.iter().map(|&xf| 1.0 / (x - xf)).sum();
            let step = f / (d - f * corr);
            x -= step;
            if step.abs() < 1e-14 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LinalgError::ConvergenceFailure {
                context: format!("Radau node Newton stalled for M={m}, root {k}"),
            });
        }
        found.push(x);
    }
    let mut tau: Vec<f64> = found.iter().map(|&x| (1.0 - x) / 2.0).collect();
    tau.sort_by(f64::total_cmp);
    tau.push(1.0);
    Ok(tau)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gl_nodes_weights(n: usize) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-14 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LinalgError::ConvergenceFailure {
                context: format!("Gauss-Legendre Newton stalled for n={n}, root {k}"),
            });
        }
        let (_, d) = legendre_pair(n, x);
        xs.push(x);
        ws.push(2.0 / ((1.0 - x * x) * d * d));
    }
    Ok((xs, ws))
}

/// Quadrature matrix by exact integration of the Lagrange basis: each entry
/// integrates `l_j` over `[0, tau_m]` with an M-point Gauss-Legendre rule
/// (exact for the degree-(M-1) basis polynomials), with `l_j` evaluated in
/// product form for stability at larger M.
fn lagrange_q(tau: &[f64]) -> Result<RMatrix, LinalgError> {
    let m = tau.len();
    let (gx, gw) = gl_nodes_weights(m)?;
    let mut q = RMatrix::new(m, m);
    for row in 0..m {
        let b = tau[row];
        for j in 0..m {
            let mut acc = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                let s = b / 2.0 * (x + 1.0);
                let mut val = 1.0;
                for (i, &ti) in tau.iter().enumerate() {
                    if i != j {
                        val *= (s - ti) / (tau[j] - ti);
                    }
                }
                acc += w * val;
            }
            q[(row, j)] = b / 2.0 * acc;
        }
    }
    Ok(q)
}

/// Build the normalized Radau-right collocation scheme with `m >= 2` nodes.
pub fn radau_right_scheme(m: usize) -> Result<CollocationScheme, CollocationError> {
    if m < 2 {
        return Err(CollocationError::InvalidNodeCount { m });
    }
    let nodes = radau_right_nodes(m)?;
    let q = lagrange_q(&nodes)?;
    Ok(CollocationScheme {
        m,
        nodes,
        interval: (0.0, 1.0),
        q,
    })
}

/// The five preconditioner choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrecondKind {
    /// Implicit Euler between nodes (lower triangular).
    IE,
    /// LU trick: transpose of U from the Doolittle factorization of Q^T
    /// (lower triangular).
    LU,
    /// Diagonal of Q (node-parallel).
    QPar,
    /// Node distances from the left endpoint, diag(tau) (node-parallel).
    IEPar,
    /// Minimized stiff-limit spectral radius (node-parallel); built by the
    /// minimizer module.
    Min,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 5] = [
        PrecondKind::IE,
        PrecondKind::LU,
        PrecondKind::QPar,
        PrecondKind::IEPar,
        PrecondKind::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::IE => "ie",
            PrecondKind::LU => "lu",
            PrecondKind::QPar => "qpar",
            PrecondKind::IEPar => "iepar",
            PrecondKind::Min => "min",
        }
    }
}

impl std::fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PrecondKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ie" => Ok(PrecondKind::IE),
            "lu" => Ok(PrecondKind::LU),
            "qpar" => Ok(PrecondKind::QPar),
            "iepar" => Ok(PrecondKind::IEPar),
            "min" => Ok(PrecondKind::Min),
            other => Err(format!(
                "unknown preconditioner '{other}' (expected ie|lu|qpar|iepar|min)"
            )),
        }
    }
}

/// A concrete preconditioner: the kind label and its normalized matrix.
#[derive(Clone, Debug)]
pub struct Preconditioner {
    kind: PrecondKind,
    q_delta: RMatrix,
}

impl Preconditioner {
    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    /// Normalized preconditioning matrix (same convention as `Q`).
    pub fn q_delta(&self) -> &RMatrix {
        &self.q_delta
    }

    /// Node-parallel kinds have diagonal matrices, making the sweep a Jacobi
    /// update over independent node solves.
    pub fn is_parallel(&self) -> bool {
        matches!(
            self.kind,
            PrecondKind::QPar | PrecondKind::IEPar | PrecondKind::Min
        )
    }

    /// Escape hatch for analysis and tests: wrap an explicit matrix. The kind
    /// is only a label here; no structural checks are made.
    pub fn from_parts(kind: PrecondKind, q_delta: RMatrix) -> Self {
        Self { kind, q_delta }
    }
}

/// Implicit Euler sweep preconditioner: row m accumulates the node spacings
/// `delta_j = tau_j - tau_{j-1}` for `j <= m` (with `tau_0 = 0`).
pub fn qdelta_implicit_euler(scheme: &CollocationScheme) -> Preconditioner {
    let m = scheme.m();
    let tau = scheme.nodes();
    let (a, b) = scheme.interval();
    let width = b - a;
    let mut q_delta = RMatrix::new(m, m);
    for row in 0..m {
        for j in 0..=row {
            let prev = if j == 0 { a } else { tau[j - 1] };
            q_delta[(row, j)] = (tau[j] - prev) / width;
        }
    }
    Preconditioner {
        kind: PrecondKind::IE,
        q_delta,
    }
}

/// LU trick: factor `Q^T = L U` without pivoting and use `U^T`, which is
/// lower triangular and makes the stiff-limit matrix nilpotent.
pub fn qdelta_lu(scheme: &CollocationScheme) -> Result<Preconditioner, CollocationError> {
    let (_, u) = doolittle(&scheme.q().transpose())?;
    Ok(Preconditioner {
        kind: PrecondKind::LU,
        q_delta: u.transpose(),
    })
}

/// Diagonal of Q.
pub fn qdelta_qpar(scheme: &CollocationScheme) -> Preconditioner {
    let m = scheme.m();
    let q = scheme.q();
    let mut q_delta = RMatrix::new(m, m);
    for i in 0..m {
        q_delta[(i, i)] = q[(i, i)];
    }
    Preconditioner {
        kind: PrecondKind::QPar,
        q_delta,
    }
}

/// Parallel implicit Euler: diagonal of node distances from the left endpoint.
pub fn qdelta_iepar(scheme: &CollocationScheme) -> Preconditioner {
    let m = scheme.m();
    let tau = scheme.nodes();
    let (a, b) = scheme.interval();
    let width = b - a;
    let mut q_delta = RMatrix::new(m, m);
    for i in 0..m {
        q_delta[(i, i)] = (tau[i] - a) / width;
    }
    Preconditioner {
        kind: PrecondKind::IEPar,
        q_delta,
    }
}

/// Diagonal preconditioner from positive coefficients `q`: `diag(1/q)`.
/// The minimizer produces `q`; shared here so the matrix convention lives in
/// one place.
pub fn qdelta_from_min_coefficients(q: &[f64]) -> Preconditioner {
    let m = q.len();
    let mut q_delta = RMatrix::new(m, m);
    for i in 0..m {
        q_delta[(i, i)] = 1.0 / q[i];
    }
    Preconditioner {
        kind: PrecondKind::Min,
        q_delta,
    }
}

/// SDC iteration matrix for the scalar test equation with `lambda * dt` given:
/// `K = (lambda dt) Q_delta (I - lambda dt Q_delta)^-1 (Q_delta^-1 Q - I)`.
/// The error after k sweeps is exactly `K^k e_0`.
pub fn sdc_iteration_matrix(
    scheme: &CollocationScheme,
    precond: &Preconditioner,
    lambda_dt: Complex64,
) -> Result<CMatrix, LinalgError> {
    let m = scheme.m();
    let qd = precond.q_delta();
    let qdc = qd.promote();
    // I - lambda dt Q_delta
    let mut a = CMatrix::identity(m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] -= lambda_dt * qdc[(i, j)];
        }
    }
    let a_inv = lu_factor(&a)?.inverse();
    // Q_delta^-1 Q - I in real arithmetic
    let mut e = lu_factor(qd)?.solve_matrix(scheme.q());
    for i in 0..m {
        e[(i, i)] -= 1.0;
    }
    Ok(qdc.matmul(&a_inv).matmul(&e.promote()).scale(lambda_dt))
}

/// Stiff limit of the iteration matrix: `E = I - Q_delta^-1 Q`. For the LU
/// kind this is built directly from the Doolittle factors (`Q_delta^-1 Q =
/// L^T` exactly), making the returned matrix strictly upper triangular and
/// exactly nilpotent; the generic solve would scatter roundoff into the lower
/// triangle and turn the zero spectral radius into ~1e-5.
pub fn stiff_limit_matrix(
    scheme: &CollocationScheme,
    precond: &Preconditioner,
) -> Result<RMatrix, LinalgError> {
    let m = scheme.m();
    if precond.kind() == PrecondKind::LU {
        let (l, _) = doolittle(&scheme.q().transpose())?;
        let mut e = l.transpose().scale(-1.0);
        for i in 0..m {
            e[(i, i)] += 1.0;
        }
        return Ok(e);
    }
    let mut e = lu_factor(precond.q_delta())?
        .solve_matrix(scheme.q())
        .scale(-1.0);
    for i in 0..m {
        e[(i, i)] += 1.0;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    // index loops in these tests mirror the summation formulas they check
    #![allow(clippy::needless_range_loop)]

    use super::*;
    use crate::linalg::spectral_radius;

    fn assert_mat_close(got: &RMatrix, want: &[&[f64]], tol: f64) {
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                assert!(
                    (got[(i, j)] - w).abs() <= tol,
                    "entry ({i},{j}): got {} want {w}",
                    got[(i, j)]
                );
            }
        }
    }

    #[test]
    fn m2_nodes_and_q_closed_form() {
        let s = radau_right_scheme(2).unwrap();
        assert!((s.nodes()[0] - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(s.nodes()[1], 1.0);
        assert_mat_close(
            s.q(),
            &[&[5.0 / 12.0, -1.0 / 12.0], &[3.0 / 4.0, 1.0 / 4.0]],
            1e-14,
        );
    }

    #[test]
    fn m3_interior_nodes_closed_form() {
        let s = radau_right_scheme(3).unwrap();
        let r6 = 6.0f64.sqrt();
        assert!((s.nodes()[0] - (4.0 - r6) / 10.0).abs() < 1e-14);
        assert!((s.nodes()[1] - (4.0 + r6) / 10.0).abs() < 1e-14);
        assert_eq!(s.nodes()[2], 1.0);
    }

    #[test]
    fn nodes_increase_and_quadrature_is_exact() {
        for m in 2..=9 {
            let s = radau_right_scheme(m).unwrap();
            let tau = s.nodes();
            assert!(tau[0] > 0.0);
            for w in tau.windows(2) {
                assert!(w[0] < w[1]);
            }
            assert_eq!(tau[m - 1], 1.0);
            // sum_j q_mj tau_j^d = tau_m^{d+1}/(d+1) for d < M
            let mut worst: f64 = 0.0;
            for row in 0..m {
                for d in 0..m {
                    let mut acc = 0.0;
                    for j in 0..m {
                        acc += s.q()[(row, j)] * tau[j].powi(d as i32);
                    }
                    let exact = tau[row].powi(d as i32 + 1) / (d as f64 + 1.0);
                    worst = worst.max((acc - exact).abs());
                }
            }
            assert!(worst <= 1e-12, "M={m}: exactness deviation {worst:.2e}");
        }
    }

    #[test]
    fn affine_map_scales_nodes_not_q() {
        let s = radau_right_scheme(2).unwrap();
        let mapped = s.map_to(0.0, 0.1);
        assert!((mapped.nodes()[0] - 1.0 / 30.0).abs() < 1e-15);
        assert!((mapped.nodes()[1] - 0.1).abs() < 1e-15);
        assert_eq!(mapped.interval(), (0.0, 0.1));
        assert_eq!(mapped.q()[(0, 0)], s.q()[(0, 0)]);
        // preconditioners built on the mapped scheme are identical
        let p0 = qdelta_implicit_euler(&s);
        let p1 = qdelta_implicit_euler(&mapped);
        assert!(p0.q_delta().sub(p1.q_delta()).max_abs() < 1e-15);
        let times = s.node_times(2.0, 0.1);
        assert!((times[0] - (2.0 + 0.1 / 3.0)).abs() < 1e-15);
        assert_eq!(times[1], 2.1);
    }

    #[test]
    fn m2_preconditioner_matrices() {
        let s = radau_right_scheme(2).unwrap();
        assert_mat_close(
            qdelta_implicit_euler(&s).q_delta(),
            &[&[1.0 / 3.0, 0.0], &[1.0 / 3.0, 2.0 / 3.0]],
            1e-14,
        );
        assert_mat_close(
            qdelta_lu(&s).unwrap().q_delta(),
            &[&[5.0 / 12.0, 0.0], &[3.0 / 4.0, 2.0 / 5.0]],
            1e-14,
        );
        assert_mat_close(
            qdelta_qpar(&s).q_delta(),
            &[&[5.0 / 12.0, 0.0], &[0.0, 1.0 / 4.0]],
            1e-14,
        );
        assert_mat_close(
            qdelta_iepar(&s).q_delta(),
            &[&[1.0 / 3.0, 0.0], &[0.0, 1.0]],
            1e-14,
        );
        assert!(!qdelta_implicit_euler(&s).is_parallel());
        assert!(!qdelta_lu(&s).unwrap().is_parallel());
        assert!(qdelta_qpar(&s).is_parallel());
        assert!(qdelta_iepar(&s).is_parallel());
        assert!(qdelta_from_min_coefficients(&[2.0, 4.0]).is_parallel());
        assert_eq!(
            qdelta_from_min_coefficients(&[2.0, 4.0]).q_delta()[(0, 0)],
            0.5
        );
    }

    #[test]
    fn lu_norm_gap_at_m5() {
        let s = radau_right_scheme(5).unwrap();
        let p = qdelta_lu(&s).unwrap();
        let gap = s.q().sub(p.q_delta()).inf_norm();
        assert!((gap - 0.265).abs() <= 0.005, "gap {gap}");
    }

    #[test]
    fn stiff_limit_examples_m2() {
        let s = radau_right_scheme(2).unwrap();
        // IEpar: E = I - diag(3, 1) Q = [[-1/4, 1/4], [-3/4, 3/4]], rho = 1/2
        let e = stiff_limit_matrix(&s, &qdelta_iepar(&s)).unwrap();
        assert_mat_close(&e, &[&[-0.25, 0.25], &[-0.75, 0.75]], 1e-14);
        assert!((spectral_radius(&e).unwrap() - 0.5).abs() < 1e-12);
        // IE: eigenvalues {0, 1/4}
        let e = stiff_limit_matrix(&s, &qdelta_implicit_euler(&s)).unwrap();
        assert!((spectral_radius(&e).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn lu_stiff_limit_is_strictly_upper_and_nilpotent() {
        for m in [2, 3, 5] {
            let s = radau_right_scheme(m).unwrap();
            let e = stiff_limit_matrix(&s, &qdelta_lu(&s).unwrap()).unwrap();
            for i in 0..m {
                for j in 0..=i {
                    assert_eq!(e[(i, j)], 0.0, "M={m} entry ({i},{j}) not zero");
                }
            }
            assert!(spectral_radius(&e).unwrap() < 1e-8);
        }
    }

    #[test]
    fn iteration_matrix_vanishes_at_zero_and_for_full_q() {
        let s = radau_right_scheme(3).unwrap();
        let p = qdelta_implicit_euler(&s);
        let k0 = sdc_iteration_matrix(&s, &p, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(k0.max_abs(), 0.0);
        // Q_delta = Q makes the correction exact: K = 0 to roundoff
        let full = Preconditioner::from_parts(PrecondKind::LU, s.q().clone());
        let k = sdc_iteration_matrix(&s, &full, Complex64::new(-5.0, 0.0)).unwrap();
        assert!(k.max_abs() < 1e-13);
    }

    #[test]
    fn kind_parsing_roundtrip() {
        for kind in PrecondKind::ALL {
            assert_eq!(kind.name().parse::<PrecondKind>().unwrap(), kind);
        }
        assert!("euler".parse::<PrecondKind>().is_err());
    }

    #[test]
    fn rejects_single_node() {
        assert!(matches!(
            radau_right_scheme(1),
            Err(CollocationError::InvalidNodeCount { m: 1 })
        ));
    }
}

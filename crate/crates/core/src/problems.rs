//! Test problems behind a common interface: semi-discrete right-hand sides,
//! Jacobians, implicit node solves `u - alpha f(u, t) = b`, and the complex
//! shifted solves `(I - alpha J(u_ref)) x = b` needed by the
//! diagonalization-based solvers.
//!
//! - `heat`: 1-D diffusion on [0, 1], homogeneous Dirichlet, second-order
//!   centered Laplacian, `u0 = sin(2 pi x)`.
//! - `advection`: 1-D transport on [0, 1], periodic, centered (default) or
//!   one-sided stencil, `u0 = sin(2 pi x)`.
//! - `vanderpol`: the Van der Pol oscillator, `u0 = (2, 0)`.
//! - `kpp`: KPP reaction-diffusion on [-5, 5] with a traveling-wave exact
//!   solution imposed as time-dependent Dirichlet data.
//! - `dahlquist`: scalar `u' = lambda u` fixture used throughout the tests.

use num_complex::Complex64;

use crate::error::ProblemError;
use crate::linalg::{lu_factor_solve, tridiag_solve, vec_inf_norm, RMatrix};

/// Boundary treatment of a 1-D grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Unknowns at interior points only; h = (b - a) / (n + 1).
    Dirichlet,
    /// Unknowns at n equispaced points including the left end; h = (b - a) / n.
    Periodic,
}

/// Uniform 1-D spatial grid.
#[derive(Clone, Debug)]
pub struct SpatialGrid {
    domain: (f64, f64),
    n: usize,
    h: f64,
    boundary: BoundaryKind,
}

impl SpatialGrid {
    pub fn new(domain: (f64, f64), n: usize, boundary: BoundaryKind) -> Self {
        assert!(n >= 1 && domain.1 > domain.0);
        let width = domain.1 - domain.0;
        let h = match boundary {
            BoundaryKind::Dirichlet => width / (n as f64 + 1.0),
            BoundaryKind::Periodic => width / n as f64,
        };
        Self {
            domain,
            n,
            h,
            boundary,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    /// Coordinates of the unknowns.
    pub fn points(&self) -> Vec<f64> {
        let offset = match self.boundary {
            BoundaryKind::Dirichlet => 1,
            BoundaryKind::Periodic => 0,
        };
        (0..self.n)
            .map(|i| self.domain.0 + self.h * (i + offset) as f64)
            .collect()
    }
}

/// An initial-value problem `u' = f(u, t)`, `u(t0) = initial()`, together
/// with the implicit solves the integrators need.
pub trait Problem: Send + Sync {
    fn name(&self) -> &'static str;

    /// Number of unknowns.
    fn dim(&self) -> usize;

    fn initial(&self) -> Vec<f64>;

    /// Right-hand side. Time enters only through boundary data (KPP);
    /// autonomous problems ignore it.
    fn rhs(&self, u: &[f64], t: f64) -> Vec<f64>;

    /// True when `f(u, t) = J u + g(t)` with constant `J`.
    fn is_linear(&self) -> bool {
        false
    }

    /// Dense Jacobian of `f` with respect to `u` at the given state.
    fn jacobian(&self, u: &[f64]) -> RMatrix;

    /// `J(u_ref) v` without forming the dense matrix.
    fn jacobian_apply(&self, u_ref: &[f64], v: &[f64]) -> Vec<f64> {
        self.jacobian(u_ref).matvec(v)
    }

    /// Solve `u - alpha f(u, t) = b` to max-abs residual `tol`, warm-started
    /// at `guess`. `alpha = 0` must return `b` unchanged.
    fn node_solve(
        &self,
        alpha: f64,
        b: &[f64],
        t: f64,
        guess: &[f64],
        tol: f64,
    ) -> Result<Vec<f64>, ProblemError>;

    /// Solve `(I - alpha J(u_ref)) x = b` with complex shift, Jacobian frozen
    /// at `u_ref`.
    fn shifted_solve_complex(
        &self,
        u_ref: &[f64],
        alpha: Complex64,
        b: &[Complex64],
    ) -> Result<Vec<Complex64>, ProblemError>;

    /// Real-shift variant of [`Problem::shifted_solve_complex`].
    fn shifted_solve_real(
        &self,
        u_ref: &[f64],
        alpha: f64,
        b: &[f64],
    ) -> Result<Vec<f64>, ProblemError>;

    /// Closed-form solution at time `t`, when one exists.
    fn exact(&self, t: f64) -> Result<Vec<f64>, ProblemError> {
        let _ = t;
        Err(ProblemError::ExactSolutionUnavailable { name: self.name() })
    }

    fn has_exact(&self) -> bool {
        self.exact(0.0).is_ok()
    }

    fn grid(&self) -> Option<&SpatialGrid> {
        None
    }

    /// Resolved parameters for manifests, name/value pairs.
    fn params(&self) -> Vec<(&'static str, f64)>;
}

/// Shared Newton iteration for nonlinear node solves: caps at 50 iterations
/// and reports the final residual on divergence. `solve_linearized` solves
/// `(I - alpha J(u)) du = -r`.
fn newton_node_solve(
    dim: usize,
    b: &[f64],
    guess: &[f64],
    tol: f64,
    residual: impl Fn(&[f64]) -> Vec<f64>,
    solve_linearized: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>, ProblemError>,
) -> Result<Vec<f64>, ProblemError> {
    const CAP: usize = 50;
    let mut u = guess.to_vec();
    debug_assert_eq!(b.len(), dim);
    let mut res = f64::INFINITY;
    for _ in 0..CAP {
        let r = residual(&u);
        res = vec_inf_norm(&r);
        if res <= tol {
            return Ok(u);
        }
        let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
        let du = solve_linearized(&u, &neg_r)?;
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += di;
        }
    }
    // accept a final iterate that meets the tolerance, else report divergence
    let r = residual(&u);
    res = res.min(vec_inf_norm(&r));
    if vec_inf_norm(&r) <= tol {
        return Ok(u);
    }
    Err(ProblemError::DivergedNodeSolve {
        iterations: CAP,
        residual: res,
    })
}

// ---------------------------------------------------------------------------
// heat
// ---------------------------------------------------------------------------

/// 1-D heat equation `u_t = nu u_xx` on [0, 1] with homogeneous Dirichlet
/// boundaries and `u0 = sin(2 pi x)`.
pub struct HeatProblem {
    nu: f64,
    grid: SpatialGrid,
    u0: Vec<f64>,
}

impl HeatProblem {
    pub fn new(nu: f64, n: usize) -> Self {
        let grid = SpatialGrid::new((0.0, 1.0), n, BoundaryKind::Dirichlet);
        let u0 = grid
            .points()
            .iter()
            .map(|&x| (2.0 * std::f64::consts::PI * x).sin())
            .collect();
        Self { nu, grid, u0 }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let h2 = self.grid.h() * self.grid.h();
        (0..n)
            .map(|i| {
                let left = if i > 0 { u[i - 1] } else { 0.0 };
                let right = if i + 1 < n { u[i + 1] } else { 0.0 };
                (left - 2.0 * u[i] + right) / h2
            })
            .collect()
    }
}

impl Problem for HeatProblem {
    fn name(&self) -> &'static str {
        "heat"
    }

    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn initial(&self) -> Vec<f64> {
        self.u0.clone()
    }

    fn rhs(&self, u: &[f64], _t: f64) -> Vec<f64> {
        let mut lap = self.laplacian(u);
        for x in &mut lap {
            *x *= self.nu;
        }
        lap
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn jacobian(&self, _u: &[f64]) -> RMatrix {
        let n = self.dim();
        let h2 = self.grid.h() * self.grid.h();
        RMatrix::from_fn(n, n, |i, j| {
            if i == j {
                -2.0 * self.nu / h2
            } else if i.abs_diff(j) == 1 {
                self.nu / h2
            } else {
                0.0
            }
        })
    }

    fn jacobian_apply(&self, _u_ref: &[f64], v: &[f64]) -> Vec<f64> {
        let mut lap = self.laplacian(v);
        for x in &mut lap {
            *x *= self.nu;
        }
        lap
    }

    fn node_solve(
        &self,
        alpha: f64,
        b: &[f64],
        _t: f64,
        _guess: &[f64],
        _tol: f64,
    ) -> Result<Vec<f64>, ProblemError> {
        self.shifted_solve_real(&[], alpha, b)
    }

    fn shifted_solve_complex(
        &self,
        _u_ref: &[f64],
        alpha: Complex64,
        b: &[Complex64],
    ) -> Result<Vec<Complex64>, ProblemError> {
        let n = self.dim();
        let h2 = self.grid.h() * self.grid.h();
        let off = -alpha * (self.nu / h2);
        let diag = vec![Complex64::new(1.0, 0.0) + alpha * (2.0 * self.nu / h2); n];
        Ok(tridiag_solve(
            &vec![off; n - 1],
            &diag,
            &vec![off; n - 1],
            b,
        )?)
    }

    fn shifted_solve_real(
        &self,
        _u_ref: &[f64],
        alpha: f64,
        b: &[f64],
    ) -> Result<Vec<f64>, ProblemError> {
        let n = self.dim();
        let h2 = self.grid.h() * self.grid.h();
        let off = -alpha * self.nu / h2;
        let diag = vec![1.0 + 2.0 * alpha * self.nu / h2; n];
        Ok(tridiag_solve(
            &vec![off; n - 1],
            &diag,
            &vec![off; n - 1],
            b,
        )?)
    }

    fn exact(&self, t: f64) -> Result<Vec<f64>, ProblemError> {
        let decay = (-4.0 * std::f64::consts::PI.powi(2) * self.nu * t).exp();
        Ok(self.u0.iter().map(|&u| decay * u).collect())
    }

    fn grid(&self) -> Option<&SpatialGrid> {
        Some(&self.grid)
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("nu", self.nu)]
    }
}

// ---------------------------------------------------------------------------
// advection
// ---------------------------------------------------------------------------

/// First-derivative stencil for the advection problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    /// (u_{i+1} - u_{i-1}) / (2h)
    Centered,
    /// (u_{i+1} - u_i) / h
    Upwind,
}

impl std::str::FromStr for Stencil {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "centered" => Ok(Stencil::Centered),
            "upwind" => Ok(Stencil::Upwind),
            other => Err(format!(
                "unknown stencil '{other}' (expected centered|upwind)"
            )),
        }
    }
}

impl std::fmt::Display for Stencil {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stencil::Centered => "centered",
            Stencil::Upwind => "upwind",
        })
    }
}

/// 1-D advection `u_t = c u_x` on [0, 1] with periodic boundaries and
/// `u0 = sin(2 pi x)`.
pub struct AdvectionProblem {
    c: f64,
    stencil: Stencil,
    grid: SpatialGrid,
    u0: Vec<f64>,
}

impl AdvectionProblem {
    pub fn new(c: f64, n: usize, stencil: Stencil) -> Self {
        let grid = SpatialGrid::new((0.0, 1.0), n, BoundaryKind::Periodic);
        let u0 = grid
            .points()
            .iter()
            .map(|&x| (2.0 * std::f64::consts::PI * x).sin())
            .collect();
        Self {
            c,
            stencil,
            grid,
            u0,
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let h = self.grid.h();
        (0..n)
            .map(|i| match self.stencil {
                Stencil::Centered => (u[(i + 1) % n] - u[(i + n - 1) % n]) / (2.0 * h),
                Stencil::Upwind => (u[(i + 1) % n] - u[i]) / h,
            })
            .collect()
    }
}

impl Problem for AdvectionProblem {
    fn name(&self) -> &'static str {
        "advection"
    }

    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn initial(&self) -> Vec<f64> {
        self.u0.clone()
    }

    fn rhs(&self, u: &[f64], _t: f64) -> Vec<f64> {
        self.derivative(u).iter().map(|&d| self.c * d).collect()
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn jacobian(&self, _u: &[f64]) -> RMatrix {
        let n = self.dim();
        let h = self.grid.h();
        let mut j = RMatrix::new(n, n);
        for i in 0..n {
            match self.stencil {
                Stencil::Centered => {
                    j[(i, (i + 1) % n)] += self.c / (2.0 * h);
                    j[(i, (i + n - 1) % n)] -= self.c / (2.0 * h);
                }
                Stencil::Upwind => {
                    j[(i, (i + 1) % n)] += self.c / h;
                    j[(i, i)] -= self.c / h;
                }
            }
        }
        j
    }

    fn jacobian_apply(&self, _u_ref: &[f64], v: &[f64]) -> Vec<f64> {
        self.derivative(v).iter().map(|&d| self.c * d).collect()
    }

    fn node_solve(
        &self,
        alpha: f64,
        b: &[f64],
        _t: f64,
        _guess: &[f64],
        _tol: f64,
    ) -> Result<Vec<f64>, ProblemError> {
        self.shifted_solve_real(&[], alpha, b)
    }

    fn shifted_solve_complex(
        &self,
        _u_ref: &[f64],
        alpha: Complex64,
        b: &[Complex64],
    ) -> Result<Vec<Complex64>, ProblemError> {
        let n = self.dim();
        let j = self.jacobian(&[]).promote();
        let mut a = j.scale(-alpha);
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        Ok(lu_factor_solve(&a, b)?)
    }

    fn shifted_solve_real(
        &self,
        _u_ref: &[f64],
        alpha: f64,
        b: &[f64],
    ) -> Result<Vec<f64>, ProblemError> {
        let n = self.dim();
        let mut a = self.jacobian(&[]).scale(-alpha);
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        Ok(lu_factor_solve(&a, b)?)
    }

    fn exact(&self, t: f64) -> Result<Vec<f64>, ProblemError> {
        // continuous solution of the transport equation (not the semi-discrete
        // system): u(x, t) = sin(2 pi (x + c t))
        Ok(self
            .grid
            .points()
            .iter()
            .map(|&x| (2.0 * std::f64::consts::PI * (x + self.c * t)).sin())
            .collect())
    }

    fn grid(&self) -> Option<&SpatialGrid> {
        Some(&self.grid)
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("c", self.c)]
    }
}

// ---------------------------------------------------------------------------
// Van der Pol
// ---------------------------------------------------------------------------

/// Van der Pol oscillator: `u' = v`, `v' = mu (1 - u^2) v - u`, start (2, 0).
pub struct VanDerPolProblem {
    mu: f64,
}

impl VanDerPolProblem {
    pub fn new(mu: f64) -> Self {
        Self { mu }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Problem for VanDerPolProblem {
    fn name(&self) -> &'static str {
        "vanderpol"
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial(&self) -> Vec<f64> {
        vec![2.0, 0.0]
    }

    fn rhs(&self, u: &[f64], _t: f64) -> Vec<f64> {
        vec![u[1], self.mu * (1.0 - u[0] * u[0]) * u[1] - u[0]]
    }

    fn jacobian(&self, u: &[f64]) -> RMatrix {
        RMatrix::from_rows(&[
            vec![0.0, 1.0],
            vec![
                -1.0 - 2.0 * self.mu * u[0] * u[1],
                self.mu * (1.0 - u[0] * u[0]),
            ],
        ])
    }

    fn node_solve(
        &self,
        alpha: f64,
        b: &[f64],
        t: f64,
        guess: &[f64],
        tol: f64,
    ) -> Result<Vec<f64>, ProblemError> {
        newton_node_solve(
            2,
            b,
            guess,
            tol,
            |u| {
                let f = self.rhs(u, t);
                vec![u[0] - alpha * f[0] - b[0], u[1] - alpha * f[1] - b[1]]
            },
            |u, rhs| {
                let j = self.jacobian(u);
                let a = RMatrix::from_rows(&[
                    vec![1.0 - alpha * j[(0, 0)], -alpha * j[(0, 1)]],
                    vec![-alpha * j[(1, 0)], 1.0 - alpha * j[(1, 1)]],
                ]);
                Ok(lu_factor_solve(&a, rhs)?)
            },
        )
    }

    fn shifted_solve_complex(
        &self,
        u_ref: &[f64],
        alpha: Complex64,
        b: &[Complex64],
    ) -> Result<Vec<Complex64>, ProblemError> {
        let j = self.jacobian(u_ref).promote();
        let mut a = j.scale(-alpha);
        for i in 0..2 {
            a[(i, i)] += 1.0;
        }
        Ok(lu_factor_solve(&a, b)?)
    }

    fn shifted_solve_real(
        &self,
        u_ref: &[f64],
        alpha: f64,
        b: &[f64],
    ) -> Result<Vec<f64>, ProblemError> {
        let mut a = self.jacobian(u_ref).scale(-alpha);
        for i in 0..2 {
            a[(i, i)] += 1.0;
        }
        Ok(lu_factor_solve(&a, b)?)
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("mu", self.mu)]
    }
}

// ---------------------------------------------------------------------------
// KPP reaction-diffusion
// ---------------------------------------------------------------------------

/// Traveling-wave speed and steepness for the KPP ansatz
/// `u = (1 + a e^{k (x - c t)})^{-2/nu}`: substituting into the PDE and
/// matching the two powers of the exponential gives
/// `k c + k^2 - nu beta = 0` and `k c - 2 k^2 / nu - nu beta / 2 = 0`,
/// solved here by a 2x2 Newton iteration. The left-moving branch (k < 0,
/// c < 0) is selected.
pub fn kpp_wave_parameters(lambda0: f64, nu: u32) -> Result<(f64, f64), ProblemError> {
    let beta = lambda0 * lambda0;
    let nuf = nu as f64;
    let scale = beta.max(1.0);
    let (mut k, mut c) = (-lambda0, -lambda0);
    let mut converged = false;
    for _ in 0..100 {
        let f1 = k * c + k * k - nuf * beta;
        let f2 = k * c - 2.0 * k * k / nuf - nuf * beta / 2.0;
        if f1.abs().max(f2.abs()) <= 1e-13 * scale {
            converged = true;
            break;
        }
        let det = 2.0 * k * k * (nuf + 2.0) / nuf;
        if det.abs() < 1e-300 {
            break;
        }
        let dk = k * (f2 - f1) / det;
        let dc = (-(c + 2.0 * k) * f2 + (c - 4.0 * k / nuf) * f1) / det;
        k += dk;
        c += dc;
    }
    if !converged {
        return Err(ProblemError::WaveParameterFailure {
            context: format!("Newton stalled for lambda0={lambda0}, nu={nu}"),
        });
    }
    // the mirrored root (k, c > 0) solves the same system; select the
    // left-moving wave
    if k > 0.0 {
        k = -k;
        c = -c;
    }
    if !(k < 0.0 && c < 0.0) {
        return Err(ProblemError::WaveParameterFailure {
            context: format!("unexpected branch k={k}, c={c}"),
        });
    }
    Ok((k, c))
}

/// KPP reaction-diffusion `u_t = u_xx + lambda0^2 u (1 - u^nu)` on [-5, 5].
/// Dirichlet data comes from the exact traveling wave evaluated at the node
/// times, which is what makes the right-hand side time-dependent.
pub struct KppProblem {
    lambda0: f64,
    nu: u32,
    beta: f64,
    wave_k: f64,
    wave_c: f64,
    amp: f64,
    grid: SpatialGrid,
    u0: Vec<f64>,
}

impl KppProblem {
    pub fn new(lambda0: f64, n: usize, nu: u32) -> Result<Self, ProblemError> {
        assert!(nu >= 1, "reaction exponent must be positive");
        let (wave_k, wave_c) = kpp_wave_parameters(lambda0, nu)?;
        let grid = SpatialGrid::new((-5.0, 5.0), n, BoundaryKind::Dirichlet);
        let amp = 2.0f64.powf(nu as f64 / 2.0) - 1.0;
        let mut problem = Self {
            lambda0,
            nu,
            beta: lambda0 * lambda0,
            wave_k,
            wave_c,
            amp,
            grid,
            u0: Vec::new(),
        };
        problem.u0 = problem
            .grid
            .points()
            .iter()
            .map(|&x| problem.wave(x, 0.0))
            .collect();
        Ok(problem)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Exact traveling wave at an arbitrary point.
    pub fn wave(&self, x: f64, t: f64) -> f64 {
        let w = self.amp * (self.wave_k * (x - self.wave_c * t)).exp();
        (1.0 + w).powf(-2.0 / self.nu as f64)
    }

    fn reaction(&self, u: f64) -> f64 {
        self.beta * u * (1.0 - u.powi(self.nu as i32))
    }

    /// d/du of the reaction term.
    fn reaction_derivative(&self, u: f64) -> f64 {
        self.beta * (1.0 - (self.nu as f64 + 1.0) * u.powi(self.nu as i32))
    }

    fn boundary_values(&self, t: f64) -> (f64, f64) {
        let (a, b) = self.grid.domain();
        (self.wave(a, t), self.wave(b, t))
    }
}

impl Problem for KppProblem {
    fn name(&self) -> &'static str {
        "kpp"
    }

    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn initial(&self) -> Vec<f64> {
        self.u0.clone()
    }

    fn rhs(&self, u: &[f64], t: f64) -> Vec<f64> {
        let n = u.len();
        let h2 = self.grid.h() * self.grid.h();
        let (left_bc, right_bc) = self.boundary_values(t);
        (0..n)
            .map(|i| {
                let left = if i > 0 { u[i - 1] } else { left_bc };
                let right = if i + 1 < n { u[i + 1] } else { right_bc };
                (left - 2.0 * u[i] + right) / h2 + self.reaction(u[i])
            })
            .collect()
    }

    fn jacobian(&self, u: &[f64]) -> RMatrix {
        let n = self.dim();
        let h2 = self.grid.h() * self.grid.h();
        RMatrix::from_fn(n, n, |i, j| {
            if i == j {
                -2.0 / h2 + self.reaction_derivative(u[i])
            } else if i.abs_diff(j) == 1 {
                1.0 / h2
            } else {
                0.0
            }
        })
    }

    fn jacobian_apply(&self, u_ref: &[f64], v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let h2 = self.grid.h() * self.grid.h();
        (0..n)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < n { v[i + 1] } else { 0.0 };
                (left - 2.0 * v[i] + right) / h2 + self.reaction_derivative(u_ref[i]) * v[i]
            })
            .collect()
    }

    fn node_solve(
        &self,
        alpha: f64,
        b: &[f64],
        t: f64,
        guess: &[f64],
        tol: f64,
    ) -> Result<Vec<f64>, ProblemError> {
        let n = self.dim();
        let h2 = self.grid.h() * self.grid.h();
        newton_node_solve(
            n,
            b,
            guess,
            tol,
            |u| {
                let f = self.rhs(u, t);
                (0..n).map(|i| u[i] - alpha * f[i] - b[i]).collect()
            },
            |u, rhs| {
                let off = vec![-alpha / h2; n - 1];
                let diag: Vec<f64> = (0..n)
                    .map(|i| 1.0 - alpha * (-2.0 / h2 + self.reaction_derivative(u[i])))
                    .collect();
                Ok(tridiag_solve(&off, &diag, &off, rhs)?)
            },
        )
    }

    fn shifted_solve_complex(
        &self,
        u_ref: &[f64],
        alpha: Complex64,
        b: &[Complex64],
    ) -> Result<Vec<Complex64>, ProblemError> {
        let n = self.dim();
        let h2 = self.grid.h() * self.grid.h();
        let off = vec![-alpha / h2; n - 1];
        let diag: Vec<Complex64> = (0..n)
            .map(|i| {
                Complex64::new(1.0, 0.0) - alpha * (-2.0 / h2 + self.reaction_derivative(u_ref[i]))
            })
            .collect();
        Ok(tridiag_solve(&off, &diag, &off, b)?)
    }

    fn shifted_solve_real(
        &self,
        u_ref: &[f64],
        alpha: f64,
        b: &[f64],
    ) -> Result<Vec<f64>, ProblemError> {
        let n = self.dim();
        let h2 = self.grid.h() * self.grid.h();
        let off = vec![-alpha / h2; n - 1];
        let diag: Vec<f64> = (0..n)
            .map(|i| 1.0 - alpha * (-2.0 / h2 + self.reaction_derivative(u_ref[i])))
            .collect();
        Ok(tridiag_solve(&off, &diag, &off, b)?)
    }

    fn exact(&self, t: f64) -> Result<Vec<f64>, ProblemError> {
        Ok(self
            .grid
            .points()
            .iter()
            .map(|&x| self.wave(x, t))
            .collect())
    }

    fn grid(&self) -> Option<&SpatialGrid> {
        Some(&self.grid)
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("lambda0", self.lambda0),
            ("nu", self.nu as f64),
            ("wave_k", self.wave_k),
            ("wave_c", self.wave_c),
        ]
    }
}

// ---------------------------------------------------------------------------
// Dahlquist
// ---------------------------------------------------------------------------

/// Scalar `u' = lambda u`, `u(0) = 1`. The canonical analysis fixture: the
/// SDC iteration-matrix identities are exact for it.
pub struct DahlquistProblem {
    lambda: f64,
}

impl DahlquistProblem {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Problem for DahlquistProblem {
    fn name(&self) -> &'static str {
        "scalar"
    }

    fn dim(&self) -> usize {
        1
    }

    fn initial(&self) -> Vec<f64> {
        vec![1.0]
    }

    fn rhs(&self, u: &[f64], _t: f64) -> Vec<f64> {
        vec![self.lambda * u[0]]
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn jacobian(&self, _u: &[f64]) -> RMatrix {
        let mut j = RMatrix::new(1, 1);
        j[(0, 0)] = self.lambda;
        j
    }

    fn node_solve(
        &self,
        alpha: f64,
        b: &[f64],
        _t: f64,
        _guess: &[f64],
        _tol: f64,
    ) -> Result<Vec<f64>, ProblemError> {
        self.shifted_solve_real(&[], alpha, b)
    }

    fn shifted_solve_complex(
        &self,
        _u_ref: &[f64],
        alpha: Complex64,
        b: &[Complex64],
    ) -> Result<Vec<Complex64>, ProblemError> {
        let denom = Complex64::new(1.0, 0.0) - alpha * self.lambda;
        if denom.norm() < 1e-14 {
            return Err(ProblemError::Linalg(
                crate::error::LinalgError::SingularMatrix {
                    col: 0,
                    pivot: denom.norm(),
                    threshold: 1e-14,
                },
            ));
        }
        Ok(vec![b[0] / denom])
    }

    fn shifted_solve_real(
        &self,
        _u_ref: &[f64],
        alpha: f64,
        b: &[f64],
    ) -> Result<Vec<f64>, ProblemError> {
        let denom = 1.0 - alpha * self.lambda;
        if denom.abs() < 1e-14 {
            return Err(ProblemError::Linalg(
                crate::error::LinalgError::SingularMatrix {
                    col: 0,
                    pivot: denom.abs(),
                    threshold: 1e-14,
                },
            ));
        }
        Ok(vec![b[0] / denom])
    }

    fn exact(&self, t: f64) -> Result<Vec<f64>, ProblemError> {
        Ok(vec![(self.lambda * t).exp()])
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("lambda", self.lambda)]
    }
}

//! Computational experiment drivers shared by the CLI and the acceptance
//! tests: the objective-landscape scan, the iteration-count tables, and the
//! convergence-rate measurements. The CLI adds argument parsing and CSV
//! emission on top; everything numeric lives here so tests exercise exactly
//! the shipped code paths.

use crate::collocation::{radau_right_scheme, CollocationScheme, PrecondKind, Preconditioner};
use crate::error::StudyError;
use crate::minimizer::{
    canonical_min_starts, landscape_scan, nelder_mead, penalized_objective, LANDSCAPE_Q1_RANGE,
    LANDSCAPE_Q2_RANGE, NM_DEFAULT_MAX_ITER, NM_DEFAULT_TOL,
};
use crate::problems::{
    AdvectionProblem, HeatProblem, KppProblem, Problem, Stencil, VanDerPolProblem,
};
use crate::solvers::{
    error_on_nodes, newton_full, newton_inexact, newton_simplified, NewtonConfig, NewtonVariant,
    QDiagonalization,
};
use crate::sweeper::{preconditioner_for, solve_step, RunReport, SweepConfig};

/// The five preconditioner kinds in presentation order.
pub const ALL_KINDS: [PrecondKind; 5] = [
    PrecondKind::IE,
    PrecondKind::LU,
    PrecondKind::QPar,
    PrecondKind::IEPar,
    PrecondKind::Min,
];

/// Problem selector used by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKey {
    /// A: heat equation.
    Heat,
    /// B: advection equation.
    Advection,
    /// C: Van der Pol oscillator.
    VanDerPol,
    /// D: KPP reaction-diffusion.
    Kpp,
}

impl ProblemKey {
    pub const ALL: [ProblemKey; 4] = [
        ProblemKey::Heat,
        ProblemKey::Advection,
        ProblemKey::VanDerPol,
        ProblemKey::Kpp,
    ];

    /// Selector letter (the CLI vocabulary).
    pub fn letter(self) -> &'static str {
        match self {
            ProblemKey::Heat => "A",
            ProblemKey::Advection => "B",
            ProblemKey::VanDerPol => "C",
            ProblemKey::Kpp => "D",
        }
    }

    pub fn problem_name(self) -> &'static str {
        match self {
            ProblemKey::Heat => "heat",
            ProblemKey::Advection => "advection",
            ProblemKey::VanDerPol => "vanderpol",
            ProblemKey::Kpp => "kpp",
        }
    }

    /// Default spatial resolution (None for ODE problems).
    pub fn default_n(self) -> Option<usize> {
        match self {
            ProblemKey::Heat => Some(63),
            ProblemKey::Advection => Some(64),
            ProblemKey::VanDerPol => None,
            ProblemKey::Kpp => Some(63),
        }
    }

    /// Default parameter sweep: 10 log-spaced values spanning non-stiff to
    /// stiff regimes.
    pub fn default_params(self) -> Vec<f64> {
        match self {
            ProblemKey::Heat | ProblemKey::Advection => logspace(1e-3, 1e3, 10),
            ProblemKey::VanDerPol => logspace(1e-2, 1e2, 10),
            ProblemKey::Kpp => logspace(1e-1, 2e1, 10),
        }
    }

    /// Default single-run parameter.
    pub fn default_single_param(self) -> f64 {
        match self {
            ProblemKey::Kpp => 5.0,
            _ => 1.0,
        }
    }

    /// Instantiate the problem with the given stiffness parameter.
    pub fn build(
        self,
        param: f64,
        n: Option<usize>,
        stencil: Stencil,
    ) -> Result<Box<dyn Problem>, StudyError> {
        let n_res = n.or(self.default_n());
        Ok(match self {
            ProblemKey::Heat => Box::new(HeatProblem::new(param, n_res.unwrap())),
            ProblemKey::Advection => {
                Box::new(AdvectionProblem::new(param, n_res.unwrap(), stencil))
            }
            ProblemKey::VanDerPol => Box::new(VanDerPolProblem::new(param)),
            ProblemKey::Kpp => Box::new(KppProblem::new(param, n_res.unwrap(), 1)?),
        })
    }
}

impl std::str::FromStr for ProblemKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" | "heat" => Ok(ProblemKey::Heat),
            "B" | "b" | "advection" => Ok(ProblemKey::Advection),
            "C" | "c" | "vanderpol" => Ok(ProblemKey::VanDerPol),
            "D" | "d" | "kpp" => Ok(ProblemKey::Kpp),
            other => Err(format!("unknown problem '{other}' (expected A|B|C|D)")),
        }
    }
}

impl std::fmt::Display for ProblemKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.letter())
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

// ---------------------------------------------------------------------------
// landscape
// ---------------------------------------------------------------------------

/// One Nelder-Mead run recorded by the landscape experiment.
#[derive(Clone, Debug)]
pub struct LandscapeNm {
    pub start: [f64; 2],
    pub q: [f64; 2],
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Grid scan plus the two canonical minimization runs.
#[derive(Clone, Debug)]
pub struct LandscapeResult {
    /// `(q1, q2, rho)` rows, row-major with `q1` varying slowest.
    pub grid: Vec<(f64, f64, f64)>,
    pub nm: [LandscapeNm; 2],
}

/// Scan the two-node stiff-limit objective over the canonical ranges and run
/// Nelder-Mead from both canonical starts.
pub fn landscape(resolution: usize, workers: usize) -> Result<LandscapeResult, StudyError> {
    let scheme = radau_right_scheme(2)?;
    let grid = landscape_scan(
        &scheme,
        LANDSCAPE_Q1_RANGE,
        LANDSCAPE_Q2_RANGE,
        (resolution, resolution),
        workers,
    );
    let nm = canonical_min_starts(2).map(|start| {
        let r = nelder_mead(
            |q| penalized_objective(&scheme, q),
            &start,
            NM_DEFAULT_TOL,
            NM_DEFAULT_MAX_ITER,
        );
        LandscapeNm {
            start: [start[0], start[1]],
            q: [r.q[0], r.q[1]],
            rho: r.objective,
            iterations: r.iterations,
            converged: r.converged,
        }
    });
    Ok(LandscapeResult { grid, nm })
}

// ---------------------------------------------------------------------------
// iteration counts
// ---------------------------------------------------------------------------

/// Configuration for the iteration-count experiment.
#[derive(Clone, Debug)]
pub struct IterationCountsConfig {
    pub m: usize,
    pub dt: f64,
    pub tol: f64,
    pub max_iterations: usize,
    pub node_tol: f64,
    pub workers: usize,
    pub stencil: Stencil,
    /// Override the per-problem default spatial resolution.
    pub n_override: Option<usize>,
}

impl Default for IterationCountsConfig {
    fn default() -> Self {
        Self {
            m: 3,
            dt: 0.1,
            tol: 1e-8,
            max_iterations: 100,
            node_tol: 1e-12,
            workers: 1,
            stencil: Stencil::Centered,
            n_override: None,
        }
    }
}

/// One (problem, parameter, kind) outcome.
#[derive(Clone, Debug)]
pub struct IterCountRow {
    pub problem: ProblemKey,
    pub param: f64,
    pub kind: PrecondKind,
    pub iterations: usize,
    pub converged: bool,
}

/// All four problems with their default parameter sweeps.
pub fn default_selection() -> Vec<(ProblemKey, Vec<f64>)> {
    ProblemKey::ALL
        .into_iter()
        .map(|k| (k, k.default_params()))
        .collect()
}

/// Run one SDC step per (problem, parameter, kind) and record the iteration
/// count. Hitting the cap is an expected outcome (recorded, not an error);
/// anything else propagates.
pub fn iteration_counts(
    selection: &[(ProblemKey, Vec<f64>)],
    config: &IterationCountsConfig,
) -> Result<Vec<IterCountRow>, StudyError> {
    let scheme = radau_right_scheme(config.m)?;
    let preconds: Vec<Preconditioner> = ALL_KINDS
        .iter()
        .map(|&k| preconditioner_for(&scheme, k))
        .collect::<Result<_, _>>()?;
    let sweep_config = SweepConfig {
        tol: config.tol,
        max_iterations: config.max_iterations,
        node_tol: config.node_tol,
        workers: config.workers,
    };
    let mut rows = Vec::new();
    for (key, params) in selection {
        for &param in params {
            let problem = key.build(param, config.n_override, config.stencil)?;
            let u0 = problem.initial();
            for precond in &preconds {
                let report = solve_step(
                    problem.as_ref(),
                    &scheme,
                    precond,
                    0.0,
                    config.dt,
                    &u0,
                    &sweep_config,
                )?;
                rows.push(IterCountRow {
                    problem: *key,
                    param,
                    kind: precond.kind(),
                    iterations: report.iterations,
                    converged: report.converged,
                });
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// methods and single runs
// ---------------------------------------------------------------------------

/// Solution method selector (SDC sweeps or one of the Newton variants).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Sdc,
    FullNewton,
    SimplifiedNewton,
    InexactNewton,
}

impl Method {
    /// Label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Method::Sdc => "sdc",
            Method::FullNewton => "newton_full",
            Method::SimplifiedNewton => "simplified_newton",
            Method::InexactNewton => "inexact_newton",
        }
    }

    /// Token accepted on the command line and in manifests.
    pub fn cli_token(self) -> &'static str {
        match self {
            Method::Sdc => "sdc",
            Method::FullNewton => "newton",
            Method::SimplifiedNewton => "simplified",
            Method::InexactNewton => "inexact",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sdc" => Ok(Method::Sdc),
            "newton" => Ok(Method::FullNewton),
            "simplified" => Ok(Method::SimplifiedNewton),
            "inexact" => Ok(Method::InexactNewton),
            other => Err(format!(
                "unknown method '{other}' (expected sdc|newton|simplified|inexact)"
            )),
        }
    }
}

/// Iteration controls shared by [`method_step`] callers.
#[derive(Clone, Debug)]
pub struct MethodConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub node_tol: f64,
    pub workers: usize,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            node_tol: 1e-12,
            workers: 1,
        }
    }
}

/// One step of the selected method. `diag` is required for simplified
/// Newton, `precond` for SDC and inexact Newton.
#[allow(clippy::too_many_arguments)]
pub fn method_step(
    method: Method,
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    diag: Option<&QDiagonalization>,
    precond: Option<&Preconditioner>,
    t0: f64,
    dt: f64,
    u0: &[f64],
    config: &MethodConfig,
) -> Result<RunReport, StudyError> {
    let newton = |variant| NewtonConfig {
        tol: config.tol,
        max_iter: config.max_iter,
        variant,
        workers: config.workers,
    };
    Ok(match method {
        Method::Sdc => solve_step(
            problem,
            scheme,
            precond.expect("sdc needs a preconditioner"),
            t0,
            dt,
            u0,
            &SweepConfig {
                tol: config.tol,
                max_iterations: config.max_iter,
                node_tol: config.node_tol,
                workers: config.workers,
            },
        )?,
        Method::FullNewton => newton_full(
            problem,
            scheme,
            t0,
            dt,
            u0,
            &newton(NewtonVariant::FullNewton),
        )?,
        Method::SimplifiedNewton => newton_simplified(
            problem,
            scheme,
            diag.expect("simplified Newton needs the Q diagonalization"),
            t0,
            dt,
            u0,
            &newton(NewtonVariant::SimplifiedNewton),
        )?,
        Method::InexactNewton => newton_inexact(
            problem,
            scheme,
            precond.expect("inexact Newton needs a preconditioner"),
            t0,
            dt,
            u0,
            &newton(NewtonVariant::InexactSimplifiedNewton),
        )?,
    })
}

/// Per-step reports of a time-marching run.
#[derive(Clone, Debug)]
pub struct SingleOutcome {
    pub reports: Vec<RunReport>,
    pub final_state: Vec<f64>,
}

impl SingleOutcome {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }
}

/// March `steps` steps of size `dt` with the selected method, recording every
/// step report. Non-convergence is recorded, not an error.
#[allow(clippy::too_many_arguments)]
pub fn run_single(
    method: Method,
    problem: &dyn Problem,
    scheme: &CollocationScheme,
    diag: Option<&QDiagonalization>,
    precond: Option<&Preconditioner>,
    dt: f64,
    steps: usize,
    config: &MethodConfig,
) -> Result<SingleOutcome, StudyError> {
    let mut u = problem.initial();
    let mut reports = Vec::with_capacity(steps);
    for s in 0..steps {
        let report = method_step(
            method,
            problem,
            scheme,
            diag,
            precond,
            s as f64 * dt,
            dt,
            &u,
            config,
        )?;
        u = report.end_state().to_vec();
        reports.push(report);
    }
    Ok(SingleOutcome {
        reports,
        final_state: u,
    })
}

// ---------------------------------------------------------------------------
// convergence rates
// ---------------------------------------------------------------------------

/// Configuration for the convergence-rate experiment.
#[derive(Clone, Debug)]
pub struct RatesConfig {
    pub m: usize,
    pub t_end: f64,
    pub steps_list: Vec<usize>,
    pub n: usize,
    pub lambda0: f64,
    pub nu: u32,
    /// Residual tolerance for the warm-up steps.
    pub tol: f64,
    pub node_tol: f64,
    pub workers: usize,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            m: 5,
            t_end: 0.1,
            steps_list: vec![2, 4, 8, 16],
            n: 255,
            lambda0: 5.0,
            nu: 1,
            tol: 1e-8,
            node_tol: 1e-12,
            workers: 1,
        }
    }
}

/// Errors against the collocation fixed point after 2 and 3 iterations of one
/// method on the final step.
#[derive(Clone, Debug)]
pub struct RateRow {
    pub method: Method,
    pub dt: f64,
    pub error_iter2: f64,
    pub error_iter3: f64,
    pub ratio: f64,
}

/// Rate rows plus fitted `log(ratio)` vs `log(dt)` slopes per method.
#[derive(Clone, Debug)]
pub struct RatesResult {
    pub rows: Vec<RateRow>,
    pub slope_sdc: f64,
    pub slope_simplified: f64,
    pub slope_inexact: f64,
}

impl RatesResult {
    pub fn slope(&self, method: Method) -> f64 {
        match method {
            Method::Sdc => self.slope_sdc,
            Method::SimplifiedNewton => self.slope_simplified,
            Method::InexactNewton => self.slope_inexact,
            Method::FullNewton => f64::NAN,
        }
    }
}

/// Methods measured by the rate experiment, in presentation order.
pub const RATE_METHODS: [Method; 3] =
    [Method::Sdc, Method::SimplifiedNewton, Method::InexactNewton];

/// Measure per-iteration contraction on the last step of each run: march the
/// earlier steps to tolerance, resolve the final-step collocation fixed point
/// to 1e-13, then run the method for exactly 2 and 3 iterations from the
/// spread guess and compare against the fixed point on all nodes.
pub fn convergence_rates(config: &RatesConfig) -> Result<RatesResult, StudyError> {
    let scheme = radau_right_scheme(config.m)?;
    let diag = QDiagonalization::from_scheme(&scheme)?;
    let lu = preconditioner_for(&scheme, PrecondKind::LU)?;
    let problem = KppProblem::new(config.lambda0, config.n, config.nu)?;
    let warmup = MethodConfig {
        tol: config.tol,
        max_iter: 100,
        node_tol: config.node_tol,
        workers: config.workers,
    };

    let mut rows = Vec::new();
    for &steps in &config.steps_list {
        assert!(steps >= 1);
        let dt = config.t_end / steps as f64;
        for method in RATE_METHODS {
            // march to the start of the last step, every step converged
            let mut u = problem.initial();
            for s in 0..steps - 1 {
                let report = method_step(
                    method,
                    &problem,
                    &scheme,
                    Some(&diag),
                    Some(&lu),
                    s as f64 * dt,
                    dt,
                    &u,
                    &warmup,
                )?;
                if !report.converged {
                    return Err(StudyError::NotConverged {
                        context: format!(
                            "{} warm-up step {}/{} at dt={dt}",
                            method.label(),
                            s + 1,
                            steps
                        ),
                    });
                }
                u = report.end_state().to_vec();
            }
            let t_last = (steps - 1) as f64 * dt;

            // collocation fixed point of the last step
            let tight = NewtonConfig {
                tol: 1e-13,
                max_iter: 200,
                variant: NewtonVariant::SimplifiedNewton,
                workers: config.workers,
            };
            let star = newton_simplified(&problem, &scheme, &diag, t_last, dt, &u, &tight)?;
            if !star.converged {
                return Err(StudyError::NotConverged {
                    context: format!("fixed-point resolve at dt={dt}"),
                });
            }

            // forced iterations: convergence check disabled via tol = 0
            let forced = |k: usize| -> Result<RunReport, StudyError> {
                method_step(
                    method,
                    &problem,
                    &scheme,
                    Some(&diag),
                    Some(&lu),
                    t_last,
                    dt,
                    &u,
                    &MethodConfig {
                        tol: 0.0,
                        max_iter: k,
                        node_tol: config.node_tol,
                        workers: config.workers,
                    },
                )
            };
            let e2 = error_on_nodes(&forced(2)?.states.states, &star.states.states);
            let e3 = error_on_nodes(&forced(3)?.states.states, &star.states.states);
            rows.push(RateRow {
                method,
                dt,
                error_iter2: e2,
                error_iter3: e3,
                ratio: e3 / e2,
            });
        }
    }

    let slope_for = |method: Method| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| (r.dt.ln(), r.ratio.ln()))
            .unzip();
        // a single-dt run has ratios but no slope
        if xs.len() < 2 {
            f64::NAN
        } else {
            ls_slope(&xs, &ys)
        }
    };
    Ok(RatesResult {
        slope_sdc: slope_for(Method::Sdc),
        slope_simplified: slope_for(Method::SimplifiedNewton),
        slope_inexact: slope_for(Method::InexactNewton),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_endpoints_and_monotonicity() {
        let v = logspace(1e-3, 1e3, 10);
        assert_eq!(v.len(), 10);
        assert!((v[0] - 1e-3).abs() < 1e-16);
        assert!((v[9] - 1e3).abs() < 1e-10);
        for w in v.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn ls_slope_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        assert!((ls_slope(&xs, &ys) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn problem_keys_parse_and_build() {
        assert_eq!("A".parse::<ProblemKey>().unwrap(), ProblemKey::Heat);
        assert_eq!("kpp".parse::<ProblemKey>().unwrap(), ProblemKey::Kpp);
        assert!("E".parse::<ProblemKey>().is_err());
        let dims = [
            (ProblemKey::Heat, 63),
            (ProblemKey::Advection, 64),
            (ProblemKey::VanDerPol, 2),
            (ProblemKey::Kpp, 63),
        ];
        for (key, dim) in dims {
            let p = key
                .build(key.default_single_param(), None, Stencil::Centered)
                .unwrap();
            assert_eq!(p.dim(), dim, "{key}");
            assert_eq!(p.name(), key.problem_name());
        }
    }

    #[test]
    fn iteration_counts_heat_extremes() {
        let selection = vec![(ProblemKey::Heat, vec![1e-3, 1e3])];
        let rows = iteration_counts(&selection, &IterationCountsConfig::default()).unwrap();
        assert_eq!(rows.len(), 10);
        // non-stiff end: everything converges, counts within +-2 of LU
        let small: Vec<&IterCountRow> = rows.iter().filter(|r| r.param == 1e-3).collect();
        let lu_count = small
            .iter()
            .find(|r| r.kind == PrecondKind::LU)
            .unwrap()
            .iterations as i64;
        for row in &small {
            assert!(row.converged, "{:?} did not converge at nu=1e-3", row.kind);
            assert!(
                (row.iterations as i64 - lu_count).abs() <= 2,
                "{:?}: {} vs LU {}",
                row.kind,
                row.iterations,
                lu_count
            );
        }
        // stiff end: LU converges and beats (or ties) the Jacobi kinds
        let large: Vec<&IterCountRow> = rows.iter().filter(|r| r.param == 1e3).collect();
        let lu = large.iter().find(|r| r.kind == PrecondKind::LU).unwrap();
        assert!(lu.converged);
        for kind in [PrecondKind::QPar, PrecondKind::IEPar] {
            let row = large.iter().find(|r| r.kind == kind).unwrap();
            assert!(
                !row.converged || row.iterations >= lu.iterations,
                "{kind:?} beat LU at nu=1e3"
            );
        }
    }

    #[test]
    fn single_run_matches_direct_stepping() {
        let scheme = radau_right_scheme(3).unwrap();
        let problem = HeatProblem::new(1.0, 31);
        let lu = preconditioner_for(&scheme, PrecondKind::LU).unwrap();
        let out = run_single(
            Method::Sdc,
            &problem,
            &scheme,
            None,
            Some(&lu),
            0.05,
            2,
            &MethodConfig::default(),
        )
        .unwrap();
        assert!(out.all_converged());
        assert_eq!(out.reports.len(), 2);
        let series = crate::sweeper::run_timeseries(
            &problem,
            &scheme,
            &lu,
            0.05,
            2,
            &SweepConfig::default(),
        )
        .unwrap();
        assert_eq!(out.final_state, series.final_state);
    }

    #[test]
    fn method_tokens_round_trip() {
        for m in [
            Method::Sdc,
            Method::FullNewton,
            Method::SimplifiedNewton,
            Method::InexactNewton,
        ] {
            assert_eq!(m.cli_token().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn landscape_smoke() {
        let result = landscape(11, 2).unwrap();
        assert_eq!(result.grid.len(), 121);
        // row-major, q1 slowest
        assert!(result.grid[0].0 < result.grid[120].0);
        assert_eq!(result.grid[0].0, result.grid[10].0);
        // both canonical minimizations land deep in the basins
        assert!(result.nm[0].rho < 1e-3, "nm1 rho {}", result.nm[0].rho);
        assert!(result.nm[1].rho < 1e-3, "nm2 rho {}", result.nm[1].rho);
        assert_eq!(result.nm[0].start, [1.0, 1.0]);
        assert_eq!(result.nm[1].start, [1.0, 2.0]);
    }

    #[test]
    fn convergence_rates_desk_smoke() {
        // reduced grid and step list: checks plumbing and per-dt ordering
        let config = RatesConfig {
            n: 63,
            steps_list: vec![2, 4],
            ..RatesConfig::default()
        };
        let result = convergence_rates(&config).unwrap();
        assert_eq!(result.rows.len(), 6);
        for &steps in &[2usize, 4] {
            let dt = 0.1 / steps as f64;
            let find = |m: Method| {
                result
                    .rows
                    .iter()
                    .find(|r| r.method == m && (r.dt - dt).abs() < 1e-15)
                    .unwrap()
            };
            let (sdc, simp, inex) = (
                find(Method::Sdc),
                find(Method::SimplifiedNewton),
                find(Method::InexactNewton),
            );
            assert!(
                simp.ratio < sdc.ratio && sdc.ratio < inex.ratio,
                "ordering at dt={dt}: {:.3e} {:.3e} {:.3e}",
                simp.ratio,
                sdc.ratio,
                inex.ratio
            );
            for r in [sdc, simp, inex] {
                assert!(r.error_iter2 > 0.0 && r.error_iter3 > 0.0 && r.ratio < 1.0);
            }
        }
    }
}

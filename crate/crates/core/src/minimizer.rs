//! Nelder-Mead minimization of the stiff-limit spectral radius, producing the
//! `MIN` diagonal preconditioner, plus the objective-landscape scan.
//!
//! The objective for diagonal coefficients `q` is `rho(I - diag(q) Q)`: the
//! asymptotic contraction factor of the preconditioned iteration for very
//! stiff modes. Its minima are extremely flat (for M = 2 they are exact
//! zeros), so the reported minimum value depends on the stopping rule; the
//! default tolerance of 1e-4 mirrors the common defaults of widely used
//! simplex implementations.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use crate::collocation::{qdelta_from_min_coefficients, CollocationScheme, Preconditioner};
use crate::error::MinimizerError;
use crate::linalg::{spectral_radius, vec_norm2, RMatrix};
use crate::workers::run_indexed;

/// Default Nelder-Mead stopping tolerance (simplex diameter and value spread).
pub const NM_DEFAULT_TOL: f64 = 1e-4;
/// Default Nelder-Mead iteration budget.
pub const NM_DEFAULT_MAX_ITER: usize = 5000;
/// Default landscape ranges and per-axis resolution: coefficients from just
/// above zero (the objective blows up at exactly zero) to beyond both minima.
pub const LANDSCAPE_Q1_RANGE: (f64, f64) = (1e-3, 8.0);
pub const LANDSCAPE_Q2_RANGE: (f64, f64) = (1e-3, 13.0);
pub const LANDSCAPE_RESOLUTION: usize = 400;
/// Canonical starts tried by [`qdelta_min`]: all-ones and 1,2 alternating.
pub fn canonical_min_starts(m: usize) -> [Vec<f64>; 2] {
    [
        vec![1.0; m],
        (0..m).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect(),
    ]
}

/// Outcome of a Nelder-Mead run: the best vertex seen, never worse than the
/// start point.
#[derive(Clone, Debug)]
pub struct MinimizerResult {
    /// Minimizing coefficients.
    pub q: Vec<f64>,
    /// Objective value at `q`.
    pub objective: f64,
    /// Start point the simplex grew from.
    pub start: Vec<f64>,
    /// Simplex iterations performed.
    pub iterations: usize,
    /// Objective evaluations.
    pub evaluations: usize,
    /// True if diameter and spread both fell below tolerance in budget.
    pub converged: bool,
}

/// Stiff-limit contraction factor `rho(I - diag(q) Q)` for the scheme's
/// quadrature matrix. No positivity penalty here: `q = 0` gives exactly
/// `rho(I) = 1`. Eigenvalue failures map to 1e6 so the minimizer treats them
/// as hopeless rather than aborting.
pub fn spectral_radius_objective(scheme: &CollocationScheme, q: &[f64]) -> f64 {
    let m = scheme.m();
    assert_eq!(q.len(), m, "coefficient count must match node count");
    let qm = scheme.q();
    let mut e = RMatrix::from_fn(m, m, |i, j| -q[i] * qm[(i, j)]);
    for i in 0..m {
        e[(i, i)] += 1.0;
    }
    spectral_radius(&e).unwrap_or(1e6)
}

/// Nelder-Mead with the standard coefficients: reflect 1, expand 2, contract
/// 0.5, shrink 0.5. Initial simplex perturbs each coordinate of `start` by 5%
/// (absolute 0.05 where the coordinate is zero). Converged when the simplex
/// diameter (max-abs against the best vertex) and the value spread both fall
/// below `tol`.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> MinimizerResult {
    let n = start.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        if p[i] != 0.0 {
            p[i] *= 1.05;
        } else {
            p[i] = 0.05;
        }
        pts.push(p);
    }
    let mut fs: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut iterations = 0usize;
    let mut evaluations = n + 1;
    let mut converged = false;
    while iterations < max_iter {
        // stable sort keeps tied vertices in insertion order
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();
        let diam = pts[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = fs[n] - fs[0];
        if diam < tol && spread < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|d| pts[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let xr: Vec<f64> = centroid
            .iter()
            .zip(&pts[n])
            .map(|(c, w)| c + (c - w))
            .collect();
        let fr = f(&xr);
        evaluations += 1;
        if fr < fs[0] {
            let xe: Vec<f64> = centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let fe = f(&xe);
            evaluations += 1;
            if fe < fr {
                pts[n] = xe;
                fs[n] = fe;
            } else {
                pts[n] = xr;
                fs[n] = fr;
            }
        } else if fr < fs[n - 1] {
            pts[n] = xr;
            fs[n] = fr;
        } else if fr < fs[n] {
            // outside contraction
            let xc: Vec<f64> = centroid
                .iter()
                .zip(&xr)
                .map(|(c, r)| c + 0.5 * (r - c))
                .collect();
            let fc = f(&xc);
            evaluations += 1;
            if fc <= fr {
                pts[n] = xc;
                fs[n] = fc;
            } else {
                shrink(&mut pts, &mut fs, &f, &mut evaluations);
            }
        } else {
            // inside contraction
            let xc: Vec<f64> = centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c - 0.5 * (c - w))
                .collect();
            let fc = f(&xc);
            evaluations += 1;
            if fc < fs[n] {
                pts[n] = xc;
                fs[n] = fc;
            } else {
                shrink(&mut pts, &mut fs, &f, &mut evaluations);
            }
        }
    }
    // pts[0] only holds the best vertex right after a sort
    let best = (0..=n).min_by(|&a, &b| fs[a].total_cmp(&fs[b])).unwrap();
    MinimizerResult {
        q: pts[best].clone(),
        objective: fs[best],
        start: start.to_vec(),
        iterations,
        evaluations,
        converged,
    }
}

fn shrink(
    pts: &mut [Vec<f64>],
    fs: &mut [f64],
    f: &impl Fn(&[f64]) -> f64,
    evaluations: &mut usize,
) {
    let n = pts.len() - 1;
    for i in 1..=n {
        let p: Vec<f64> = pts[0]
            .iter()
            .zip(&pts[i])
            .map(|(b, x)| b + 0.5 * (x - b))
            .collect();
        fs[i] = f(&p);
        pts[i] = p;
        *evaluations += 1;
    }
}

/// Positivity wall used when minimizing: the objective is only meaningful for
/// strictly positive coefficients.
pub fn penalized_objective(scheme: &CollocationScheme, q: &[f64]) -> f64 {
    if q.iter().any(|&x| x <= 0.0) {
        return 1e6 * (1.0 + vec_norm2(q));
    }
    spectral_radius_objective(scheme, q)
}

/// Minimize the stiff-limit spectral radius from a single start; errors if
/// the run did not converge or the resulting contraction factor is >= 1 (the
/// preconditioner would be useless).
pub fn qdelta_min_from(
    scheme: &CollocationScheme,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Preconditioner, MinimizerResult), MinimizerError> {
    let result = nelder_mead(|q| penalized_objective(scheme, q), start, tol, max_iter);
    if !result.converged || result.objective >= 1.0 {
        return Err(MinimizerError::MinimizationFailed {
            rho: result.objective,
            iterations: result.iterations,
            converged: result.converged,
        });
    }
    Ok((qdelta_from_min_coefficients(&result.q), result))
}

/// Build the `MIN` preconditioner: run the canonical starts and keep the best
/// converged result. Results are cached per node count (the scheme family is
/// fixed, so `m` determines `Q`).
pub fn qdelta_min(
    scheme: &CollocationScheme,
) -> Result<(Preconditioner, MinimizerResult), MinimizerError> {
    type MinCache = Mutex<HashMap<usize, (Vec<f64>, MinimizerResult)>>;
    static CACHE: OnceLock<MinCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some((q, result)) = cache.lock().unwrap().get(&scheme.m()) {
        return Ok((qdelta_from_min_coefficients(q), result.clone()));
    }
    let mut best: Option<(Preconditioner, MinimizerResult)> = None;
    let mut last_err = None;
    for start in canonical_min_starts(scheme.m()) {
        match qdelta_min_from(scheme, &start, NM_DEFAULT_TOL, NM_DEFAULT_MAX_ITER) {
            Ok((p, r)) => {
                if best
                    .as_ref()
                    .is_none_or(|(_, rb)| r.objective < rb.objective)
                {
                    best = Some((p, r));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((p, r)) => {
            cache
                .lock()
                .unwrap()
                .insert(scheme.m(), (r.q.clone(), r.clone()));
            Ok((p, r))
        }
        None => Err(last_err.expect("at least one start attempted")),
    }
}

/// Evaluate the objective on an inclusive grid over `(q1, q2)`, row-major
/// with `q1` varying slowest. Only defined for two-node schemes.
pub fn landscape_scan(
    scheme: &CollocationScheme,
    q1_range: (f64, f64),
    q2_range: (f64, f64),
    resolution: (usize, usize),
    workers: usize,
) -> Vec<(f64, f64, f64)> {
    assert_eq!(scheme.m(), 2, "landscape scan is defined for M = 2");
    let (n1, n2) = resolution;
    assert!(n1 >= 2 && n2 >= 2, "need at least a 2x2 grid");
    let axis = |range: (f64, f64), n: usize, k: usize| {
        range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
    };
    run_indexed(workers, n1 * n2, |idx| {
        let (i, j) = (idx / n2, idx % n2);
        let q1 = axis(q1_range, n1, i);
        let q2 = axis(q2_range, n2, j);
        (q1, q2, spectral_radius_objective(scheme, &[q1, q2]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::radau_right_scheme;

    #[test]
    fn objective_reference_values_m2() {
        let s = radau_right_scheme(2).unwrap();
        assert_eq!(spectral_radius_objective(&s, &[0.0, 0.0]), 1.0);
        assert!((spectral_radius_objective(&s, &[3.0, 1.0]) - 0.5).abs() < 1e-12);
        // reciprocal of diag(Q): same rho as the Qpar stiff limit, sqrt(3/5)
        let q = s.q();
        let recip = [1.0 / q[(0, 0)], 1.0 / q[(1, 1)]];
        let want = (3.0f64 / 5.0).sqrt();
        assert!((spectral_radius_objective(&s, &recip) - want).abs() < 1e-12);
        // far corner: no contraction out there
        assert!(spectral_radius_objective(&s, &[8.0, 13.0]) > 1.0);
    }

    #[test]
    fn quadratic_bowl_minimized() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2);
        let r = nelder_mead(f, &[0.0, 0.0], 1e-9, 5000);
        assert!(r.converged);
        assert!((r.q[0] - 1.0).abs() < 1e-4);
        assert!((r.q[1] - 2.0).abs() < 1e-4);
        assert!(r.objective <= f(&[0.0, 0.0]));
        assert_eq!(r.start, vec![0.0, 0.0]);
        assert!(r.evaluations >= r.iterations);
    }

    #[test]
    fn never_worse_than_start() {
        // a nasty non-convex objective; the result must still not regress
        let f = |x: &[f64]| (x[0] * 3.1).sin() + 0.1 * x[0].abs() + (x[1] * 0.7).cos();
        for start in [[0.0, 0.0], [2.0, -1.0], [-4.0, 5.0]] {
            let r = nelder_mead(f, &start, 1e-6, 60);
            assert!(r.objective <= f(&start) + 1e-15);
        }
    }

    #[test]
    fn m2_minima_match_reference_values() {
        let s = radau_right_scheme(2).unwrap();
        let f = |q: &[f64]| penalized_objective(&s, q);
        let r1 = nelder_mead(f, &[1.0, 1.0], NM_DEFAULT_TOL, NM_DEFAULT_MAX_ITER);
        let r2 = nelder_mead(f, &[1.0, 2.0], NM_DEFAULT_TOL, NM_DEFAULT_MAX_ITER);
        assert!(r1.converged && r2.converged);
        assert!((r1.q[0] - 3.8698).abs() < 0.05, "q = {:?}", r1.q);
        assert!((r1.q[1] - 1.5506).abs() < 0.05);
        assert!((r2.q[0] - 0.9303).abs() < 0.05, "q = {:?}", r2.q);
        assert!((r2.q[1] - 6.4495).abs() < 0.05);
        assert!(r1.objective > 6.5e-5 / 2.0 && r1.objective < 6.5e-5 * 2.0);
        assert!(r2.objective > 2.6e-5 / 2.0 && r2.objective < 2.6e-5 * 2.0);
    }

    #[test]
    fn min_preconditioner_usable_m3_m5() {
        for (m, bound) in [(2, 1e-4), (3, 1e-3), (5, 1.0)] {
            let s = radau_right_scheme(m).unwrap();
            let (p, r) = qdelta_min(&s).unwrap();
            assert!(r.converged);
            assert!(r.objective < bound, "M={m}: rho {}", r.objective);
            assert!(p.is_parallel());
            for i in 0..m {
                assert!((p.q_delta()[(i, i)] - 1.0 / r.q[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn min_cache_returns_identical_results() {
        let s = radau_right_scheme(3).unwrap();
        let (_, r1) = qdelta_min(&s).unwrap();
        let (_, r2) = qdelta_min(&s).unwrap();
        for (a, b) in r1.q.iter().zip(&r2.q) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn landscape_grid_probes() {
        let s = radau_right_scheme(2).unwrap();
        let rows = landscape_scan(&s, (1.0, 3.0), (1.0, 3.0), (3, 3), 1);
        assert_eq!(rows.len(), 9);
        // row-major: (q1=3, q2=1) is index 2*3 + 0
        let (q1, q2, rho) = rows[6];
        assert_eq!((q1, q2), (3.0, 1.0));
        assert!((rho - 0.5).abs() < 1e-12);
        // both basins contract strongly: points near the two reference minima
        // (rho grows like a square root away from the defective zeros, so even
        // 2e-4 off the exact point already costs ~1e-2)
        assert!(spectral_radius_objective(&s, &[3.87, 1.55]) < 0.1);
        assert!(spectral_radius_objective(&s, &[0.93, 6.45]) < 0.1);
    }
}

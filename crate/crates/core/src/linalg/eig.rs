//! Dense nonsymmetric eigensolver: Householder reduction to Hessenberg form,
//! complex single-shift (Wilkinson) QR iteration for the eigenvalues, conjugate
//! symmetrization, and inverse iteration for the eigenvectors. Sized for the
//! small quadrature matrices this library diagonalizes (n up to ~10); accuracy
//! is guarded by explicit residual checks rather than assumed.

use num_complex::Complex64;

use crate::error::LinalgError;
use crate::rng::Lcg;

use super::lu::{lu_factor, lu_factor_guarded};
use super::{check_dims, vec_norm2, CMatrix, RMatrix};

/// Right eigendecomposition `A = V diag(values) V^-1` with the inverse
/// computed and validated up front.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Eigenvalues; complex ones appear in exact conjugate pairs.
    pub values: Vec<Complex64>,
    /// Right eigenvectors as columns, phase-fixed (first component of modulus
    /// > 1e-8 is real positive).
    pub vectors: CMatrix,
    /// Inverse of the eigenvector matrix.
    pub inverse: CMatrix,
}

impl EigenDecomposition {
    /// `V diag(values) V^-1`, for reconstruction tests.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut vl = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                vl[(i, j)] *= self.values[j];
            }
        }
        vl.matmul(&self.inverse)
    }
}

/// Reduce to upper Hessenberg form by Householder reflections (similarity).
fn hessenberg(a: &RMatrix) -> RMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm2(&v);
        if xnorm <= 1e-300 {
            continue;
        }
        let alpha = -xnorm.copysign(v[0]);
        v[0] -= alpha;
        let vnorm = vec_norm2(&v);
        if vnorm <= 1e-300 {
            continue;
        }
        for x in &mut v {
            *x /= vnorm;
        }
        // left update: H[k+1.., k..] -= 2 v (v^T H[k+1.., k..])
        for j in k..n {
            let mut dot = 0.0;
            for (idx, i) in (k + 1..n).enumerate() {
                dot += v[idx] * h[(i, j)];
            }
            let two_dot = 2.0 * dot;
            for (idx, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= two_dot * v[idx];
            }
        }
        // right update: H[.., k+1..] -= 2 (H[.., k+1..] v) v^T
        for i in 0..n {
            let mut dot = 0.0;
            for (idx, j) in (k + 1..n).enumerate() {
                dot += h[(i, j)] * v[idx];
            }
            let two_dot = 2.0 * dot;
            for (idx, j) in (k + 1..n).enumerate() {
                h[(i, j)] -= two_dot * v[idx];
            }
        }
        // annihilated by construction; clear roundoff dust
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    h
}

/// Eigenvalues of a 2x2 complex matrix, quadratic formula.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

/// Wilkinson shift: the eigenvalue of the trailing 2x2 closer to its (2,2)
/// entry.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (e1, e2) = eig2(a, b, c, d);
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// One explicit single-shift QR step on the unreduced block `l..=hi` of `h`.
/// Eigenvalue-only iteration, so the similarity transform stays block-local.
fn qr_step_block(h: &mut CMatrix, l: usize, hi: usize, mu: Complex64) {
    let m = hi - l + 1;
    let mut b = CMatrix::from_fn(m, m, |i, j| h[(l + i, l + j)]);
    for i in 0..m {
        b[(i, i)] -= mu;
    }
    // QR by Givens rotations G_i = [[c, s], [-conj(s), c]] with real c
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        let f = b[(i, i)];
        let g = b[(i + 1, i)];
        let (fa, ga) = (f.norm(), g.norm());
        let r = fa.hypot(ga);
        let (c, s) = if r == 0.0 {
            (1.0, Complex64::new(0.0, 0.0))
        } else if fa == 0.0 {
            (0.0, g.conj() / ga)
        } else {
            (fa / r, (f / fa) * g.conj() / r)
        };
        for j in i..m {
            let bi = b[(i, j)];
            let bj = b[(i + 1, j)];
            b[(i, j)] = bi * c + s * bj;
            b[(i + 1, j)] = -s.conj() * bi + bj * c;
        }
        b[(i + 1, i)] = Complex64::new(0.0, 0.0);
        rots.push((c, s));
    }
    // RQ: apply each G_i^H on the right in the same order
    for (i, &(c, s)) in rots.iter().enumerate() {
        for row in 0..m {
            let xi = b[(row, i)];
            let xj = b[(row, i + 1)];
            b[(row, i)] = xi * c + s.conj() * xj;
            b[(row, i + 1)] = -s * xi + xj * c;
        }
    }
    for i in 0..m {
        b[(i, i)] += mu;
    }
    for i in 0..m {
        for j in 0..m {
            h[(l + i, l + j)] = b[(i, j)];
        }
    }
}

/// Shifted-QR eigenvalues of a real matrix (no eigenvectors).
pub fn eigenvalues(a: &RMatrix) -> Result<Vec<Complex64>, LinalgError> {
    check_dims("eigenvalues square", a.rows(), a.cols())?;
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let anorm = a.inf_norm();
    let mut h = hessenberg(a).promote();
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let budget = 100 * n;
    let mut steps = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eigs[0] = h[(0, 0)];
            break;
        }
        // deflation scan from the bottom of the active region
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let thr = 1e-16 * if s > 0.0 { s } else { anorm.max(1.0) };
            if h[(l, l - 1)].norm() <= thr {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            continue;
        }
        if l + 1 == hi {
            let (e1, e2) = eig2(h[(l, l)], h[(l, l + 1)], h[(l + 1, l)], h[(l + 1, l + 1)]);
            eigs[l] = e1;
            eigs[hi] = e2;
            if l == 0 {
                break;
            }
            hi = l - 1;
            continue;
        }
        if steps >= budget {
            return Err(LinalgError::ConvergenceFailure {
                context: format!("QR iteration exceeded {budget} steps at block {l}..={hi}"),
            });
        }
        steps += 1;
        let mu = wilkinson(
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        qr_step_block(&mut h, l, hi, mu);
    }
    symmetrize_conjugates(&mut eigs, anorm);
    Ok(eigs)
}

/// Real matrices have conjugate-symmetric spectra; the QR output only matches
/// to roundoff. Snap near-real eigenvalues onto the axis and average paired
/// conjugates so downstream complex arithmetic cancels exactly.
fn symmetrize_conjugates(eigs: &mut [Complex64], anorm: f64) {
    let scale = anorm.max(1e-300);
    let tol_real = 1e-11 * scale;
    let tol_pair = 1e-8 * scale;
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, e) in eigs.iter_mut().enumerate() {
        if e.im.abs() <= tol_real {
            *e = Complex64::new(e.re, 0.0);
        } else if e.im > 0.0 {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    let mut used = vec![false; neg.len()];
    for &p in &pos {
        let zp = eigs[p];
        let mut best: Option<(usize, f64)> = None;
        for (k, &q) in neg.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = (zp - eigs[q].conj()).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        if let Some((k, d)) = best {
            if d <= tol_pair {
                used[k] = true;
                let q = neg[k];
                let re = 0.5 * (zp.re + eigs[q].re);
                let im = 0.5 * (zp.im - eigs[q].im);
                eigs[p] = Complex64::new(re, im);
                eigs[q] = Complex64::new(re, -im);
            }
        }
    }
}

/// Largest eigenvalue modulus. Does not require distinct eigenvalues.
pub fn spectral_radius(a: &RMatrix) -> Result<f64, LinalgError> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Inverse iteration for the eigenvector of `lambda`. The shifted system is
/// near-singular on purpose; tiny LU pivots are clamped LAPACK-style instead
/// of treated as errors.
fn inverse_iteration(
    a: &CMatrix,
    lambda: Complex64,
    anorm: f64,
    rng: &mut Lcg,
) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.rows();
    let scale = anorm.max(1.0);
    let mut b = a.clone();
    for i in 0..n {
        b[(i, i)] -= lambda;
    }
    let clamp = 1e-16 * anorm.max(1e-300);
    let lu = lu_factor_guarded(&b, clamp, Some(clamp))?;
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5))
        .collect();
    normalize2(&mut v);
    let mut best_res = f64::INFINITY;
    let mut best = v.clone();
    for _ in 0..50 {
        let mut w = lu.solve(&v);
        normalize2(&mut w);
        let aw = a.matvec(&w);
        let res = aw
            .iter()
            .zip(&w)
            .map(|(awi, wi)| (awi - lambda * wi).norm())
            .fold(0.0, f64::max);
        v = w;
        if res < best_res {
            best_res = res;
            best.clone_from(&v);
        }
        if res <= 1e-13 * scale {
            break;
        }
    }
    if best_res > 1e-12 * scale {
        return Err(LinalgError::ConvergenceFailure {
            context: format!("inverse iteration residual {best_res:.3e} for eigenvalue {lambda}"),
        });
    }
    let mut v = best;
    if let Some(c) = v.iter().find(|c| c.norm() > 1e-8).copied() {
        let phase = c.conj() / c.norm();
        for x in &mut v {
            *x *= phase;
        }
    }
    Ok(v)
}

fn normalize2(v: &mut [Complex64]) {
    let norm = vec_norm2(v);
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}

/// Full eigendecomposition of a real matrix with distinct eigenvalues.
/// Validates `V V^-1 = I` (max deviation 1e-12) and `A V = V diag(values)`
/// (max deviation 1e-12 relative to the matrix scale) before returning.
pub fn eigendecompose(a: &RMatrix) -> Result<EigenDecomposition, LinalgError> {
    check_dims("eigendecompose square", a.rows(), a.cols())?;
    let n = a.rows();
    let anorm = a.inf_norm();
    let scale = anorm.max(1.0);
    let values = eigenvalues(a)?;
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    if n > 1 && gap < 1e-10 * scale {
        return Err(LinalgError::EigenvaluesNotDistinct {
            gap,
            threshold: 1e-10 * scale,
        });
    }
    let ac = a.promote();
    let mut rng = Lcg::new(Lcg::DEFAULT_SEED);
    let mut vectors = CMatrix::new(n, n);
    for (j, &lam) in values.iter().enumerate() {
        let v = inverse_iteration(&ac, lam, anorm, &mut rng)?;
        for i in 0..n {
            vectors[(i, j)] = v[i];
        }
    }
    let lu = lu_factor(&vectors)?;
    let mut inverse = lu.solve_matrix(&CMatrix::identity(n));
    // one Newton step X <- X (2I - V X) sharpens the inverse to ~1e-15
    let mut corr = vectors.matmul(&inverse).scale(Complex64::new(-1.0, 0.0));
    for i in 0..n {
        corr[(i, i)] += 2.0;
    }
    inverse = inverse.matmul(&corr);
    let dev = vectors
        .matmul(&inverse)
        .sub(&CMatrix::identity(n))
        .max_abs();
    if dev > 1e-12 {
        return Err(LinalgError::ConvergenceFailure {
            context: format!("eigenvector inverse validation failed: |V V^-1 - I| = {dev:.3e}"),
        });
    }
    let av = ac.matmul(&vectors);
    let mut vl = vectors.clone();
    for j in 0..n {
        for i in 0..n {
            vl[(i, j)] *= values[j];
        }
    }
    let recon_dev = av.sub(&vl).max_abs();
    if recon_dev > 1e-12 * scale {
        return Err(LinalgError::ConvergenceFailure {
            context: format!(
                "eigenpair residual |A V - V L| = {recon_dev:.3e} exceeds 1e-12 scale"
            ),
        });
    }
    Ok(EigenDecomposition {
        values,
        vectors,
        inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let mut a = Matrix::new(3, 3);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 2.0;
        a[(2, 2)] = 3.0;
        let e = sorted_by_re(eigenvalues(&a).unwrap());
        for (got, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn two_by_two_with_real_spectrum() {
        // eigenvalues 0 and 1/2
        let a = Matrix::from_rows(&[vec![-0.25, 0.25], vec![-0.75, 0.75]]);
        let e = sorted_by_re(eigenvalues(&a).unwrap());
        assert!((e[0].norm()) < 1e-14);
        assert!((e[1] - 0.5).norm() < 1e-14);
    }

    #[test]
    fn rotation_gives_exact_conjugate_pair() {
        let a = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let e = eigenvalues(&a).unwrap();
        assert!((e[0].norm() - 1.0).abs() < 1e-14);
        // symmetrization makes the pair exactly conjugate
        assert_eq!(e[0].re, e[1].re);
        assert_eq!(e[0].im, -e[1].im);
        assert!(e[0].im.abs() > 0.99);
    }

    #[test]
    fn companion_matrix_roots() {
        // char poly (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let a = Matrix::from_rows(&[
            vec![6.0, -11.0, 6.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        let e = sorted_by_re(eigenvalues(&a).unwrap());
        for (got, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).norm() < 1e-10, "got {got} want {want}");
        }
    }

    #[test]
    fn nilpotent_spectral_radius_zero() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(spectral_radius(&a).unwrap(), 0.0);
        assert_eq!(spectral_radius(&Matrix::identity(3)).unwrap(), 1.0);
        let mut d = Matrix::new(2, 2);
        d[(0, 0)] = -3.0;
        d[(1, 1)] = 2.0;
        assert!((spectral_radius(&d).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigendecompose_diagonal() {
        let mut a = Matrix::new(2, 2);
        a[(0, 0)] = 2.0;
        a[(1, 1)] = 5.0;
        let ed = eigendecompose(&a).unwrap();
        let recon = ed.reconstruct();
        assert!(recon.sub(&a.promote()).max_abs() < 1e-12 * a.inf_norm());
        let vals = sorted_by_re(ed.values.clone());
        assert!((vals[0] - 2.0).norm() < 1e-13);
        assert!((vals[1] - 5.0).norm() < 1e-13);
    }

    #[test]
    fn eigendecompose_nonsymmetric_reconstructs() {
        let a = Matrix::from_rows(&[
            vec![0.3, 1.1, -0.4],
            vec![0.0, -0.7, 0.9],
            vec![0.5, 0.2, 0.6],
        ]);
        let ed = eigendecompose(&a).unwrap();
        let recon = ed.reconstruct();
        assert!(recon.sub(&a.promote()).max_abs() <= 1e-11 * a.inf_norm().max(1.0));
    }

    #[test]
    fn repeated_eigenvalues_rejected() {
        let a = Matrix::identity(3);
        match eigendecompose(&a) {
            Err(LinalgError::EigenvaluesNotDistinct { .. }) => {}
            other => panic!("expected EigenvaluesNotDistinct, got {other:?}"),
        }
    }

    #[test]
    fn eigendecompose_is_deterministic() {
        let a = Matrix::from_rows(&[
            vec![0.3, 1.1, -0.4],
            vec![0.0, -0.7, 0.9],
            vec![0.5, 0.2, 0.6],
        ]);
        let e1 = eigendecompose(&a).unwrap();
        let e2 = eigendecompose(&a).unwrap();
        for (x, y) in e1.vectors.row(1).iter().zip(e2.vectors.row(1)) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}

//! LU factorization with partial pivoting (generic over the scalar field) and
//! Doolittle factorization without pivoting (real, used for the LU-trick
//! preconditioner where the pivot order must stay fixed).

use crate::error::LinalgError;

use super::{check_dims, Matrix, Scalar};

/// Modulus below which a pivot is treated as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Packed LU factors of a square matrix with row permutation.
#[derive(Clone, Debug)]
pub struct LuFactors<T: Scalar> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

/// Factor `a = P L U` with partial pivoting. Pivots below [`PIVOT_THRESHOLD`]
/// in modulus raise [`LinalgError::SingularMatrix`].
pub fn lu_factor<T: Scalar>(a: &Matrix<T>) -> Result<LuFactors<T>, LinalgError> {
    lu_factor_guarded(a, PIVOT_THRESHOLD, None)
}

/// Partial-pivot factorization with a caller-chosen singularity threshold.
/// When `replace` is given, pivots with modulus below the threshold are
/// replaced by `replace` (keeping the pivot's phase) instead of erroring; the
/// eigensolver's inverse iteration uses this to solve intentionally
/// near-singular shifted systems.
pub(super) fn lu_factor_guarded<T: Scalar>(
    a: &Matrix<T>,
    threshold: f64,
    replace: Option<f64>,
) -> Result<LuFactors<T>, LinalgError> {
    check_dims("lu_factor square", a.rows(), a.cols())?;
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pk, mut pmax) = (k, lu[(k, k)].modulus());
        for i in k + 1..n {
            let m = lu[(i, k)].modulus();
            if m > pmax {
                pk = i;
                pmax = m;
            }
        }
        if pmax < threshold {
            match replace {
                Some(eps) => {
                    let p = lu[(pk, k)];
                    lu[(pk, k)] = if p.modulus() == 0.0 {
                        T::from_f64(eps)
                    } else {
                        // keep the phase, bump the modulus
                        p * T::from_f64(eps / p.modulus())
                    };
                }
                None => {
                    return Err(LinalgError::SingularMatrix {
                        col: k,
                        pivot: pmax,
                        threshold,
                    })
                }
            }
        }
        if pk != k {
            perm.swap(pk, k);
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pk, j)];
                lu[(pk, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            if factor == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl<T: Scalar> LuFactors<T> {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solve `a x = b` for one right-hand side.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    /// Solve against every column of `b`.
    pub fn solve_matrix(&self, b: &Matrix<T>) -> Matrix<T> {
        assert_eq!(b.rows(), self.dim(), "rhs rows mismatch");
        let n = b.rows();
        let cols = b.cols();
        let mut out = Matrix::new(n, cols);
        for j in 0..cols {
            let col: Vec<T> = (0..n).map(|i| b[(i, j)]).collect();
            let x = self.solve(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    /// Inverse via solves against the identity.
    pub fn inverse(&self) -> Matrix<T> {
        self.solve_matrix(&Matrix::identity(self.dim()))
    }
}

/// Factor and solve in one call.
pub fn lu_factor_solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
    Ok(lu_factor(a)?.solve(b))
}

/// Doolittle factorization `a = L U` without pivoting: `L` unit lower
/// triangular, `U` upper triangular. The fixed elimination order is essential
/// for the LU-trick preconditioner.
pub fn doolittle(a: &Matrix<f64>) -> Result<(Matrix<f64>, Matrix<f64>), LinalgError> {
    check_dims("doolittle square", a.rows(), a.cols())?;
    let n = a.rows();
    let mut l = Matrix::identity(n);
    let mut u = Matrix::new(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = a[(i, j)];
            for k in 0..i {
                acc -= l[(i, k)] * u[(k, j)];
            }
            u[(i, j)] = acc;
        }
        let pivot = u[(i, i)];
        if pivot.abs() < PIVOT_THRESHOLD {
            return Err(LinalgError::SingularMatrix {
                col: i,
                pivot: pivot.abs(),
                threshold: PIVOT_THRESHOLD,
            });
        }
        for r in i + 1..n {
            let mut acc = a[(r, i)];
            for k in 0..i {
                acc -= l[(r, k)] * u[(k, i)];
            }
            l[(r, i)] = acc / pivot;
        }
    }
    Ok((l, u))
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::linalg::vec_inf_norm;

    #[test]
    fn solves_identity_and_diagonal() {
        let eye = Matrix::identity(4);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(lu_factor_solve(&eye, &b).unwrap(), b);
        let mut d = Matrix::new(3, 3);
        d[(0, 0)] = 2.0;
        d[(1, 1)] = -4.0;
        d[(2, 2)] = 0.5;
        assert_eq!(
            lu_factor_solve(&d, &[2.0, 4.0, 1.0]).unwrap(),
            vec![1.0, -1.0, 2.0]
        );
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let x = lu_factor_solve(&a, &[3.0, 7.0]).unwrap();
        assert_eq!(x, vec![7.0, 3.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        match lu_factor(&a) {
            Err(LinalgError::SingularMatrix { col, .. }) => assert_eq!(col, 1),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn complex_solve_residual_small() {
        let a = Matrix::from_fn(5, 5, |i, j| {
            Complex64::new(
                (1 + i * 3 + j) as f64 * 0.178 - ((i * j) as f64).sin(),
                ((i + 2 * j) as f64 * 0.21).cos(),
            )
        });
        let b: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let x = lu_factor_solve(&a, &b).unwrap();
        let r: Vec<Complex64> = a
            .matvec(&x)
            .iter()
            .zip(&b)
            .map(|(ax, bi)| ax - bi)
            .collect();
        assert!(vec_inf_norm(&r) <= 1e-12 * a.inf_norm().max(vec_inf_norm(&b)));
    }

    #[test]
    fn doolittle_factors_reference_matrix() {
        // a = [[4, 3], [6, 3]] -> L = [[1, 0], [1.5, 1]], U = [[4, 3], [0, -1.5]]
        let a = Matrix::from_rows(&[vec![4.0, 3.0], vec![6.0, 3.0]]);
        let (l, u) = doolittle(&a).unwrap();
        assert_eq!(l[(1, 0)], 1.5);
        assert_eq!(u[(0, 0)], 4.0);
        assert_eq!(u[(0, 1)], 3.0);
        assert_eq!(u[(1, 1)], -1.5);
        let recon = l.matmul(&u);
        assert!(recon.sub(&a).max_abs() <= 1e-13 * a.inf_norm());
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let a = Matrix::from_rows(&[
            vec![2.0, 1.0, 0.3],
            vec![-1.0, 3.5, 0.7],
            vec![0.2, -0.4, 1.9],
        ]);
        let inv = lu_factor(&a).unwrap().inverse();
        let eye = a.matmul(&inv);
        assert!(eye.sub(&Matrix::identity(3)).max_abs() < 1e-14);
    }
}

//! Thomas algorithm for tridiagonal systems. The spatial operators here are
//! diagonally dominant, so elimination without pivoting is stable; a pivot
//! guard catches misuse.

use crate::error::LinalgError;

use super::{check_dims, Scalar};

/// Solve a tridiagonal system. `lower[i]` is the entry at `(i+1, i)`,
/// `diag[i]` at `(i, i)`, `upper[i]` at `(i, i+1)`; `lower` and `upper` have
/// length `n - 1`.
pub fn tridiag_solve<T: Scalar>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    b: &[T],
) -> Result<Vec<T>, LinalgError> {
    let n = diag.len();
    check_dims("tridiag rhs", b.len(), n)?;
    check_dims("tridiag lower", lower.len(), n.saturating_sub(1))?;
    check_dims("tridiag upper", upper.len(), n.saturating_sub(1))?;
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut pivot = diag[0];
    check_pivot(pivot, 0)?;
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = b[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        check_pivot(pivot, i)?;
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        d[i] = (b[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let correction = c[i] * d[i + 1];
        d[i] -= correction;
    }
    Ok(d)
}

fn check_pivot<T: Scalar>(pivot: T, col: usize) -> Result<(), LinalgError> {
    let m = pivot.modulus();
    if m < super::lu::PIVOT_THRESHOLD {
        Err(LinalgError::SingularMatrix {
            col,
            pivot: m,
            threshold: super::lu::PIVOT_THRESHOLD,
        })
    } else {
        Ok(())
    }
}

//! Small dense complex linear algebra: lower-triangular Toeplitz forward
//! substitution and LU with partial pivoting. The LU kernel is generic over
//! [`Scalar`] so the same code path can propagate dual-number derivatives.

use crate::scalar::{Scalar, C};
use crate::{Error, Result};

/// Relative pivot threshold: a pivot below `PIVOT_REL · max|entry|` is singular.
const PIVOT_REL: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<C>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, entries: vec![C::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_rows(rows_data: Vec<Vec<C>>) -> Self {
        let rows = rows_data.len();
        let cols = rows_data.first().map_or(0, |r| r.len());
        debug_assert!(rows_data.iter().all(|r| r.len() == cols));
        ComplexMatrix { rows, cols, entries: rows_data.into_iter().flatten().collect() }
    }

    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> C {
        self.entries[i * self.cols + j]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: C) {
        self.entries[i * self.cols + j] = v;
    }
}

/// Solve `T x = rhs` where `T` is the lower-triangular Toeplitz matrix whose
/// first column is `first_column` (so `T[i][j] = first_column[i-j]` for
/// `i ≥ j`). Errors when the diagonal entry is numerically zero, which for the
/// time-difference systems means a ramified pole.
pub fn lower_toeplitz_solve<T: Scalar>(first_column: &[T], rhs: &[T]) -> Result<Vec<T>> {
    debug_assert_eq!(first_column.len(), rhs.len());
    let n = rhs.len();
    let diag = match first_column.first() {
        Some(d) => *d,
        None => return Ok(Vec::new()),
    };
    if diag.mag() <= 1e-14 {
        return Err(Error::RamifiedPole { magnitude: diag.mag() });
    }
    let mut x = vec![T::zero(); n];
    for i in 0..n {
        let mut acc = rhs[i];
        for j in 0..i {
            acc = acc - first_column[i - j] * x[j];
        }
        x[i] = acc / diag;
    }
    Ok(x)
}

/// LU factorization with partial pivoting, generic over the scalar type.
/// Returns (packed LU, row permutation, permutation sign).
fn lu_factor<T: Scalar>(a: &mut [Vec<T>]) -> Result<(Vec<usize>, f64)> {
    let n = a.len();
    let mut max_entry: f64 = 0.0;
    for row in a.iter() {
        for e in row {
            max_entry = max_entry.max(e.mag());
        }
    }
    let threshold = PIVOT_REL * max_entry;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        // pivot selection
        let mut best = k;
        let mut best_mag = a[k][k].mag();
        for i in (k + 1)..n {
            let m = a[i][k].mag();
            if m > best_mag {
                best = i;
                best_mag = m;
            }
        }
        if best_mag <= threshold {
            return Err(Error::SingularMatrix { index: k, magnitude: best_mag });
        }
        if best != k {
            a.swap(k, best);
            perm.swap(k, best);
            sign = -sign;
        }
        let pivot = a[k][k];
        for i in (k + 1)..n {
            let factor = a[i][k] / pivot;
            a[i][k] = factor;
            for j in (k + 1)..n {
                let akj = a[k][j];
                a[i][j] = a[i][j] - factor * akj;
            }
        }
    }
    Ok((perm, sign))
}

fn lu_substitute<T: Scalar>(lu: &[Vec<T>], perm: &[usize], b: &[T]) -> Vec<T> {
    let n = b.len();
    // forward substitution on permuted rhs
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut acc = b[perm[i]];
        for j in 0..i {
            acc = acc - lu[i][j] * y[j];
        }
        y[i] = acc;
    }
    // back substitution
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in (i + 1)..n {
            acc = acc - lu[i][j] * x[j];
        }
        x[i] = acc / lu[i][i];
    }
    x
}

/// Solve a dense square system `A x = b`, generic over the scalar type.
/// Two rounds of iterative refinement keep the forward error near machine
/// precision even for moderately ill-conditioned systems.
pub fn solve_generic<T: Scalar>(a: Vec<Vec<T>>, b: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n);
    let mut lu = a.clone();
    let (perm, _) = lu_factor(&mut lu)?;
    let mut x = lu_substitute(&lu, &perm, b);
    for _ in 0..2 {
        let mut resid = vec![T::zero(); n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..n {
                acc = acc - a[i][j] * x[j];
            }
            resid[i] = acc;
        }
        let d = lu_substitute(&lu, &perm, &resid);
        for i in 0..n {
            x[i] = x[i] + d[i];
        }
    }
    Ok(x)
}

/// Solve `A x = b` for a dense complex matrix.
pub fn dense_solve(a: &ComplexMatrix, b: &[C]) -> Result<Vec<C>> {
    debug_assert_eq!(a.rows, a.cols);
    debug_assert_eq!(a.rows, b.len());
    let rows: Vec<Vec<C>> =
        (0..a.rows).map(|i| (0..a.cols).map(|j| a.get(i, j)).collect()).collect();
    solve_generic(rows, b)
}

/// Determinant via the product of LU pivots with permutation sign.
pub fn determinant(a: &ComplexMatrix) -> Result<C> {
    debug_assert_eq!(a.rows, a.cols);
    let mut rows: Vec<Vec<C>> =
        (0..a.rows).map(|i| (0..a.cols).map(|j| a.get(i, j)).collect()).collect();
    let (_, sign) = lu_factor(&mut rows)?;
    let mut det = C::new(sign, 0.0);
    for (i, row) in rows.iter().enumerate() {
        det *= row[i];
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn toeplitz_diagonal() {
        let col = [c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let rhs = [c(2.0, 0.0), c(4.0, 0.0), c(6.0, 0.0)];
        let x = lower_toeplitz_solve(&col, &rhs).unwrap();
        assert_eq!(x, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn toeplitz_two_by_two() {
        let col = [c(1.0, 0.0), c(1.0, 0.0)];
        let rhs = [c(1.0, 0.0), c(0.0, 0.0)];
        let x = lower_toeplitz_solve(&col, &rhs).unwrap();
        assert_eq!(x, vec![c(1.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn toeplitz_ramified_error() {
        let col = [c(0.0, 0.0), c(1.0, 0.0)];
        let rhs = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            lower_toeplitz_solve(&col, &rhs),
            Err(Error::RamifiedPole { .. })
        ));
    }

    #[test]
    fn dense_identity() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        let b = [c(3.0, 1.0), c(-2.0, 4.0)];
        let x = dense_solve(&a, &b).unwrap();
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn dense_one_by_one() {
        let a = ComplexMatrix::from_rows(vec![vec![c(2.0, 0.0)]]);
        let x = dense_solve(&a, &[c(3.0, 1.0)]).unwrap();
        assert!((x[0] - c(1.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn dense_residual_small() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(2.0, 1.0), c(-1.0, 0.5), c(0.3, 0.0)],
            vec![c(0.1, -0.2), c(3.0, 0.0), c(1.0, 1.0)],
            vec![c(-0.5, 0.5), c(0.7, 0.1), c(2.5, -0.5)],
        ]);
        let b = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 2.0)];
        let x = dense_solve(&a, &b).unwrap();
        for i in 0..3 {
            let mut acc = c(0.0, 0.0);
            for j in 0..3 {
                acc += a.get(i, j) * x[j];
            }
            assert!((acc - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_names_pivot() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
        ]);
        match dense_solve(&a, &[c(1.0, 0.0), c(1.0, 0.0)]) {
            Err(Error::SingularMatrix { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected singular-matrix error, got {other:?}"),
        }
    }

    #[test]
    fn determinant_matches_cofactor() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 1.0), c(2.0, 0.0)],
            vec![c(0.5, 0.0), c(-1.0, 2.0)],
        ]);
        let expect = c(1.0, 1.0) * c(-1.0, 2.0) - c(2.0, 0.0) * c(0.5, 0.0);
        assert!((determinant(&a).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn toeplitz_agrees_with_dense() {
        let col = vec![c(1.5, 0.3), c(-0.7, 0.2), c(0.4, -0.6), c(0.1, 0.1)];
        let rhs = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0), c(-0.5, 0.5)];
        let xt = lower_toeplitz_solve(&col, &rhs).unwrap();
        let n = col.len();
        let mut a = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                a.set(i, j, col[i - j]);
            }
        }
        let xd = dense_solve(&a, &rhs).unwrap();
        for (u, v) in xt.iter().zip(xd.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}

//! Small dense solvers backing the closed-form updates.
//!
//! Dimensions here are feature counts (tens to a few hundred), so plain
//! Cholesky and partially pivoted LU are plenty; no external LAPACK.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Returns `None` when a non-positive pivot is hit.
pub fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let dj = diag.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Some(l)
}

/// Solve `L Lᵀ X = B` column by column given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let m = b.ncols();
    let mut x = b.clone();
    for col in 0..m {
        // forward: L y = b
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Solve the SPD system `A X = B` with one iterative refinement pass.
pub fn solve_spd(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let l = cholesky(a).ok_or_else(|| Error::Singular {
        context: format!("Cholesky failed on a {0}x{0} system", a.nrows()),
    })?;
    let mut x = cholesky_solve(&l, b);
    let r = b - &a.dot(&x);
    x += &cholesky_solve(&l, &r);
    Ok(x)
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    debug_assert_eq!(n, b.len());
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pivot_tol = f64::EPSILON * (n as f64) * scale.max(f64::MIN_POSITIVE);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = lu[(col, col)].abs();
        for row in (col + 1)..n {
            let v = lu[(row, col)].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val <= pivot_tol {
            return Err(Error::Singular {
                context: format!("LU pivot {pivot_val:.3e} below tolerance at column {col}"),
            });
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap((col, j), (pivot_row, j));
            }
            x.swap(col, pivot_row);
        }
        let piv = lu[(col, col)];
        for row in (col + 1)..n {
            let factor = lu[(row, col)] / piv;
            lu[(row, col)] = factor;
            for j in (col + 1)..n {
                lu[(row, j)] -= factor * lu[(col, j)];
            }
            x[row] -= factor * x[col];
        }
    }
    // back substitution
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= lu[(i, j)] * x[j];
        }
        x[i] = s / lu[(i, i)];
    }
    Ok(x)
}

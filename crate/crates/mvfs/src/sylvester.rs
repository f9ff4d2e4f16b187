//! Generalized Sylvester equation `A·X·B + P·X·Q = F` for the missing-block
//! update, with a matrix-form conjugate-gradient solver and a dense
//! vectorized oracle.
//!
//! All four coefficient matrices are symmetric positive semidefinite here,
//! so the linear operator `M(X) = A X B + P X Q + ridge·X` is symmetric PSD
//! under the Frobenius inner product and CG applies directly to the matrix
//! iterates. A small ridge keeps the operator definite when `W` is rank
//! deficient and `B`, `Q` share a null space.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::lu_solve;

/// Cap on `m * d` for the dense vectorized solve.
pub const DENSE_CAP: usize = 4096;

const RIDGE_ESCALATIONS: usize = 3;

/// The five matrices of `A·X·B + P·X·Q = F` plus the ridge added to the
/// operator. `A`, `P` are `m x m`; `B`, `Q` are `d x d`; `F` is `m x d`.
#[derive(Debug, Clone)]
pub struct SylvesterSystem {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub p: Array2<f64>,
    pub q: Array2<f64>,
    pub f: Array2<f64>,
    pub ridge: f64,
}

impl SylvesterSystem {
    /// Validate shapes and symmetry (within 1e-10) and attach the default
    /// ridge `1e-8 ||F||_F / (m d)`.
    pub fn new(
        a: Array2<f64>,
        b: Array2<f64>,
        p: Array2<f64>,
        q: Array2<f64>,
        f: Array2<f64>,
    ) -> Result<Self> {
        let (m, d) = f.dim();
        for (name, mat, dim) in [("A", &a, m), ("B", &b, d), ("P", &p, m), ("Q", &q, d)] {
            if mat.dim() != (dim, dim) {
                return Err(Error::InvalidParameter(format!(
                    "{name} has shape {:?}, expected ({dim}, {dim})",
                    mat.dim()
                )));
            }
            let asym = mat
                .iter()
                .zip(mat.t().iter())
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            if asym > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "{name} is asymmetric by {asym:.3e}"
                )));
            }
        }
        let ridge = Self::default_ridge(&f);
        Ok(Self { a, b, p, q, f, ridge })
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn default_ridge(f: &Array2<f64>) -> f64 {
        let (m, d) = f.dim();
        if m == 0 || d == 0 {
            return 0.0;
        }
        1e-8 * frobenius(f) / (m as f64 * d as f64)
    }

    /// Apply the operator `M(X) = A X B + P X Q + ridge X`.
    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = self.a.dot(x).dot(&self.b);
        out += &self.p.dot(x).dot(&self.q);
        if self.ridge != 0.0 {
            out.scaled_add(self.ridge, x);
        }
        out
    }

    /// `||M(X) - F||_F / max(||F||_F, 1)`.
    pub fn relative_residual(&self, x: &Array2<f64>) -> f64 {
        let r = &self.apply(x) - &self.f;
        frobenius(&r) / frobenius(&self.f).max(1.0)
    }
}

/// Outcome of a solve: the iterate, iteration count, and the relative
/// residual recomputed from scratch after the solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Array2<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn frobenius(x: &Array2<f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn inner(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Matrix-form conjugate gradients on `M(X) = F`, starting from
/// `warm_start` (zero otherwise). Stops when the relative residual drops
/// below `tol` or `max_iter` is reached. Negative curvature triggers a
/// ridge escalation (x10, three attempts) before failing.
pub fn solve_cg(
    system: &SylvesterSystem,
    tol: f64,
    max_iter: usize,
    warm_start: Option<&Array2<f64>>,
) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "CG tolerance {tol} must be positive"
        )));
    }
    let (m, d) = system.f.dim();
    if m == 0 || d == 0 {
        return Ok(SolveReport {
            solution: Array2::zeros((m, d)),
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let x0 = warm_start.cloned().unwrap_or_else(|| Array2::zeros((m, d)));
    let mut ridge = system.ridge;
    let mut attempt = 0usize;
    loop {
        let sys = system.clone().with_ridge(ridge);
        match cg_once(&sys, tol, max_iter, &x0) {
            CgOutcome::Done(report) => return Ok(report),
            CgOutcome::NegativeCurvature(pap) => {
                attempt += 1;
                if attempt > RIDGE_ESCALATIONS {
                    return Err(Error::Singular {
                        context: format!(
                            "CG saw negative curvature ({pap:.3e}) even after {RIDGE_ESCALATIONS} ridge escalations (final ridge {ridge:.3e})"
                        ),
                    });
                }
                ridge = if ridge > 0.0 {
                    ridge * 10.0
                } else {
                    SylvesterSystem::default_ridge(&system.f).max(1e-12)
                };
            }
        }
    }
}

enum CgOutcome {
    Done(SolveReport),
    NegativeCurvature(f64),
}

fn cg_once(sys: &SylvesterSystem, tol: f64, max_iter: usize, x0: &Array2<f64>) -> CgOutcome {
    let f_scale = frobenius(&sys.f).max(1.0);
    let mut x = x0.clone();
    let mut r = &sys.f - &sys.apply(&x);
    let mut iterations = 0usize;

    // Recurrence residuals can drift from the true residual; one fresh
    // restart closes the gap when it matters.
    for _restart in 0..2 {
        if frobenius(&r) / f_scale <= tol {
            break;
        }
        let mut p = r.clone();
        let mut rs_old = inner(&r, &r);
        while iterations < max_iter {
            let mp = sys.apply(&p);
            let pap = inner(&p, &mp);
            if pap <= 0.0 {
                return CgOutcome::NegativeCurvature(pap);
            }
            let step = rs_old / pap;
            x.scaled_add(step, &p);
            r.scaled_add(-step, &mp);
            iterations += 1;
            let rs_new = inner(&r, &r);
            if rs_new.sqrt() / f_scale <= tol {
                break;
            }
            let beta = rs_new / rs_old;
            p = &r + &(p * beta);
            rs_old = rs_new;
        }
        r = &sys.f - &sys.apply(&x);
        if frobenius(&r) / f_scale <= tol || iterations >= max_iter {
            break;
        }
    }

    let relative_residual = sys.relative_residual(&x);
    CgOutcome::Done(SolveReport {
        solution: x,
        iterations,
        relative_residual,
        converged: relative_residual <= tol,
    })
}

/// Dense oracle: solves `(A ⊗ Bᵀ + P ⊗ Qᵀ + ridge·I) vec(X) = vec(F)` with
/// row-major vectorization by LU factorization. Capped at `m·d <= 4096`.
pub fn solve_dense(system: &SylvesterSystem) -> Result<SolveReport> {
    let (m, d) = system.f.dim();
    let size = m * d;
    if size > DENSE_CAP {
        return Err(Error::SystemTooLarge {
            size,
            cap: DENSE_CAP,
        });
    }
    if size == 0 {
        return Ok(SolveReport {
            solution: Array2::zeros((m, d)),
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let mut big = Array2::<f64>::zeros((size, size));
    for i in 0..m {
        for j in 0..d {
            let row = i * d + j;
            for p in 0..m {
                for q in 0..d {
                    let col = p * d + q;
                    let mut v = system.a[(i, p)] * system.b[(q, j)]
                        + system.p[(i, p)] * system.q[(q, j)];
                    if row == col {
                        v += system.ridge;
                    }
                    big[(row, col)] = v;
                }
            }
        }
    }
    let rhs = Array1::from_iter(system.f.iter().cloned());
    let x_vec = lu_solve(&big, &rhs).map_err(|e| match e {
        Error::Singular { context } => Error::Singular {
            context: if system.ridge == 0.0 {
                format!("{context}; the system is singular at ridge 0, retry with a positive ridge")
            } else {
                context
            },
        },
        other => other,
    })?;
    let solution = Array2::from_shape_vec((m, d), x_vec.to_vec()).expect("shape");
    let relative_residual = system.relative_residual(&solution);
    Ok(SolveReport {
        solution,
        iterations: 0,
        relative_residual,
        converged: relative_residual <= 1e-8,
    })
}

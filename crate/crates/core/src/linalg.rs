//! Small dense linear algebra on `ndarray` matrices: Cholesky factorisation,
//! triangular solves and a cyclic Jacobi eigen-solver for symmetric matrices.
//!
//! Everything here targets the tiny systems of this crate (dimension ≤ ~20),
//! so the loops are written out plainly.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Pivots at or below this value are treated as a positive-definiteness failure.
pub const MIN_PIVOT: f64 = 1e-12;

/// Lower-triangular `L` with `L Lᵀ = a`.
pub fn cholesky(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::Shape(format!("cholesky needs a square matrix, got {n}x{m}")));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > MIN_PIVOT) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Ok(l)
}

/// Cholesky with one jittered retry: on failure, `jitter_rel · trace(a)/d · I`
/// is added to the diagonal. Returns the factor and the (possibly jittered)
/// matrix it factors.
pub fn cholesky_jittered(a: ArrayView2<'_, f64>, jitter_rel: f64) -> Result<(Array2<f64>, Array2<f64>)> {
    match cholesky(a) {
        Ok(l) => Ok((l, a.to_owned())),
        Err(Error::NotPositiveDefinite { .. }) => {
            let d = a.nrows();
            let trace: f64 = a.diag().sum();
            let bump = jitter_rel * trace / d as f64;
            if !(bump > 0.0) || !bump.is_finite() {
                return Err(Error::Numeric(format!(
                    "covariance is degenerate (trace {trace:e}); cannot jitter"
                )));
            }
            let mut jittered = a.to_owned();
            for i in 0..d {
                jittered[[i, i]] += bump;
            }
            let l = cholesky(jittered.view())?;
            Ok((l, jittered))
        }
        Err(e) => Err(e),
    }
}

/// Solve `L x = b` for lower-triangular `L`.
pub fn forward_substitute(l: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solve `Lᵀ x = b` for lower-triangular `L`.
pub fn backward_substitute_transposed(l: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solve the symmetric positive-definite system `a x = b`.
pub fn solve_spd(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    let l = cholesky(a)?;
    let y = forward_substitute(l.view(), b);
    Ok(backward_substitute_transposed(l.view(), y.view()))
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors as columns.
pub fn symmetric_eigen(a: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::Shape(format!("eigen-solve needs a square matrix, got {n}x{m}")));
    }
    let mut s = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    const MAX_SWEEPS: usize = 100;
    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += s[[p, q]] * s[[p, q]];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[[q, q]] - s[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let skp = s[[k, p]];
                    let skq = s[[k, q]];
                    s[[k, p]] = c * skp - sn * skq;
                    s[[k, q]] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let spk = s[[p, k]];
                    let sqk = s[[q, k]];
                    s[[p, k]] = c * spk - sn * sqk;
                    s[[q, k]] = sn * spk + c * sqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - sn * vkq;
                    v[[k, q]] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numeric("Jacobi eigen-solver did not converge".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[[j, j]].total_cmp(&s[[i, i]]));
    let values = Array1::from_iter(order.iter().map(|&i| s[[i, i]]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((values, vectors))
}

//! Small dense symmetric linear algebra for subset-indexed covariance
//! matrices (dimension 2^K − 1, so at most a few dozen at desk scale):
//! Cholesky factorization with a PSD repair path, cyclic Jacobi
//! eigendecomposition, an SPD solver, and compensated summation.
//!
//! Matrices are row-major `&[f64]` slices of length `dim * dim`. Nothing
//! here is tuned for large systems — clarity and exact reproducibility
//! (fixed operation order) win over speed.

use crate::error::{Error, Result};

/// Kahan–Babuška (Neumaier) compensated sum. Deterministic left-to-right
/// order; immune to the classic `1e16 + 1 − 1e16` cancellation.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated dot product `Σ aᵢ bᵢ` in fixed order.
pub fn kahan_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let p = x * y;
        let t = sum + p;
        if sum.abs() >= p.abs() {
            comp += (sum - t) + p;
        } else {
            comp += (p - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Frobenius norm of a row-major matrix (any shape).
pub fn frobenius(a: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in a {
        let p = x * x;
        let t = sum + p;
        if sum.abs() >= p {
            comp += (sum - t) + p;
        } else {
            comp += (p - t) + sum;
        }
        sum = t;
    }
    (sum + comp).sqrt()
}

/// Plain Cholesky `A = L Lᵀ` (L lower-triangular, row-major). Fails on any
/// non-positive pivot — no repair attempted.
pub fn cholesky(a: &[f64], dim: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), dim * dim);
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Matrix(format!(
                        "cholesky: non-positive pivot {s:.3e} at index {i}"
                    )));
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

/// Cholesky factor of a covariance matrix, repairing mild semidefiniteness.
///
/// Subset-indexed dispersion matrices are singular whenever two subsets
/// induce linearly dependent information densities, so an exact-PSD input
/// is the common case. Plain Cholesky is tried first; on failure the matrix
/// is eigendecomposed and eigenvalues are floored at `1e-12 · max(λ)`
/// before refactoring. A genuinely indefinite input (eigenvalue below
/// `−1e-9 · max|λ|`) is an error.
pub fn factor_covariance(a: &[f64], dim: usize) -> Result<Vec<f64>> {
    if let Ok(l) = cholesky(a, dim) {
        return Ok(l);
    }
    let (mut w, v) = jacobi_eigen(a, dim)?;
    let max_abs = w.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if max_abs == 0.0 {
        return Err(Error::Matrix("factor_covariance: zero matrix".into()));
    }
    if w.iter().any(|&x| x < -1e-9 * max_abs) {
        return Err(Error::Matrix(format!(
            "factor_covariance: matrix is indefinite (min eigenvalue {:.3e})",
            w.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    let floor = 1e-12 * max_abs;
    for x in &mut w {
        *x = x.max(floor);
    }
    let repaired = reassemble(&w, &v, dim);
    cholesky(&repaired, dim)
}

/// `V diag(w) Vᵀ` for eigenvectors stored as columns of `v`.
fn reassemble(w: &[f64], v: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = 0.0;
            for k in 0..dim {
                s += v[i * dim + k] * w[k] * v[j * dim + k];
            }
            out[i * dim + j] = s;
        }
    }
    out
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns `(w, v)` with eigenvalues `w` ascending and eigenvectors as the
/// columns of `v` (row-major), so `A = V diag(w) Vᵀ`.
pub fn jacobi_eigen(a: &[f64], dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    debug_assert_eq!(a.len(), dim * dim);
    for i in 0..dim {
        for j in 0..i {
            if (a[i * dim + j] - a[j * dim + i]).abs()
                > 1e-12 * (1.0 + a[i * dim + j].abs())
            {
                return Err(Error::Matrix(format!(
                    "jacobi_eigen: matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut m = a.to_vec();
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..dim)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * dim + j] * m[i * dim + j])
            .sum();
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * dim + p];
                let aqq = m[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                // stable tan of the rotation angle
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let mkp = m[k * dim + p];
                    let mkq = m[k * dim + q];
                    m[k * dim + p] = c * mkp - s * mkq;
                    m[k * dim + q] = s * mkp + c * mkq;
                }
                for k in 0..dim {
                    let mpk = m[p * dim + k];
                    let mqk = m[q * dim + k];
                    m[p * dim + k] = c * mpk - s * mqk;
                    m[q * dim + k] = s * mpk + c * mqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..dim).collect();
    let w_raw: Vec<f64> = (0..dim).map(|i| m[i * dim + i]).collect();
    order.sort_by(|&i, &j| w_raw[i].total_cmp(&w_raw[j]));
    let w: Vec<f64> = order.iter().map(|&i| w_raw[i]).collect();
    let mut v_sorted = vec![0.0; dim * dim];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..dim {
            v_sorted[row * dim + new_col] = v[row * dim + old_col];
        }
    }
    Ok((w, v_sorted))
}

/// Solve `A x = b` for symmetric positive-definite `A` via Cholesky.
pub fn solve_spd(a: &[f64], dim: usize, b: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(b.len(), dim);
    let l = factor_covariance(a, dim)?;
    // forward: L y = b
    let mut y = vec![0.0; dim];
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * dim + k] * y[k];
        }
        y[i] = s / l[i * dim + i];
    }
    // back: Lᵀ x = y
    let mut x = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut s = y[i];
        for k in (i + 1)..dim {
            s -= l[k * dim + i] * x[k];
        }
        x[i] = s / l[i * dim + i];
    }
    Ok(x)
}

/// Symmetric inverse square root `A^{−1/2} = V diag(w^{−1/2}) Vᵀ`.
/// Requires all eigenvalues strictly positive (relative tolerance 1e-12).
pub fn sym_inv_sqrt(a: &[f64], dim: usize) -> Result<Vec<f64>> {
    let (w, v) = jacobi_eigen(a, dim)?;
    let max = w.iter().cloned().fold(0.0f64, f64::max);
    if w.iter().any(|&x| x <= 1e-12 * max.max(1e-300)) {
        return Err(Error::Matrix(format!(
            "sym_inv_sqrt: matrix is singular (min eigenvalue {:.3e})",
            w.first().copied().unwrap_or(f64::NAN)
        )));
    }
    let inv_sqrt: Vec<f64> = w.iter().map(|&x| 1.0 / x.sqrt()).collect();
    Ok(reassemble(&inv_sqrt, &v, dim))
}

/// Row-major product of two `dim × dim` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

//! Symmetric eigenvalues by cyclic Jacobi rotations.
//!
//! Sized for the Gram matrices this crate produces (order ≤ 64); convergence
//! threshold 1e-12 relative to the Frobenius norm.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m: Vec<f64> = a.data().to_vec();
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off_tol = JACOBI_TOL * frob.max(1.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[p * n + q].abs());
            }
        }
        if off <= off_tol {
            let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
            eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Ok(eig);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= off_tol * 1e-3 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Classical Jacobi rotation annihilating (p, q).
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::InvalidParameter(format!(
        "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
    )))
}

/// Extremal singular values of a rectangular matrix, via eigenvalues of `AᵀA`.
pub fn extremal_singular_values(a: &DenseMatrix) -> Result<(f64, f64)> {
    if a.cols() == 0 {
        return Err(Error::DimensionMismatch(
            "singular values of an empty matrix".into(),
        ));
    }
    let eig = symmetric_eigenvalues(&a.gram())?;
    let lo = eig.first().copied().unwrap().max(0.0);
    let hi = eig.last().copied().unwrap().max(0.0);
    Ok((lo.sqrt(), hi.sqrt()))
}

//! The subspace-embedding verdict: a sketch `Π` preserves a subspace with
//! distortion `ε` exactly when every singular value of `ΠQ` lies in
//! `[1-ε, 1+ε]`, `Q` an orthonormal basis of the subspace.

use rayon::prelude::*;

use crate::eigen::extremal_singular_values;
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseColMatrix};
use crate::rng::SeedRng;

/// Default tolerance for the orthonormalization pivot test.
pub const ORTHO_TOL: f64 = 1e-10;

/// Extremal singular values of the sketched basis, and the implied distortion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionReport {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub eps_hat: f64,
}

impl DistortionReport {
    fn from_sigma(sigma_min: f64, sigma_max: f64) -> Self {
        let eps_hat = (1.0 - sigma_min).max(sigma_max - 1.0).max(0.0);
        DistortionReport {
            sigma_min,
            sigma_max,
            eps_hat,
        }
    }
}

/// Orthonormal basis of the column span of `a`, by modified Gram-Schmidt with
/// one re-orthogonalization pass.
pub fn orthonormal_basis(a: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let (n, d) = (a.rows(), a.cols());
    if n < d {
        return Err(Error::DimensionMismatch(format!(
            "need rows >= cols, got {n}x{d}"
        )));
    }
    // Column-major working copy.
    let mut q: Vec<Vec<f64>> = (0..d).map(|c| a.column(c)).collect();
    for j in 0..d {
        for _ in 0..2 {
            for i in 0..j {
                let proj: f64 = (0..n).map(|r| q[i][r] * q[j][r]).sum();
                for r in 0..n {
                    q[j][r] -= proj * q[i][r];
                }
            }
        }
        let norm: f64 = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < tol {
            return Err(Error::RankDeficient {
                col: j,
                pivot: norm,
                tol,
            });
        }
        q[j].iter_mut().for_each(|v| *v /= norm);
    }
    let mut out = DenseMatrix::zeros(n, d);
    for (c, col) in q.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            out.set(r, c, v);
        }
    }
    Ok(out)
}

/// Sparse-times-dense product `ΠA`; touches each stored entry of `Π` once.
pub fn sketch_apply(p: &SparseColMatrix, a: &DenseMatrix) -> Result<DenseMatrix> {
    if p.cols() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "sketch is {}x{} but subspace matrix has {} rows",
            p.rows(),
            p.cols(),
            a.rows()
        )));
    }
    let d = a.cols();
    let mut out = DenseMatrix::zeros(p.rows(), d);
    for j in 0..p.cols() {
        for &(r, v) in p.column(j) {
            for c in 0..d {
                let val = out.get(r, c) + v * a.get(j, c);
                out.set(r, c, val);
            }
        }
    }
    Ok(out)
}

fn check_orthonormal(q: &DenseMatrix, tol: f64) -> Result<()> {
    let g = q.gram();
    let mut worst = 0.0f64;
    for i in 0..q.cols() {
        for j in 0..q.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    if worst > tol {
        return Err(Error::NotOrthonormal(worst));
    }
    Ok(())
}

/// Distortion of `Π` on the subspace spanned by the orthonormal `q`.
pub fn distortion(p: &SparseColMatrix, q: &DenseMatrix) -> Result<DistortionReport> {
    check_orthonormal(q, 1e-8)?;
    let sketched = sketch_apply(p, q)?;
    let (lo, hi) = extremal_singular_values(&sketched)?;
    Ok(DistortionReport::from_sigma(lo, hi))
}

/// Whether `Π` is an `eps`-embedding for the span of `q`.
pub fn is_embedding(p: &SparseColMatrix, q: &DenseMatrix, eps: f64) -> Result<bool> {
    let rep = distortion(p, q)?;
    Ok(rep.sigma_min >= 1.0 - eps && rep.sigma_max <= 1.0 + eps)
}

/// Distortion of an arbitrary (not necessarily orthonormal) sketched matrix.
/// Used where the embedded matrix is an isometry by construction.
pub fn distortion_of(sketched: &DenseMatrix) -> Result<DistortionReport> {
    let (lo, hi) = extremal_singular_values(sketched)?;
    Ok(DistortionReport::from_sigma(lo, hi))
}

/// Monte-Carlo failure estimate with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailureEstimate {
    pub trials: u64,
    pub failures: u64,
    pub delta_hat: f64,
    pub ci: (f64, f64),
}

const Z95: f64 = 1.96;

/// 95% Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let radius = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // The endpoints are algebraically exact at the boundary counts.
    let lo = if failures == 0 {
        0.0
    } else {
        ((center - radius) / denom).max(0.0)
    };
    let hi = if failures == trials {
        1.0
    } else {
        ((center + radius) / denom).min(1.0)
    };
    (lo, hi)
}

/// Estimates the probability that a sampled sketch fails to embed a sampled
/// subspace. Trial `i` draws from the substream `(seed, i)`, so the estimate
/// is identical no matter how many worker threads evaluate it.
pub fn estimate_failure<S, Q>(
    sketch_sampler: S,
    subspace_sampler: Q,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<FailureEstimate>
where
    S: Fn(&mut SeedRng) -> SparseColMatrix + Sync,
    Q: Fn(&mut SeedRng) -> DenseMatrix + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let verdicts: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeedRng::substream(seed, i);
            let p = sketch_sampler(&mut rng);
            let q = subspace_sampler(&mut rng);
            is_embedding(&p, &q, eps)
        })
        .collect();
    let mut failures = 0u64;
    for v in verdicts {
        if !v? {
            failures += 1;
        }
    }
    let delta_hat = failures as f64 / trials as f64;
    Ok(FailureEstimate {
        trials,
        failures,
        delta_hat,
        ci: wilson_interval(failures, trials),
    })
}

//! Adversarial subspace distributions for stress-testing sparse sketches.
//!
//! An instance is a factored `U = VW`: `V` gathers `d·2^ell` random canonical
//! basis vectors of ℝⁿ and `W` recombines them into `d` sign-randomized
//! blocks of size `2^ell` (block weight `β = 2^{-ell}`). These distributions
//! concentrate the interesting behaviour of a sketch onto inner products of
//! its own columns.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseColMatrix};
use crate::rng::{derive_seed, SeedRng};

const TAG_INSTANCE: u64 = 0x11;

/// Parameters of one block distribution: `beta = 2^{-ell}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HardInstanceParams {
    pub n: usize,
    pub d: usize,
    pub ell: u32,
    pub seed: u64,
}

impl HardInstanceParams {
    pub fn new(n: usize, d: usize, ell: u32, seed: u64) -> Result<Self> {
        let params = HardInstanceParams { n, d, ell, seed };
        let cols = params.v_cols();
        if d < 1 || cols < 1 || n < cols {
            return Err(Error::InvalidParameter(format!(
                "need n >= d*2^ell >= 1, got n={n}, d={d}, ell={ell}"
            )));
        }
        Ok(params)
    }

    /// Number of columns of `V`, i.e. `d/beta = d·2^ell`.
    pub fn v_cols(&self) -> usize {
        self.d << self.ell
    }

    pub fn beta(&self) -> f64 {
        0.5f64.powi(self.ell as i32)
    }
}

/// A sampled instance in factored form: the canonical-basis choices of `V`
/// plus the Rademacher signs of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredInstance {
    pub params: HardInstanceParams,
    pub v_indices: Vec<usize>,
    pub sigma: Vec<i8>,
}

/// The `d·2^ell` i.i.d. uniform canonical-basis indices of `V`.
pub fn sample_v(params: &HardInstanceParams) -> Vec<usize> {
    let mut rng = SeedRng::new(params.seed);
    draw_v(params, &mut rng)
}

fn draw_v(params: &HardInstanceParams, rng: &mut SeedRng) -> Vec<usize> {
    (0..params.v_cols()).map(|_| rng.index(params.n)).collect()
}

fn draw_sigma(params: &HardInstanceParams, rng: &mut SeedRng) -> Vec<i8> {
    (0..params.v_cols())
        .map(|_| if rng.sign() > 0.0 { 1 } else { -1 })
        .collect()
}

/// The block recombination matrix: column `i` carries `sigma_j · sqrt(beta)`
/// on rows `i·2^ell .. (i+1)·2^ell` and zero elsewhere.
pub fn build_w(d: usize, ell: u32, sigma: &[i8]) -> Result<DenseMatrix> {
    let block = 1usize << ell;
    let rows = d * block;
    if sigma.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "sigma length {} != d*2^ell = {rows}",
            sigma.len()
        )));
    }
    let sqrt_beta = (1.0 / block as f64).sqrt();
    let mut w = DenseMatrix::zeros(rows, d);
    for i in 0..d {
        for j in i * block..(i + 1) * block {
            w.set(j, i, f64::from(sigma[j]) * sqrt_beta);
        }
    }
    Ok(w)
}

/// One draw from the block distribution with `beta = 2^{-ell}`.
pub fn sample_instance(params: &HardInstanceParams) -> FactoredInstance {
    let mut rng = SeedRng::new(params.seed);
    let v_indices = draw_v(params, &mut rng);
    let sigma = draw_sigma(params, &mut rng);
    FactoredInstance {
        params: *params,
        v_indices,
        sigma,
    }
}

/// Largest mixture level for a given `eps`: `L = floor(log2(1/eps)) - 3`,
/// computed without floating-point logarithms.
pub fn mixture_levels(eps: f64) -> i64 {
    assert!(eps > 0.0 && eps < 1.0);
    let mut k = 0i64;
    let mut pow = 2.0f64;
    while pow * eps <= 1.0 {
        pow *= 2.0;
        k += 1;
    }
    k - 3
}

/// One draw from the mixture: level 0 with probability 1/2, otherwise a level
/// uniform on `{1, ..., L}` with `L = floor(log2(1/eps)) - 3`.
pub fn sample_mixture(n: usize, d: usize, eps: f64, seed: u64) -> Result<FactoredInstance> {
    let levels = mixture_levels(eps);
    if levels < 1 {
        return Err(Error::EpsTooLarge(format!(
            "mixture needs floor(log2(1/eps)) - 3 >= 1, got {levels} for eps={eps}"
        )));
    }
    let mut rng = SeedRng::new(seed);
    let ell = if rng.sign() > 0.0 {
        0
    } else {
        1 + rng.index(levels as usize) as u32
    };
    let params = HardInstanceParams::new(n, d, ell, derive_seed(seed, TAG_INSTANCE, u64::from(ell)))?;
    Ok(sample_instance(&params))
}

impl FactoredInstance {
    /// Dense `V` (gathered canonical basis vectors).
    pub fn materialize_v(&self) -> DenseMatrix {
        let mut v = DenseMatrix::zeros(self.params.n, self.params.v_cols());
        for (c, &idx) in self.v_indices.iter().enumerate() {
            v.set(idx, c, 1.0);
        }
        v
    }

    pub fn w(&self) -> DenseMatrix {
        build_w(self.params.d, self.params.ell, &self.sigma).expect("sigma length fixed by params")
    }

    /// Dense `U = VW`, built directly from the factored form.
    pub fn materialize_u(&self) -> DenseMatrix {
        let block = 1usize << self.params.ell;
        let sqrt_beta = self.params.beta().sqrt();
        let mut u = DenseMatrix::zeros(self.params.n, self.params.d);
        for i in 0..self.params.d {
            for j in i * block..(i + 1) * block {
                let row = self.v_indices[j];
                let val = u.get(row, i) + f64::from(self.sigma[j]) * sqrt_beta;
                u.set(row, i, val);
            }
        }
        u
    }

    /// Plain-text form: `n d ell seed` header, then the index line, then the
    /// sign line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.params.n, self.params.d, self.params.ell, self.params.seed
        );
        let idx: Vec<String> = self.v_indices.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", idx.join(" "));
        let sg: Vec<&str> = self
            .sigma
            .iter()
            .map(|&x| if x > 0 { "+1" } else { "-1" })
            .collect();
        let _ = writeln!(s, "{}", sg.join(" "));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing instance header".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 4 {
            return Err(Error::Parse("instance header needs `n d ell seed`".into()));
        }
        let n: usize = head[0].parse().map_err(|_| Error::Parse("bad n".into()))?;
        let d: usize = head[1].parse().map_err(|_| Error::Parse("bad d".into()))?;
        let ell: u32 = head[2].parse().map_err(|_| Error::Parse("bad ell".into()))?;
        let seed: u64 = head[3].parse().map_err(|_| Error::Parse("bad seed".into()))?;
        let params = HardInstanceParams::new(n, d, ell, seed)?;
        let idx_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing index line".into()))?;
        let v_indices: Vec<usize> = idx_line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse("bad index".into())))
            .collect::<Result<_>>()?;
        let sigma_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing sign line".into()))?;
        let sigma: Vec<i8> = sigma_line
            .split_whitespace()
            .map(|t| match t {
                "+1" | "1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(Error::Parse(format!("bad sign {other:?}"))),
            })
            .collect::<Result<_>>()?;
        if v_indices.len() != params.v_cols() || sigma.len() != params.v_cols() {
            return Err(Error::Parse("index/sign line length mismatch".into()));
        }
        if let Some(&bad) = v_indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, cols: n });
        }
        Ok(FactoredInstance {
            params,
            v_indices,
            sigma,
        })
    }

    pub fn has_distinct_indices(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.v_indices.len());
        self.v_indices.iter().all(|&i| seen.insert(i))
    }
}

/// Whether `UᵀU = I` within `tol` in the max norm, computed from the factored
/// form: `G = β·Σ_p s_p s_pᵀ` over basis positions `p`, where `s_{i,p}` is the
/// signed multiplicity of picks of `p` inside block `i`.
///
/// Distinct `V` indices make `U` an isometry exactly. The converse is *not* a
/// theorem: coincident picks whose signs conspire (e.g. one aligned pair and
/// one cancelled pair inside the same block) also produce an exact isometry.
pub fn is_isometry(inst: &FactoredInstance, tol: f64) -> bool {
    let d = inst.params.d;
    let block = 1usize << inst.params.ell;
    let beta = inst.params.beta();
    let mut signed_sums: std::collections::HashMap<usize, Vec<(usize, f64)>> =
        std::collections::HashMap::new();
    for (j, (&pos, &sg)) in inst.v_indices.iter().zip(&inst.sigma).enumerate() {
        let blk = j / block;
        let entry = signed_sums.entry(pos).or_default();
        match entry.iter_mut().find(|(b, _)| *b == blk) {
            Some((_, s)) => *s += f64::from(sg),
            None => entry.push((blk, f64::from(sg))),
        }
    }
    let mut gram = DenseMatrix::zeros(d, d);
    for touched in signed_sums.values() {
        for &(bi, si) in touched {
            for &(bj, sj) in touched {
                gram.set(bi, bj, gram.get(bi, bj) + beta * si * sj);
            }
        }
    }
    gram.max_abs_diff(&DenseMatrix::identity(d)) <= tol
}

/// Rejection-samples until `is_isometry` holds; retry `r` draws from the seed
/// derived with index `r`.
pub fn sample_isometric(params: &HardInstanceParams, max_retries: usize) -> Result<FactoredInstance> {
    if max_retries < 1 {
        return Err(Error::InvalidParameter("max_retries must be >= 1".into()));
    }
    for retry in 0..max_retries {
        let attempt = if retry == 0 {
            sample_instance(params)
        } else {
            let p = HardInstanceParams {
                seed: derive_seed(params.seed, TAG_INSTANCE, retry as u64),
                ..*params
            };
            sample_instance(&p)
        };
        if is_isometry(&attempt, 1e-9) {
            return Ok(attempt);
        }
    }
    Err(Error::RetriesExhausted(max_retries))
}

/// Columns of `Π` gathered at the `V` indices: column `i` of the result is
/// `Π_{*, v_indices[i]}`, densified.
pub fn sketch_times_v(p: &SparseColMatrix, v_indices: &[usize]) -> Result<DenseMatrix> {
    let mut out = DenseMatrix::zeros(p.rows(), v_indices.len());
    for (c, &j) in v_indices.iter().enumerate() {
        if j >= p.cols() {
            return Err(Error::IndexOutOfRange {
                index: j,
                cols: p.cols(),
            });
        }
        for &(r, v) in p.column(j) {
            out.set(r, c, v);
        }
    }
    Ok(out)
}

/// Distortion report of `Π·U` computed in factored form (`ΠV` then `·W`).
pub fn factored_distortion(
    p: &SparseColMatrix,
    inst: &FactoredInstance,
) -> Result<crate::embedding::DistortionReport> {
    let pv = sketch_times_v(p, &inst.v_indices)?;
    let pu = pv.matmul(&inst.w())?;
    crate::embedding::distortion_of(&pu)
}

//! Sketch constructions: Count-Sketch, OSNAP, a dense Rademacher baseline and
//! the deterministic block-Hadamard counterexample.
//!
//! The random families are column-independent: column `j` is generated from
//! the substream `(seed, j)`, so a single column can be materialized without
//! building the whole matrix and both routes agree bitwise.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::SparseColMatrix;
use crate::rng::SeedRng;

/// The sketch families this crate constructs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SketchFamily {
    CountSketch,
    Osnap,
    DenseRademacher,
    HadamardBlock,
}

impl SketchFamily {
    pub fn name(self) -> &'static str {
        match self {
            SketchFamily::CountSketch => "count_sketch",
            SketchFamily::Osnap => "osnap",
            SketchFamily::DenseRademacher => "dense_rademacher",
            SketchFamily::HadamardBlock => "hadamard_block",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "count_sketch" => Ok(SketchFamily::CountSketch),
            "osnap" => Ok(SketchFamily::Osnap),
            "dense_rademacher" => Ok(SketchFamily::DenseRademacher),
            "hadamard_block" => Ok(SketchFamily::HadamardBlock),
            other => Err(Error::Parse(format!("unknown sketch family {other:?}"))),
        }
    }
}

/// Parameters pinning one concrete sketch draw.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchSpec {
    pub family: SketchFamily,
    pub m: usize,
    pub n: usize,
    /// Per-column nonzeros; 1 for Count-Sketch, `m` for the dense baseline,
    /// the block order for Hadamard.
    pub s: usize,
    /// Only meaningful for `hadamard_block`.
    pub eps: f64,
    /// Tile count of the Hadamard block diagonal; rows are `d_block^2 * b`.
    pub d_block: usize,
    pub seed: u64,
}

impl SketchSpec {
    pub fn count_sketch(m: usize, n: usize, seed: u64) -> Result<Self> {
        validate_mn(m, n)?;
        Ok(SketchSpec {
            family: SketchFamily::CountSketch,
            m,
            n,
            s: 1,
            eps: 0.0,
            d_block: 0,
            seed,
        })
    }

    pub fn osnap(m: usize, n: usize, s: usize, seed: u64) -> Result<Self> {
        validate_mn(m, n)?;
        if s < 1 || s > m {
            return Err(Error::InvalidParameter(format!(
                "osnap needs 1 <= s <= m, got s={s}, m={m}"
            )));
        }
        Ok(SketchSpec {
            family: SketchFamily::Osnap,
            m,
            n,
            s,
            eps: 0.0,
            d_block: 0,
            seed,
        })
    }

    pub fn dense_rademacher(m: usize, n: usize, seed: u64) -> Result<Self> {
        validate_mn(m, n)?;
        Ok(SketchSpec {
            family: SketchFamily::DenseRademacher,
            m,
            n,
            s: m,
            eps: 0.0,
            d_block: 0,
            seed,
        })
    }

    pub fn hadamard_block(eps: f64, n: usize, d_block: usize) -> Result<Self> {
        if !(eps > 0.0 && eps <= 0.125) {
            return Err(Error::EpsTooLarge(format!(
                "hadamard_block needs eps in (0, 1/8], got {eps}"
            )));
        }
        if d_block < 1 {
            return Err(Error::InvalidParameter("d_block must be >= 1".into()));
        }
        let b = hadamard_order(eps)?;
        if n == 0 || n % b != 0 {
            return Err(Error::InvalidParameter(format!(
                "n must be a positive multiple of the block order {b}, got {n}"
            )));
        }
        Ok(SketchSpec {
            family: SketchFamily::HadamardBlock,
            m: d_block * d_block * b,
            n,
            s: b,
            eps,
            d_block,
            seed: 0,
        })
    }

    /// Entries of column `j`, sorted by row.
    pub fn column(&self, j: usize) -> Vec<(usize, f64)> {
        debug_assert!(j < self.n);
        match self.family {
            SketchFamily::CountSketch => {
                let mut rng = SeedRng::substream(self.seed, j as u64);
                vec![(rng.index(self.m), rng.sign())]
            }
            SketchFamily::Osnap => {
                let mut rng = SeedRng::substream(self.seed, j as u64);
                let mut rows = sample_distinct(self.m, self.s, &mut rng);
                rows.sort_unstable();
                let scale = 1.0 / (self.s as f64).sqrt();
                rows.into_iter().map(|r| (r, rng.sign() * scale)).collect()
            }
            SketchFamily::DenseRademacher => {
                let mut rng = SeedRng::substream(self.seed, j as u64);
                let scale = 1.0 / (self.m as f64).sqrt();
                (0..self.m).map(|r| (r, rng.sign() * scale)).collect()
            }
            SketchFamily::HadamardBlock => {
                let b = self.s;
                let core = j % self.m;
                let block = core / b;
                let col_in_block = core % b;
                let scale = 1.0 / (b as f64).sqrt();
                (0..b)
                    .map(|r| {
                        let sign = if (r & col_in_block).count_ones() % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        (block * b + r, sign * scale)
                    })
                    .collect()
            }
        }
    }

    pub fn build(&self) -> SparseColMatrix {
        let columns = (0..self.n).map(|j| self.column(j)).collect();
        SparseColMatrix::new(self.m, columns).expect("constructed columns satisfy invariants")
    }

    /// `key=value` serialization, one key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "family={}", self.family.name());
        let _ = writeln!(out, "m={}", self.m);
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "s={}", self.s);
        let _ = writeln!(out, "eps={}", self.eps);
        let _ = writeln!(out, "d_block={}", self.d_block);
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let kv = crate::kv::parse_key_values(text)?;
        let family = SketchFamily::parse(kv.require("family")?)?;
        let n: usize = kv.parse_require("n")?;
        let seed: u64 = kv.parse_or("seed", 0)?;
        match family {
            SketchFamily::CountSketch => SketchSpec::count_sketch(kv.parse_require("m")?, n, seed),
            SketchFamily::Osnap => {
                SketchSpec::osnap(kv.parse_require("m")?, n, kv.parse_require("s")?, seed)
            }
            SketchFamily::DenseRademacher => {
                SketchSpec::dense_rademacher(kv.parse_require("m")?, n, seed)
            }
            SketchFamily::HadamardBlock => {
                SketchSpec::hadamard_block(kv.parse_require("eps")?, n, kv.parse_require("d_block")?)
            }
        }
    }
}

fn validate_mn(m: usize, n: usize) -> Result<()> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidParameter(format!(
            "need m >= 1 and n >= 1, got m={m}, n={n}"
        )));
    }
    Ok(())
}

/// Uniform `s`-subset of `[0, m)` by Floyd's algorithm.
fn sample_distinct(m: usize, s: usize, rng: &mut SeedRng) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(s);
    for i in (m - s)..m {
        let t = rng.index(i + 1);
        if chosen.contains(&t) {
            chosen.push(i);
        } else {
            chosen.push(t);
        }
    }
    chosen
}

/// One Count-Sketch draw: a single ±1 entry per column at a uniform row.
pub fn count_sketch(m: usize, n: usize, seed: u64) -> Result<SparseColMatrix> {
    Ok(SketchSpec::count_sketch(m, n, seed)?.build())
}

/// One OSNAP draw: `s` entries of ±1/√s per column at distinct uniform rows.
pub fn osnap(m: usize, n: usize, s: usize, seed: u64) -> Result<SparseColMatrix> {
    Ok(SketchSpec::osnap(m, n, s, seed)?.build())
}

/// Dense ±1/√m baseline, stored in the sparse container.
pub fn dense_rademacher(m: usize, n: usize, seed: u64) -> Result<SparseColMatrix> {
    Ok(SketchSpec::dense_rademacher(m, n, seed)?.build())
}

/// Deterministic block-Hadamard counterexample: an `m×m` block diagonal of
/// normalized Sylvester blocks (order `b` = largest power of two ≤ 1/(8·eps),
/// `m = d_block²·b`), tiled horizontally to `n` columns.
pub fn hadamard_block(eps: f64, n: usize, d_block: usize) -> Result<SparseColMatrix> {
    Ok(SketchSpec::hadamard_block(eps, n, d_block)?.build())
}

/// Largest power of two not exceeding `1/(8·eps)`; errors below order 2.
pub fn hadamard_order(eps: f64) -> Result<usize> {
    let cap = 1.0 / (8.0 * eps);
    if cap < 2.0 {
        return Err(Error::EpsTooLarge(format!(
            "1/(8*eps) = {cap} admits no Hadamard block of order >= 2"
        )));
    }
    let mut b = 1usize;
    while (2 * b) as f64 <= cap {
        b *= 2;
    }
    Ok(b)
}

/// Sylvester Hadamard matrix of order `b` (a power of two), as signs ±1.
pub fn sylvester_hadamard(b: usize) -> Result<Vec<Vec<i32>>> {
    if b == 0 || b & (b - 1) != 0 {
        return Err(Error::InvalidParameter(format!(
            "Hadamard order must be a power of two, got {b}"
        )));
    }
    Ok((0..b)
        .map(|r| {
            (0..b)
                .map(|c| if (r & c).count_ones() % 2 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect())
}

/// Maximum and per-column nonzero counts.
pub fn column_sparsity(p: &SparseColMatrix) -> (usize, Vec<usize>) {
    let per_column: Vec<usize> = (0..p.cols()).map(|c| p.column(c).len()).collect();
    (per_column.iter().copied().max().unwrap_or(0), per_column)
}

/// Whether the sketch respects the sparsity budget `s ≤ ⌊1/(9·eps)⌋`.
pub fn check_sparsity_budget(p: &SparseColMatrix, eps: f64) -> bool {
    assert!(eps > 0.0);
    let budget = (1.0 / (9.0 * eps)).floor() as usize;
    column_sparsity(p).0 <= budget
}

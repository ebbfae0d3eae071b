//! Dense and sparse matrix containers plus the plain-text interchange format.
//!
//! Dense matrices are row-major `f64`. Sparse matrices are column-major lists
//! of `(row, value)` pairs with strictly increasing rows inside each column;
//! that container holds every sketch produced by this crate.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::SeedRng;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Matrix with i.i.d. standard normal entries.
    pub fn gaussian(rows: usize, cols: usize, rng: &mut SeedRng) -> Self {
        let data = (0..rows * cols).map(|_| rng.gaussian()).collect();
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `AᵀA`.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut s = 0.0;
                for r in 0..self.rows {
                    s += self.get(r, i) * self.get(r, j);
                }
                g.set(i, j, s);
                g.set(j, i, s);
            }
        }
        g
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Text form: `rows cols` header, then row-major values one row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.rows, self.cols);
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let rows: usize = next_token(&mut tokens, "rows")?;
        let cols: usize = next_token(&mut tokens, "cols")?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(next_token::<f64>(&mut tokens, "value")?);
        }
        DenseMatrix::new(rows, cols, data)
    }
}

fn next_token<T: std::str::FromStr>(
    tokens: &mut std::str::SplitWhitespace<'_>,
    what: &str,
) -> Result<T> {
    let tok = tokens
        .next()
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {tok:?}")))
}

/// Column-major sparse matrix; each column is a `(row, value)` list with
/// strictly increasing row indices and nonzero finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseColMatrix {
    rows: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl SparseColMatrix {
    pub fn new(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (c, col) in columns.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(r, v) in col {
                if r >= rows {
                    return Err(Error::IndexOutOfRange {
                        index: r,
                        cols: rows,
                    });
                }
                if let Some(p) = prev {
                    if r <= p {
                        return Err(Error::InvalidParameter(format!(
                            "column {c}: rows not strictly increasing"
                        )));
                    }
                }
                if !v.is_finite() || v == 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "column {c}: entry must be finite and nonzero"
                    )));
                }
                prev = Some(r);
            }
        }
        Ok(SparseColMatrix { rows, columns })
    }

    pub fn identity(n: usize) -> Self {
        SparseColMatrix {
            rows: n,
            columns: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// All-zero matrix (every column empty).
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseColMatrix {
            rows,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn column(&self, c: usize) -> &[(usize, f64)] {
        &self.columns[c]
    }

    pub fn column_norm_sq(&self, c: usize) -> f64 {
        self.columns[c].iter().map(|&(_, v)| v * v).sum()
    }

    pub fn densify(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols());
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                out.set(r, c, v);
            }
        }
        out
    }

    /// Text form: `rows cols nnz` header, then one `row col value` triple per
    /// line, zero-based, column-major order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols(), self.nnz());
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                let _ = writeln!(s, "{r} {c} {v}");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let rows: usize = next_token(&mut tokens, "rows")?;
        let cols: usize = next_token(&mut tokens, "cols")?;
        let nnz: usize = next_token(&mut tokens, "nnz")?;
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
        for _ in 0..nnz {
            let r: usize = next_token(&mut tokens, "row")?;
            let c: usize = next_token(&mut tokens, "col")?;
            let v: f64 = next_token(&mut tokens, "value")?;
            if c >= cols {
                return Err(Error::IndexOutOfRange { index: c, cols });
            }
            columns[c].push((r, v));
        }
        for col in &mut columns {
            col.sort_by_key(|&(r, _)| r);
        }
        SparseColMatrix::new(rows, columns)
    }
}

/// Dot product of two sparse columns sorted by row.
pub fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

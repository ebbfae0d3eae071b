use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank deficient: pivot norm {pivot} below tolerance {tol} at column {col}")]
    RankDeficient { col: usize, pivot: f64, tol: f64 },
    #[error("matrix is not orthonormal: max |Q^T Q - I| = {0}")]
    NotOrthonormal(f64),
    #[error("eps too large: {0}")]
    EpsTooLarge(String),
    #[error("isometric rejection sampling exhausted {0} retries")]
    RetriesExhausted(usize),
    #[error("column index {index} out of range for {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },
    #[error("good-inner-product lemma violated: no level found for |S|={family}, kappa={kappa}")]
    LemmaViolated { family: usize, kappa: f64 },
    #[error("collision search found no level (greedy adversary)")]
    NoLevelFound,
    #[error("no column has squared norm within 1±eps")]
    NoValidColumns,
    #[error("no row has a collision level assigned")]
    NoClassifiedRows,
    #[error("no bracketing pair (m_lo failing, m_hi passing) in [{lo}, {hi}]")]
    NoBracket { lo: usize, hi: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

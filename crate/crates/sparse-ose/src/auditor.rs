//! The audit pipeline: given a concrete sketch `Π`, fix a value scale θ from
//! its entry distribution, classify rows by the collision level of their
//! heavy columns, fix a global level, then sample heavy entries and hunt for
//! a pair of columns with a large inner product. A found pair certifies (via
//! the anticoncentration test) that `Π` fails on a matching hard instance.
//!
//! Squared-norm convention throughout: a column is *valid* when
//! `‖Π_{*,j}‖² ∈ [1-ε, 1+ε]`.

use std::collections::BTreeMap;
use std::fmt;

use crate::collision::{find_collision_level, VectorFamily};
use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::hard_instance::{build_w, mixture_levels};
use crate::matrix::{sparse_dot, DenseMatrix, SparseColMatrix};
use crate::rng::SeedRng;

/// Per-row classification record.
#[derive(Clone, Debug, PartialEq)]
pub struct RowRecord {
    /// Valid columns with `|Π_{k,j}|² ≥ θ` at this row, ascending.
    pub s_k_theta: Vec<usize>,
    /// The majority sign side of `s_k_theta` (ties go positive).
    pub s_plus: Vec<usize>,
    pub sign_side: i8,
    /// Collision level of the row's zeroed-column family; absent when the
    /// family has fewer than two members.
    pub ell_k: Option<u32>,
}

/// The fixed parameters extracted from a sketch before the column hunt.
#[derive(Clone, Debug)]
pub struct AuditProfile {
    pub eps: f64,
    pub theta: f64,
    /// `(bucket left endpoint 2^i·eps, conditional expected mass)` per bucket.
    pub bucket_masses: Vec<(f64, f64)>,
    pub rows: Vec<RowRecord>,
    pub ell_theta: u32,
    /// Rows whose collision level equals `ell_theta`.
    pub s_ell_theta: Vec<usize>,
    /// Good columns per row (nonempty only on `s_ell_theta` rows), ascending.
    pub good_cols_by_row: Vec<Vec<usize>>,
    /// Good rows per column, ascending.
    pub good_rows_by_column: Vec<Vec<usize>>,
    pub good_entry_count: usize,
    pub s_prime_max: usize,
}

impl AuditProfile {
    pub fn is_good(&self, row: usize, col: usize) -> bool {
        self.good_rows_by_column[col].binary_search(&row).is_ok()
    }

    /// Inner-product threshold of the column hunt, `2^{ell_theta}·theta`.
    pub fn pair_threshold(&self) -> f64 {
        2f64.powi(self.ell_theta as i32) * self.theta
    }
}

/// Verdict of one attack run.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// An unexamined good column collided with an examined one; the inner
    /// product of columns `examined` and `unexamined` meets the threshold.
    PairFound {
        examined: usize,
        unexamined: usize,
        inner: f64,
    },
    /// A sampled good column repeated one already absorbed into `S′`.
    CollisionFound { column: usize },
    Inconclusive,
}

/// Transcript events, line-serializable for replay and re-verification.
#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Theta { theta: f64 },
    Ell { ell: u32, rows: usize, good_entries: usize, s_prime_max: usize },
    Sizing { ell_prime: u32, d_prime: usize },
    Sample { step: usize, column: usize, s_prime: usize, accepted: Option<usize> },
    Collision { step: usize, column: usize },
    Grow { step: usize, column: usize, row: usize, added: Vec<usize> },
    Pair { examined: usize, unexamined: usize, inner: f64 },
    Note(String),
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Theta { theta } => write!(f, "theta: {theta}"),
            Event::Ell { ell, rows, good_entries, s_prime_max } => write!(
                f,
                "ell_theta: {ell} ({rows} rows, {good_entries} good entries, s'_max {s_prime_max})"
            ),
            Event::Sizing { ell_prime, d_prime } => {
                write!(f, "sizing: ell' {ell_prime}, d' {d_prime}")
            }
            Event::Sample { step, column, s_prime, accepted } => match accepted {
                Some(row) => {
                    write!(f, "step {step}: column {column} s'={s_prime} accepted row {row}")
                }
                None => write!(f, "step {step}: column {column} s'={s_prime} discarded"),
            },
            Event::Collision { step, column } => {
                write!(f, "step {step}: column {column} already collected; collision")
            }
            Event::Grow { step, column, row, added } => {
                let shown: Vec<String> = added.iter().take(8).map(|c| c.to_string()).collect();
                let tail = if added.len() > 8 { ", …" } else { "" };
                write!(
                    f,
                    "step {step}: column {column} row {row}; S' += {} {{{}{tail}}}",
                    added.len(),
                    shown.join(", ")
                )
            }
            Event::Pair { examined, unexamined, inner } => {
                write!(f, "pair: examined {examined}, unexamined {unexamined}, inner {inner}")
            }
            Event::Note(s) => write!(f, "note: {s}"),
        }
    }
}

/// Outcome of the full attack, transcript included.
#[derive(Clone, Debug)]
pub struct AttackOutcome {
    pub verdict: Verdict,
    pub collected_set_size: usize,
    pub good_column_count: usize,
    pub transcript: Vec<Event>,
}

impl AttackOutcome {
    pub fn transcript_text(&self) -> String {
        let mut s = String::new();
        for e in &self.transcript {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }

    fn inconclusive(reason: &str, transcript: Vec<Event>) -> AttackOutcome {
        let mut transcript = transcript;
        transcript.push(Event::Note(reason.to_string()));
        AttackOutcome {
            verdict: Verdict::Inconclusive,
            collected_set_size: 0,
            good_column_count: 0,
            transcript,
        }
    }
}

/// Attack knobs. `gamma` shifts the instance-size exponent in the `d′`
/// sizing rule; the subset adversary goes greedy above `adversary_cutoff`.
#[derive(Clone, Copy, Debug)]
pub struct AttackConfig {
    pub gamma: f64,
    pub adversary_cutoff: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            gamma: 0.0,
            adversary_cutoff: 12,
        }
    }
}

fn valid_columns(p: &SparseColMatrix, eps: f64) -> Vec<bool> {
    (0..p.cols())
        .map(|c| {
            let nsq = p.column_norm_sq(c);
            nsq >= 1.0 - eps && nsq <= 1.0 + eps
        })
        .collect()
}

/// Fraction of columns with squared norm in `[1-eps, 1+eps]`.
pub fn column_norm_fraction(p: &SparseColMatrix, eps: f64) -> f64 {
    if p.cols() == 0 {
        return 0.0;
    }
    let valid = valid_columns(p, eps);
    valid.iter().filter(|&&v| v).count() as f64 / p.cols() as f64
}

/// Picks the dyadic bucket `[2^i·eps, 2^{i+1}·eps)` with the largest
/// conditional expected squared-entry mass over valid columns, and returns
/// `theta = 2^i·eps` with all bucket masses.
pub fn select_theta(p: &SparseColMatrix, eps: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let valid = valid_columns(p, eps);
    let valid_count = valid.iter().filter(|&&v| v).count();
    if valid_count == 0 {
        return Err(Error::NoValidColumns);
    }
    // Buckets 0..=I with 2^I >= 10/(9 eps) cover every entry of a valid column.
    let cap = 10.0 / (9.0 * eps);
    let mut top = 0usize;
    let mut pow = 1.0f64;
    while pow < cap {
        pow *= 2.0;
        top += 1;
    }
    let mut masses = vec![0.0f64; top + 1];
    for (j, &ok) in valid.iter().enumerate() {
        if !ok {
            continue;
        }
        for &(_, v) in p.column(j) {
            let x = v * v;
            if x < eps {
                continue;
            }
            let mut i = 0usize;
            let mut left = eps;
            while i < top && x >= 2.0 * left {
                left *= 2.0;
                i += 1;
            }
            masses[i] += x;
        }
    }
    for m in &mut masses {
        *m /= valid_count as f64;
    }
    let mut best = 0usize;
    for i in 1..masses.len() {
        if masses[i] > masses[best] {
            best = i;
        }
    }
    let theta = 2f64.powi(best as i32) * eps;
    let buckets = masses
        .iter()
        .enumerate()
        .map(|(i, &m)| (2f64.powi(i as i32) * eps, m))
        .collect();
    Ok((theta, buckets))
}

/// Classifies every row: its heavy valid columns, the majority sign side,
/// and the collision level of the zeroed-column family (kappa = theta/2).
pub fn classify_rows(
    p: &SparseColMatrix,
    theta: f64,
    eps: f64,
    adversary_cutoff: usize,
) -> Vec<RowRecord> {
    let valid = valid_columns(p, eps);
    let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.rows()];
    for (j, &ok) in valid.iter().enumerate() {
        if !ok {
            continue;
        }
        for &(k, v) in p.column(j) {
            if v * v >= theta {
                per_row[k].push((j, v));
            }
        }
    }
    let kappa = (theta / 2.0).min(0.5);
    per_row
        .iter()
        .enumerate()
        .map(|(k, entries)| {
            let s_k_theta: Vec<usize> = entries.iter().map(|&(j, _)| j).collect();
            let positive = entries.iter().filter(|&&(_, v)| v > 0.0).count();
            let sign_side: i8 = if 2 * positive >= entries.len() { 1 } else { -1 };
            let s_plus: Vec<usize> = entries
                .iter()
                .filter(|&&(_, v)| (v > 0.0) == (sign_side > 0))
                .map(|&(j, _)| j)
                .collect();
            let ell_k = if s_plus.len() >= 2 {
                let vectors: Vec<Vec<f64>> = s_plus
                    .iter()
                    .map(|&j| {
                        let mut col = vec![0.0; p.rows()];
                        for &(r, v) in p.column(j) {
                            if r != k {
                                col[r] = v;
                            }
                        }
                        col
                    })
                    .collect();
                VectorFamily::new(p.rows(), vectors)
                    .ok()
                    .and_then(|fam| find_collision_level(&fam, kappa, adversary_cutoff).ok())
                    .map(|cert| cert.ell)
            } else {
                None
            };
            RowRecord {
                s_k_theta,
                s_plus,
                sign_side,
                ell_k,
            }
        })
        .collect()
}

/// Result of fixing the global level.
pub struct LevelSelection {
    pub ell_theta: u32,
    pub s_ell_theta: Vec<usize>,
    pub good_cols_by_row: Vec<Vec<usize>>,
    pub good_rows_by_column: Vec<Vec<usize>>,
    pub good_entry_count: usize,
    pub s_prime_max: usize,
}

/// Fixes `ell_theta` as the level maximizing the conditional expected number
/// of good rows per valid column, and collects the good-entry set.
pub fn select_ell(p: &SparseColMatrix, _eps: f64, rows: &[RowRecord]) -> Result<LevelSelection> {
    // Level mass per column is supported on s_plus members, which are valid
    // columns by construction; the conditional expectation over valid columns
    // shares its denominator across levels, so the raw mass argmax suffices.
    let mut level_mass: BTreeMap<u32, usize> = BTreeMap::new();
    for rec in rows {
        if let Some(l) = rec.ell_k {
            *level_mass.entry(l).or_insert(0) += rec.s_plus.len();
        }
    }
    if level_mass.is_empty() {
        return Err(Error::NoClassifiedRows);
    }
    // Ascending key iteration plus strict improvement gives the smallest
    // maximizing level.
    let mut ell_theta = 0u32;
    let mut best = 0usize;
    let mut first = true;
    for (&l, &mass) in &level_mass {
        if first || mass > best {
            ell_theta = l;
            best = mass;
            first = false;
        }
    }

    let mut s_ell_theta = Vec::new();
    let mut good_cols_by_row: Vec<Vec<usize>> = vec![Vec::new(); rows.len()];
    let mut good_rows_by_column: Vec<Vec<usize>> = vec![Vec::new(); p.cols()];
    let mut good_entry_count = 0usize;
    for (k, rec) in rows.iter().enumerate() {
        if rec.ell_k == Some(ell_theta) {
            s_ell_theta.push(k);
            good_cols_by_row[k] = rec.s_plus.clone();
            good_entry_count += rec.s_plus.len();
            for &j in &rec.s_plus {
                good_rows_by_column[j].push(k);
            }
        }
    }
    let s_prime_max = good_rows_by_column.iter().map(Vec::len).max().unwrap_or(0);
    Ok(LevelSelection {
        ell_theta,
        s_ell_theta,
        good_cols_by_row,
        good_rows_by_column,
        good_entry_count,
        s_prime_max,
    })
}

/// Runs theta selection, row classification and level selection.
pub fn build_profile(
    p: &SparseColMatrix,
    eps: f64,
    config: &AttackConfig,
) -> Result<AuditProfile> {
    let (theta, bucket_masses) = select_theta(p, eps)?;
    let rows = classify_rows(p, theta, eps, config.adversary_cutoff);
    let sel = select_ell(p, eps, &rows)?;
    Ok(AuditProfile {
        eps,
        theta,
        bucket_masses,
        rows,
        ell_theta: sel.ell_theta,
        s_ell_theta: sel.s_ell_theta,
        good_cols_by_row: sel.good_cols_by_row,
        good_rows_by_column: sel.good_rows_by_column,
        good_entry_count: sel.good_entry_count,
        s_prime_max: sel.s_prime_max,
    })
}

/// One accepted `(row, column)` draw plus the sampling trace.
pub struct GoodColumnSample {
    pub pairs: Vec<(usize, usize)>,
    pub steps: Vec<Event>,
}

/// Draws `d_prime` i.i.d. columns; a column with `s′` good rows survives with
/// probability `s′/s′_max` and then reports a uniform good row, making each
/// accepted pair uniform over the good-entry set.
pub fn sample_good_columns(
    p: &SparseColMatrix,
    profile: &AuditProfile,
    d_prime: usize,
    seed: u64,
) -> GoodColumnSample {
    let mut rng = SeedRng::new(seed);
    let mut pairs = Vec::new();
    let mut steps = Vec::new();
    for step in 0..d_prime {
        let column = rng.index(p.cols());
        let alpha = rng.unit();
        let s_prime = profile.good_rows_by_column[column].len();
        let ratio = if profile.s_prime_max == 0 {
            0.0
        } else {
            s_prime as f64 / profile.s_prime_max as f64
        };
        let accepted = if alpha < ratio {
            let row = profile.good_rows_by_column[column][rng.index(s_prime)];
            pairs.push((row, column));
            Some(row)
        } else {
            None
        };
        steps.push(Event::Sample {
            step,
            column,
            s_prime,
            accepted,
        });
    }
    GoodColumnSample { pairs, steps }
}

/// Witness for a collected column: the examined column that pulled it into
/// `S′` and their inner product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub examined: usize,
    pub inner: f64,
}

/// State after the first-half walk.
pub struct CollectState {
    pub collision: Option<(usize, usize)>, // (step, column)
    pub collected: BTreeMap<usize, Witness>,
    pub events: Vec<Event>,
}

/// Walks the first half of the good pairs: a repeat of a collected column is
/// an immediate collision; otherwise `S′` absorbs every good column of the
/// step's row whose inner product with the examined column meets
/// `2^{ell_theta}·theta`.
pub fn collect_columns(
    p: &SparseColMatrix,
    profile: &AuditProfile,
    first_half: &[(usize, usize)],
) -> CollectState {
    let threshold = profile.pair_threshold();
    let mut collected: BTreeMap<usize, Witness> = BTreeMap::new();
    let mut events = Vec::new();
    for (step, &(row, column)) in first_half.iter().enumerate() {
        if collected.contains_key(&column) {
            events.push(Event::Collision { step, column });
            return CollectState {
                collision: Some((step, column)),
                collected,
                events,
            };
        }
        let mut added = Vec::new();
        for &cand in &profile.good_cols_by_row[row] {
            let inner = sparse_dot(p.column(column), p.column(cand));
            if inner >= threshold && !collected.contains_key(&cand) {
                collected.insert(
                    cand,
                    Witness {
                        examined: column,
                        inner,
                    },
                );
                added.push(cand);
            }
        }
        events.push(Event::Grow {
            step,
            column,
            row,
            added,
        });
    }
    CollectState {
        collision: None,
        collected,
        events,
    }
}

/// Scans the unexamined half for the first good column already in `S′`.
pub fn scan_second_half(
    collected: &BTreeMap<usize, Witness>,
    second_half: &[(usize, usize)],
) -> Option<(usize, usize, f64)> {
    for &(_, column) in second_half {
        if let Some(w) = collected.get(&column) {
            return Some((w.examined, column, w.inner));
        }
    }
    None
}

/// The full attack: parameter fixing, entry sampling sized by the level
/// formula, the first-half collection walk, then the second-half scan.
pub fn attack(
    p: &SparseColMatrix,
    eps: f64,
    d: usize,
    seed: u64,
    config: &AttackConfig,
) -> Result<AttackOutcome> {
    if p.cols() == 0 || p.nnz() == 0 {
        return Err(Error::InvalidParameter("attack needs a nonzero sketch".into()));
    }
    if !(0.0..0.5).contains(&config.gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, 1/2), got {}",
            config.gamma
        )));
    }
    let mut transcript = Vec::new();
    let profile = match build_profile(p, eps, config) {
        Ok(pr) => pr,
        Err(Error::NoValidColumns) => {
            return Ok(AttackOutcome::inconclusive(
                "no valid columns; nothing to audit",
                transcript,
            ))
        }
        Err(Error::NoClassifiedRows) => {
            return Ok(AttackOutcome::inconclusive(
                "no row classified at any level; nothing to audit",
                transcript,
            ))
        }
        Err(e) => return Err(e),
    };
    transcript.push(Event::Theta { theta: profile.theta });
    transcript.push(Event::Ell {
        ell: profile.ell_theta,
        rows: profile.s_ell_theta.len(),
        good_entries: profile.good_entry_count,
        s_prime_max: profile.s_prime_max,
    });
    if profile.good_entry_count == 0 {
        return Ok(AttackOutcome::inconclusive("good-entry set is empty", transcript));
    }

    // d' = 2^{ell'} d with ell' = clamp(round(log2(theta 2^{ell_theta} / eps^{1-gamma})), 0, L),
    // then capped so the drawn column count stays below n/4.
    let levels = mixture_levels(eps).max(0) as u32;
    let raw = (profile.theta * 2f64.powi(profile.ell_theta as i32)
        / eps.powf(1.0 - config.gamma))
    .log2()
    .round();
    let ell_prime = raw.clamp(0.0, f64::from(levels)) as u32;
    let d_prime = ((1usize << ell_prime) * d).min((p.cols() / 4).max(1));
    transcript.push(Event::Sizing { ell_prime, d_prime });

    let sample = sample_good_columns(p, &profile, d_prime, seed);
    transcript.extend(sample.steps);
    let g = sample.pairs.len();
    let split = g.div_ceil(2);
    let (first_half, second_half) = sample.pairs.split_at(split);

    let collect = collect_columns(p, &profile, first_half);
    transcript.extend(collect.events.clone());
    if let Some((_, column)) = collect.collision {
        return Ok(AttackOutcome {
            verdict: Verdict::CollisionFound { column },
            collected_set_size: collect.collected.len(),
            good_column_count: g,
            transcript,
        });
    }
    if let Some((examined, unexamined, inner)) = scan_second_half(&collect.collected, second_half) {
        transcript.push(Event::Pair {
            examined,
            unexamined,
            inner,
        });
        return Ok(AttackOutcome {
            verdict: Verdict::PairFound {
                examined,
                unexamined,
                inner,
            },
            collected_set_size: collect.collected.len(),
            good_column_count: g,
            transcript,
        });
    }
    Ok(AttackOutcome {
        verdict: Verdict::Inconclusive,
        collected_set_size: collect.collected.len(),
        good_column_count: g,
        transcript,
    })
}

/// Empirical probability, over fresh sign draws of `W` (block level `ell`),
/// that some singular value of `A·W` leaves `[1-eps, 1+eps]`.
pub fn anticoncentration(
    a: &DenseMatrix,
    eps: f64,
    ell: u32,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let block = 1usize << ell;
    if a.cols() == 0 || a.cols() % block != 0 {
        return Err(Error::DimensionMismatch(format!(
            "matrix with {} columns cannot split into blocks of {block}",
            a.cols()
        )));
    }
    let d = a.cols() / block;
    let gram0 = a.gram();
    let mut violations = 0u64;
    for t in 0..trials {
        let mut rng = SeedRng::substream(seed, t);
        let sigma: Vec<i8> = (0..a.cols())
            .map(|_| if rng.sign() > 0.0 { 1 } else { -1 })
            .collect();
        let w = build_w(d, ell, &sigma)?;
        let sandwich = w.transpose().matmul(&gram0.matmul(&w)?)?;
        let eig = symmetric_eigenvalues(&sandwich)?;
        let sigma_min = eig.first().copied().unwrap().max(0.0).sqrt();
        let sigma_max = eig.last().copied().unwrap().max(0.0).sqrt();
        if sigma_min < 1.0 - eps || sigma_max > 1.0 + eps {
            violations += 1;
        }
    }
    Ok(violations as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketches;

    const CHI2_999_39: f64 = 72.054663; // chi-square 0.999 quantile, 39 dof

    #[test]
    fn column_norm_fraction_cases() {
        let eps = 0.1;
        assert_eq!(column_norm_fraction(&SparseColMatrix::identity(5), eps), 1.0);
        assert_eq!(column_norm_fraction(&SparseColMatrix::zero(4, 4), eps), 0.0);
        let cs = sketches::count_sketch(8, 64, 3).unwrap();
        assert_eq!(column_norm_fraction(&cs, eps), 1.0);
    }

    #[test]
    fn select_theta_count_sketch_all_mass_at_one() {
        let eps = 1.0 / 16.0;
        let cs = sketches::count_sketch(16, 256, 1).unwrap();
        let (theta, buckets) = select_theta(&cs, eps).unwrap();
        // Squared entries are exactly 1, landing in the bucket with left
        // endpoint 2^4 * (1/16) = 1.
        assert_eq!(theta, 1.0);
        for (left, mass) in buckets {
            if left == 1.0 {
                assert!((mass - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(mass, 0.0);
            }
        }
    }

    #[test]
    fn select_theta_osnap_dyadic_alignment() {
        let eps = 1.0 / 64.0;
        let p = sketches::osnap(32, 512, 4, 7).unwrap();
        let (theta, _) = select_theta(&p, eps).unwrap();
        // Entries ±1/2 have squared value 1/4 = 2^4 * (1/64).
        assert_eq!(theta, 0.25);
    }

    #[test]
    fn select_theta_identity() {
        let (theta, buckets) = select_theta(&SparseColMatrix::identity(6), 0.1).unwrap();
        assert!((theta - 0.8).abs() < 1e-12);
        let winning = buckets.iter().find(|&&(l, _)| (l - 0.8).abs() < 1e-12).unwrap();
        assert!((winning.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn select_theta_requires_valid_columns() {
        let two = SparseColMatrix::new(2, vec![vec![(0, 2.0)], vec![(1, 2.0)]]).unwrap();
        assert!(matches!(select_theta(&two, 0.1), Err(Error::NoValidColumns)));
    }

    #[test]
    fn classify_rows_count_sketch_majority_side() {
        let eps = 1.0 / 16.0;
        let cs = sketches::count_sketch(8, 128, 5).unwrap();
        let (theta, _) = select_theta(&cs, eps).unwrap();
        let rows = classify_rows(&cs, theta, eps, 12);
        for (k, rec) in rows.iter().enumerate() {
            // S_{k,theta} is exactly the set of columns hashed to row k.
            let expect: Vec<usize> = (0..cs.cols())
                .filter(|&j| cs.column(j)[0].0 == k)
                .collect();
            assert_eq!(rec.s_k_theta, expect);
            assert!(2 * rec.s_plus.len() >= rec.s_k_theta.len());
            for &j in &rec.s_plus {
                let v = cs.column(j)[0].1;
                assert_eq!(v > 0.0, rec.sign_side > 0);
            }
            if rec.s_plus.len() >= 2 {
                // Zeroed count-sketch columns vanish, so level 0 is forced.
                assert_eq!(rec.ell_k, Some(0));
            } else {
                assert_eq!(rec.ell_k, None);
            }
        }
    }

    #[test]
    fn classify_rows_hadamard_levels_verify_exhaustively() {
        // Single block of order 4, two tiles: families stay within the
        // exhaustive adversary cutoff.
        let eps = 1.0 / 32.0;
        let p = sketches::hadamard_block(eps, 8, 1).unwrap();
        let (theta, _) = select_theta(&p, eps).unwrap();
        assert_eq!(theta, 0.25);
        let rows = classify_rows(&p, theta, eps, 12);
        let kappa = theta / 2.0;
        for (k, rec) in rows.iter().enumerate() {
            let Some(ell) = rec.ell_k else { continue };
            let vectors: Vec<Vec<f64>> = rec
                .s_plus
                .iter()
                .map(|&j| {
                    let mut col = vec![0.0; p.rows()];
                    for &(r, v) in p.column(j) {
                        if r != k {
                            col[r] = v;
                        }
                    }
                    col
                })
                .collect();
            let fam = VectorFamily::new(p.rows(), vectors).unwrap();
            assert!(crate::collision::verify_collision_level(
                &fam,
                kappa,
                ell,
                crate::collision::AdversaryMode::Exhaustive
            )
            .unwrap());
        }
    }

    #[test]
    fn select_ell_prefers_heavier_level() {
        let rows = vec![
            RowRecord {
                s_k_theta: vec![0, 1, 2],
                s_plus: vec![0, 1, 2],
                sign_side: 1,
                ell_k: Some(1),
            },
            RowRecord {
                s_k_theta: vec![3],
                s_plus: vec![3],
                sign_side: 1,
                ell_k: Some(2),
            },
        ];
        let p = SparseColMatrix::identity(4);
        let sel = select_ell(&p, 0.5, &rows).unwrap();
        assert_eq!(sel.ell_theta, 1);
        assert_eq!(sel.good_entry_count, 3);

        let all_same = vec![
            RowRecord {
                s_k_theta: vec![0, 1],
                s_plus: vec![0, 1],
                sign_side: 1,
                ell_k: Some(0),
            };
            3
        ];
        let sel = select_ell(&p, 0.5, &all_same).unwrap();
        assert_eq!(sel.ell_theta, 0);
        assert_eq!(sel.good_entry_count, 6);
    }

    #[test]
    fn select_ell_requires_classified_rows() {
        let rows = vec![RowRecord {
            s_k_theta: vec![],
            s_plus: vec![],
            sign_side: 1,
            ell_k: None,
        }];
        assert!(matches!(
            select_ell(&SparseColMatrix::identity(2), 0.5, &rows),
            Err(Error::NoClassifiedRows)
        ));
    }

    #[test]
    fn count_sketch_good_entries_cover_quarter_of_columns() {
        let eps = 1.0 / 16.0;
        let (m, n) = (64usize, 4096usize);
        let p = sketches::count_sketch(m, n, 9).unwrap();
        let profile = build_profile(&p, eps, &AttackConfig::default()).unwrap();
        assert_eq!(profile.theta, 1.0);
        assert_eq!(profile.ell_theta, 0);
        assert!(
            profile.good_entry_count >= n / 4,
            "good entries {} < n/4",
            profile.good_entry_count
        );
        // Good entries are heavy, and heavy same-side products clear theta.
        for (j, rows) in profile.good_rows_by_column.iter().enumerate() {
            for &k in rows {
                let v = p
                    .column(j)
                    .iter()
                    .find(|&&(r, _)| r == k)
                    .map(|&(_, v)| v)
                    .unwrap();
                assert!(v * v >= profile.theta);
            }
        }
        for &k in &profile.s_ell_theta {
            let cols = &profile.good_cols_by_row[k];
            for (a, &ja) in cols.iter().enumerate() {
                for &jb in &cols[a..] {
                    let va = p.column(ja).iter().find(|&&(r, _)| r == k).unwrap().1;
                    let vb = p.column(jb).iter().find(|&&(r, _)| r == k).unwrap().1;
                    assert!(va * vb >= profile.theta - 1e-12);
                }
            }
        }
    }

    /// Hand-built sketch with unequal per-column good counts: 20 columns with
    /// one heavy entry (plus light padding) and 10 with two heavy entries.
    fn two_tier_sketch() -> SparseColMatrix {
        let h = 0.5f64.sqrt();
        let quarter = 0.25;
        let mut columns = Vec::new();
        // Singles: heavy at rows 0..9 (two singles share each row), padding
        // of eight 1/4-entries at rows 100..107 (squared 1/16 < theta).
        for t in 0..20 {
            let mut col = vec![(t / 2, h)];
            col.extend((100..108).map(|r| (r, quarter)));
            columns.push(col);
        }
        // Doubles: both heavy entries at rows 10..19, wrapping pairs.
        for t in 0..10 {
            let a = 10 + t;
            let b = 10 + (t + 1) % 10;
            let (lo, hi) = (a.min(b), a.max(b));
            columns.push(vec![(lo, h), (hi, h)]);
        }
        // Valid-norm columns with every squared entry below theta: zero good
        // rows, so the sampler must always discard them.
        for t in 0..5 {
            columns.push((0..4).map(|r| (60 + 4 * t + r, 0.5)).collect());
        }
        SparseColMatrix::new(108, columns).unwrap()
    }

    #[test]
    fn sample_good_columns_uniform_over_entries() {
        let eps = 1.0 / 16.0;
        let p = two_tier_sketch();
        let profile = build_profile(&p, eps, &AttackConfig::default()).unwrap();
        assert_eq!(profile.theta, 0.5);
        assert_eq!(profile.good_entry_count, 40);
        assert_eq!(profile.s_prime_max, 2);

        let draws = 100_000usize;
        let sample = sample_good_columns(&p, &profile, draws, 31);
        let mut hist: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(r, c) in &sample.pairs {
            assert!(profile.is_good(r, c));
            *hist.entry((r, c)).or_insert(0) += 1;
        }
        assert_eq!(hist.len(), 40);
        let g = sample.pairs.len() as f64;
        let expected = g / 40.0;
        let chi2: f64 = hist
            .values()
            .map(|&h| {
                let d = h as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < CHI2_999_39, "chi2 = {chi2}");
    }

    #[test]
    fn sample_discards_zero_good_columns_and_keeps_full_ones() {
        let eps = 1.0 / 16.0;
        let p = two_tier_sketch();
        let profile = build_profile(&p, eps, &AttackConfig::default()).unwrap();
        let sample = sample_good_columns(&p, &profile, 5000, 7);
        for ev in &sample.steps {
            if let Event::Sample { column, s_prime, accepted, .. } = ev {
                if *s_prime == 0 {
                    assert!(accepted.is_none());
                }
                if *s_prime == profile.s_prime_max {
                    assert!(accepted.is_some(), "full column {column} must be kept");
                }
            }
        }
    }

    #[test]
    fn collect_columns_trivial_and_duplicate() {
        let eps = 1.0 / 32.0;
        let p = sketches::hadamard_block(eps, 64, 1).unwrap();
        let profile = build_profile(&p, eps, &AttackConfig::default()).unwrap();

        let state = collect_columns(&p, &profile, &[]);
        assert!(state.collision.is_none());
        assert!(state.collected.is_empty());

        // A good column seeds S' with itself; its repeat collides.
        let row = profile.s_ell_theta[0];
        let col = profile.good_cols_by_row[row][0];
        let state = collect_columns(&p, &profile, &[(row, col), (row, col)]);
        assert_eq!(state.collision, Some((1, col)));
    }

    #[test]
    fn collected_members_reverify_threshold() {
        let eps = 1.0 / 32.0;
        let p = sketches::hadamard_block(eps, 256, 2).unwrap();
        let profile = build_profile(&p, eps, &AttackConfig::default()).unwrap();
        let sample = sample_good_columns(&p, &profile, 24, 3);
        let split = sample.pairs.len().div_ceil(2);
        let state = collect_columns(&p, &profile, &sample.pairs[..split]);
        assert!(!state.collected.is_empty());
        for (&col, w) in &state.collected {
            let direct = sparse_dot(p.column(w.examined), p.column(col));
            assert!((direct - w.inner).abs() <= 1e-12);
            assert!(direct >= profile.pair_threshold() - 1e-12);
        }
    }

    #[test]
    fn scan_second_half_cases() {
        let mut collected = BTreeMap::new();
        assert_eq!(scan_second_half(&collected, &[(0, 3)]), None);
        collected.insert(
            3,
            Witness {
                examined: 1,
                inner: 0.5,
            },
        );
        assert_eq!(
            scan_second_half(&collected, &[(0, 2), (0, 3)]),
            Some((1, 3, 0.5))
        );
    }

    #[test]
    fn attack_transcript_deterministic() {
        let eps = 1.0 / 32.0;
        let p = sketches::hadamard_block(eps, 1024, 2).unwrap();
        let a = attack(&p, eps, 4, 11, &AttackConfig::default()).unwrap();
        let b = attack(&p, eps, 4, 11, &AttackConfig::default()).unwrap();
        assert_eq!(a.transcript_text(), b.transcript_text());
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn attack_on_dense_rademacher_is_inconclusive() {
        // Every squared entry is 1/m, far below eps: no heavy entries exist.
        let p = sketches::dense_rademacher(4096, 64, 2).unwrap();
        let out = attack(&p, 1.0 / 16.0, 4, 5, &AttackConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Inconclusive);
        assert_eq!(out.good_column_count, 0);
    }

    #[test]
    fn anticoncentration_planted_duplicate_pair() {
        // Two identical unit columns in one block (beta = 1/2): lemma floor 1/4.
        let mut a = DenseMatrix::zeros(4, 4);
        a.set(0, 0, 1.0);
        a.set(0, 1, 1.0);
        a.set(1, 2, 1.0);
        a.set(2, 3, 1.0);
        let rate = anticoncentration(&a, 0.1, 1, 2000, 9).unwrap();
        let sigma = (0.25f64 * 0.75 / 2000.0).sqrt();
        assert!(rate >= 0.25 - 3.0 * sigma, "rate = {rate}");
    }

    #[test]
    fn anticoncentration_isometric_blocks_never_violate() {
        // Orthonormal columns make AW an isometry for every sign draw.
        let a = DenseMatrix::identity(4);
        assert_eq!(anticoncentration(&a, 0.1, 1, 500, 3).unwrap(), 0.0);
    }

    #[test]
    fn anticoncentration_planted_threshold_pair() {
        // Inner product exactly lambda*eps/beta with lambda = 4.
        let mut a = DenseMatrix::zeros(4, 4);
        a.set(0, 0, 1.0);
        a.set(0, 1, 0.8);
        a.set(1, 1, 0.6);
        a.set(2, 2, 1.0);
        a.set(3, 3, 1.0);
        let rate = anticoncentration(&a, 0.1, 1, 2000, 4).unwrap();
        assert!((0.2..=1.0).contains(&rate), "rate = {rate}");
    }
}

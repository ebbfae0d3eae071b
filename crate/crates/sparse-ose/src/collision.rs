//! Inner-product anticoncentration toolkit.
//!
//! For a finite multiset `S` of vectors in the unit ball and a scale
//! `kappa ∈ (0, 1/2]`, there is always a dyadic level `ℓ` at which a robust
//! fraction of ordered pairs of `S` have inner product at least
//! `2^ℓ·kappa - 2·kappa`, and the guarantee survives the removal of any small
//! subset. `find_collision_level` runs the constructive search for that
//! level; `verify_collision_level` checks the universally quantified claim
//! against an adversary that proposes removal subsets.
//!
//! All pair statistics are over ordered pairs with replacement: the diagonal
//! `(c, c)` counts, and so does each duplicate of a vector. Probability
//! comparisons against the dyadic bounds are done in exact integer
//! arithmetic; only the inner-product threshold test itself is floating
//! point.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::SeedRng;

/// Multiset of vectors in the unit ℓ₂-ball (duplicates allowed).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFamily {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl VectorFamily {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "vector {i} has length {}, expected {dim}",
                    v.len()
                )));
            }
            let norm_sq: f64 = v.iter().map(|x| x * x).sum();
            if !(norm_sq.sqrt() <= 1.0 + 1e-9) {
                return Err(Error::InvalidParameter(format!(
                    "vector {i} has norm {} outside the unit ball",
                    norm_sq.sqrt()
                )));
            }
        }
        Ok(VectorFamily { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Vectors as the rows of a dense matrix (the interchange format).
    pub fn to_rows_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.len(), self.dim);
        for (r, v) in self.vectors.iter().enumerate() {
            for (c, &x) in v.iter().enumerate() {
                m.set(r, c, x);
            }
        }
        m
    }

    pub fn from_rows_matrix(m: &DenseMatrix) -> Result<Self> {
        let vectors = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
        VectorFamily::new(m.cols(), vectors)
    }
}

/// Certificate for one collision level of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionCertificate {
    pub ell: u32,
    pub kappa: f64,
    /// Inner-product threshold `2^ell·kappa - 2·kappa`.
    pub threshold: f64,
    /// Fraction of `c ∈ S` whose pair probability over `Unif(S)` meets the
    /// inner bound at this level.
    pub heavy_fraction: f64,
    /// `1 / (2^{ell+5} ⌈log2(1/kappa)⌉)`.
    pub inner_bound: f64,
    /// `3 / (31 ⌈log2(1/kappa)⌉)`.
    pub outer_bound: f64,
    /// True when the subset-minimizing step used the greedy surrogate instead
    /// of exhaustive enumeration.
    pub greedy_adversary: bool,
}

/// How removal subsets `S′` are proposed when checking the ∀S′ claim.
#[derive(Clone, Copy, Debug)]
pub enum AdversaryMode {
    /// Every subset within the size bound (by removal counts per distinct
    /// vector, which is equivalent and far smaller).
    Exhaustive,
    /// The greedy-worst subset plus `subsets` random ones.
    GreedyPlusRandom { subsets: usize, seed: u64 },
}

/// `⌈log2(1/kappa)⌉` computed without floating-point logarithms.
pub fn ceil_log2_inv(kappa: f64) -> Result<u32> {
    if !(kappa > 0.0 && kappa <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "kappa must lie in (0, 1/2], got {kappa}"
        )));
    }
    let mut k = 0u32;
    let mut pow = 1.0f64;
    while pow * kappa < 1.0 {
        pow *= 2.0;
        k += 1;
    }
    Ok(k)
}

fn threshold(ell: u32, kappa: f64) -> f64 {
    2f64.powi(ell as i32) * kappa - 2.0 * kappa
}

/// Fraction of ordered pairs `(u, v)` of `S` (diagonal included) with
/// `⟨u, v⟩ ≥ p`.
pub fn pair_probability(family: &VectorFamily, p: f64) -> f64 {
    assert!(!family.is_empty());
    let g = Grouped::build(family);
    let count = g.pair_count(&g.full_counts(), p);
    count as f64 / (family.len() as f64 * family.len() as f64)
}

/// Smallest level `i ≤ ⌈log2(1/kappa)⌉ - 1` with
/// `Pr[⟨u,v⟩ ≥ 2^i·kappa - 2·kappa] ≥ 2^{-i-2}/⌈log2(1/kappa)⌉`.
/// The good-inner-product lemma guarantees one exists; `LemmaViolated` is a
/// build failure.
pub fn good_level(family: &VectorFamily, kappa: f64) -> Result<u32> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("family must be nonempty".into()));
    }
    let k = ceil_log2_inv(kappa)?;
    let g = Grouped::build(family);
    let counts = g.full_counts();
    let total = family.len() as u128;
    for i in 0..k {
        let qualifying = g.pair_count(&counts, threshold(i, kappa));
        // qualifying / |S|^2 >= 2^{-i-2} / K, in integers.
        if qualifying * (1u128 << (i + 2)) * u128::from(k) >= total * total {
            return Ok(i);
        }
    }
    Err(Error::LemmaViolated {
        family: family.len(),
        kappa,
    })
}

/// Identical vectors collapsed to one representative with a multiplicity.
struct Grouped {
    /// Group id per original index.
    group_of: Vec<usize>,
    sizes: Vec<usize>,
    /// Gram matrix of the representatives.
    gram: Vec<Vec<f64>>,
}

impl Grouped {
    fn build(family: &VectorFamily) -> Grouped {
        let mut key_to_gid: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut group_of = Vec::with_capacity(family.len());
        let mut reps: Vec<&Vec<f64>> = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        for v in family.vectors() {
            let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            let gid = *key_to_gid.entry(key).or_insert_with(|| {
                reps.push(v);
                sizes.push(0);
                reps.len() - 1
            });
            sizes[gid] += 1;
            group_of.push(gid);
        }
        let d = reps.len();
        let mut gram = vec![vec![0.0; d]; d];
        for a in 0..d {
            for b in a..d {
                let dot: f64 = reps[a].iter().zip(reps[b]).map(|(x, y)| x * y).sum();
                gram[a][b] = dot;
                gram[b][a] = dot;
            }
        }
        Grouped {
            group_of,
            sizes,
            gram,
        }
    }

    fn groups(&self) -> usize {
        self.sizes.len()
    }

    fn full_counts(&self) -> Vec<usize> {
        self.sizes.clone()
    }

    /// Ordered qualifying pairs of the sub-multiset described by `counts`.
    fn pair_count(&self, counts: &[usize], p: f64) -> u128 {
        let mut total = 0u128;
        for a in 0..self.groups() {
            if counts[a] == 0 {
                continue;
            }
            for b in 0..self.groups() {
                if counts[b] > 0 && self.gram[a][b] >= p {
                    total += counts[a] as u128 * counts[b] as u128;
                }
            }
        }
        total
    }

    /// Number of `c′` in the `counts` sub-multiset with `⟨rep_g, c′⟩ ≥ p`.
    fn degree(&self, counts: &[usize], g: usize, p: f64) -> usize {
        (0..self.groups())
            .filter(|&h| counts[h] > 0 && self.gram[g][h] >= p)
            .map(|h| counts[h])
            .sum()
    }
}

/// Live multiset with per-group remaining original indices (ascending), used
/// to break ties by lowest original index.
struct MultisetState<'a> {
    grouped: &'a Grouped,
    counts: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl<'a> MultisetState<'a> {
    fn full(grouped: &'a Grouped) -> Self {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); grouped.groups()];
        for (idx, &gid) in grouped.group_of.iter().enumerate() {
            members[gid].push(idx);
        }
        MultisetState {
            grouped,
            counts: grouped.sizes.clone(),
            members,
        }
    }

    fn remove_lowest(&mut self, g: usize) -> usize {
        self.counts[g] -= 1;
        self.members[g].remove(0)
    }

    /// Objective of Algorithm 1's subset step: the number of elements `c`
    /// left in the multiset whose qualifying-neighbor count meets
    /// `|S|/(2^{ell+5} K)`, after hypothetically removing `removal[g]`
    /// elements from each group.
    fn heavy_count_after(
        &self,
        removal: &[usize],
        p: f64,
        ell: u32,
        k: u32,
        total: usize,
    ) -> u128 {
        let counts: Vec<usize> = self
            .counts
            .iter()
            .zip(removal)
            .map(|(&c, &r)| c - r)
            .collect();
        let mut heavy = 0u128;
        for g in 0..self.grouped.groups() {
            if counts[g] == 0 {
                continue;
            }
            let deg = self.grouped.degree(&counts, g, p) as u128;
            if deg * (1u128 << (ell + 5)) * u128::from(k) >= total as u128 {
                heavy += counts[g] as u128;
            }
        }
        heavy
    }
}

/// Enumerate removal-count vectors with `sum ≤ bound`, `r[g] ≤ cap[g]`,
/// calling `f` on each (including the all-zero vector). Stops early when `f`
/// returns false.
fn for_each_removal(cap: &[usize], bound: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        cap: &[usize],
        g: usize,
        left: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if g == cap.len() {
            return f(cur);
        }
        for r in 0..=cap[g].min(left) {
            cur.push(r);
            let keep = rec(cap, g + 1, left - r, cur, f);
            cur.pop();
            if !keep {
                return false;
            }
        }
        true
    }
    rec(cap, 0, bound, &mut Vec::new(), f)
}

/// Subset-minimizing step of Algorithm 1: the removal (as per-group counts)
/// of at most `bound` elements minimizing the heavy count. Exhaustive when
/// the family is small, greedy surrogate otherwise.
fn argmin_removal(
    state: &MultisetState<'_>,
    p: f64,
    ell: u32,
    k: u32,
    total: usize,
    bound: usize,
    exhaustive: bool,
) -> Vec<usize> {
    let groups = state.grouped.groups();
    if bound == 0 {
        return vec![0; groups];
    }
    if exhaustive {
        let mut best: Option<(u128, Vec<usize>)> = None;
        for_each_removal(&state.counts, bound, &mut |removal| {
            let heavy = state.heavy_count_after(removal, p, ell, k, total);
            if best.as_ref().map_or(true, |(b, _)| heavy < *b) {
                best = Some((heavy, removal.to_vec()));
            }
            true
        });
        best.expect("zero removal always evaluated").1
    } else {
        // Greedy: repeatedly remove the element whose removal decreases the
        // heavy count the most; ties go to the lowest original index.
        let mut removal = vec![0usize; groups];
        for _ in 0..bound {
            let mut best: Option<(u128, usize, usize)> = None; // (heavy, lowest idx, group)
            for g in 0..groups {
                if removal[g] >= state.counts[g] {
                    continue;
                }
                removal[g] += 1;
                let heavy = state.heavy_count_after(&removal, p, ell, k, total);
                removal[g] -= 1;
                let lowest = state.members[g][removal[g]];
                if best
                    .as_ref()
                    .map_or(true, |&(bh, bl, _)| heavy < bh || (heavy == bh && lowest < bl))
                {
                    best = Some((heavy, lowest, g));
                }
            }
            match best {
                Some((_, _, g)) => removal[g] += 1,
                None => break,
            }
        }
        removal
    }
}

fn certificate(
    family: &VectorFamily,
    grouped: &Grouped,
    kappa: f64,
    k: u32,
    ell: u32,
    greedy: bool,
) -> CollisionCertificate {
    let p = threshold(ell, kappa);
    let total = family.len();
    let counts = grouped.full_counts();
    let mut heavy = 0usize;
    for g in 0..grouped.groups() {
        let deg = grouped.degree(&counts, g, p) as u128;
        if deg * (1u128 << (ell + 5)) * u128::from(k) >= total as u128 {
            heavy += counts[g];
        }
    }
    CollisionCertificate {
        ell,
        kappa,
        threshold: p,
        heavy_fraction: heavy as f64 / total as f64,
        inner_bound: 1.0 / (2f64.powi(ell as i32 + 5) * k as f64),
        outer_bound: 3.0 / (31.0 * k as f64),
        greedy_adversary: greedy,
    }
}

/// Runs the collision-level search (Algorithm "finding great collision").
///
/// Levels `ℓ = 0, 1, …, ⌈log2(1/kappa)⌉` are scanned in order. At each level
/// the adversarial subset step removes at most `|S|/(32K)` elements
/// (exhaustively when `|S| ≤ adversary_cutoff`, greedily beyond), then the
/// pruning loop removes highest-degree elements one at a time. The level is
/// returned either when some element's qualifying-neighbor count drops below
/// `|S|/2^ℓ` or when the loop survives `|S|/(6K)` rounds.
pub fn find_collision_level(
    family: &VectorFamily,
    kappa: f64,
    adversary_cutoff: usize,
) -> Result<CollisionCertificate> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("family must be nonempty".into()));
    }
    let k = ceil_log2_inv(kappa)?;
    let total = family.len();
    let grouped = Grouped::build(family);
    let exhaustive = total <= adversary_cutoff;
    let bound = total / (32 * k as usize);
    let mut state = MultisetState::full(&grouped);

    for ell in 0..=k {
        let p = threshold(ell, kappa);
        let removal = argmin_removal(&state, p, ell, k, total, bound, exhaustive);
        for (g, &r) in removal.iter().enumerate() {
            for _ in 0..r {
                state.remove_lowest(g);
            }
        }
        let mut i = 1usize;
        loop {
            // while i <= |S|/(6K) and qualifying pairs >= |S|^2/(2^{ell+3} K)
            if (6 * k as usize * i) > total {
                break;
            }
            let pairs = grouped.pair_count(&state.counts, p);
            if pairs * (1u128 << (ell + 3)) * u128::from(k) < (total as u128) * (total as u128) {
                break;
            }
            // Highest-degree element, ties to the lowest original index.
            let mut best: Option<(usize, usize, usize)> = None; // (deg, lowest idx, group)
            for g in 0..grouped.groups() {
                if state.counts[g] == 0 {
                    continue;
                }
                let deg = grouped.degree(&state.counts, g, p);
                let lowest = state.members[g][0];
                if best
                    .as_ref()
                    .map_or(true, |&(bd, bl, _)| deg > bd || (deg == bd && lowest < bl))
                {
                    best = Some((deg, lowest, g));
                }
            }
            let (deg, _, g) = best.expect("multiset nonempty while pairs remain");
            if (deg as u128) << ell < total as u128 {
                return Ok(certificate(family, &grouped, kappa, k, ell, !exhaustive));
            }
            state.remove_lowest(g);
            i += 1;
        }
        if 6 * k as usize * i > total {
            return Ok(certificate(family, &grouped, kappa, k, ell, !exhaustive));
        }
    }
    Err(Error::NoLevelFound)
}

/// Inner pair probabilities (one per element of `S`, over `Unif(S∖S′)`) and
/// the heavy fraction over `Unif(S)`, for a removal given as per-group counts
/// aligned with `grouped` order. Exposed for construction tests.
fn removal_outcome(
    grouped: &Grouped,
    total: usize,
    removal: &[usize],
    p: f64,
    ell: u32,
    k: u32,
) -> (Vec<f64>, f64) {
    let counts: Vec<usize> = grouped
        .sizes
        .iter()
        .zip(removal)
        .map(|(&c, &r)| c - r)
        .collect();
    let remaining: usize = counts.iter().sum();
    let mut inner = vec![0.0; total];
    let mut heavy = 0usize;
    for (idx, &g) in grouped.group_of.iter().enumerate() {
        let deg = grouped.degree(&counts, g, p);
        inner[idx] = deg as f64 / remaining as f64;
        // deg / |S∖S′| >= 1/(2^{ell+5} K), in integers.
        if (deg as u128) * (1u128 << (ell + 5)) * u128::from(k) >= remaining as u128 {
            heavy += 1;
        }
    }
    (inner, heavy as f64 / total as f64)
}

/// Inner probabilities and outer heavy fraction after removing the elements
/// at `removed` (original indices) from the sampling pool.
pub fn removal_profile(
    family: &VectorFamily,
    kappa: f64,
    ell: u32,
    removed: &[usize],
) -> Result<(Vec<f64>, f64)> {
    let k = ceil_log2_inv(kappa)?;
    let grouped = Grouped::build(family);
    let mut removal = vec![0usize; grouped.groups()];
    for &idx in removed {
        removal[grouped.group_of[idx]] += 1;
    }
    Ok(removal_outcome(
        &grouped,
        family.len(),
        &removal,
        threshold(ell, kappa),
        ell,
        k,
    ))
}

/// Checks the collision-level claim at `ell` against every removal subset the
/// adversary proposes: for each `S′`, the fraction of `c ∈ S` with inner pair
/// probability (over `Unif(S∖S′)`) at least `1/(2^{ell+5}K)` must be at least
/// `3/(31K)`.
pub fn verify_collision_level(
    family: &VectorFamily,
    kappa: f64,
    ell: u32,
    mode: AdversaryMode,
) -> Result<bool> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("family must be nonempty".into()));
    }
    let k = ceil_log2_inv(kappa)?;
    let total = family.len();
    let grouped = Grouped::build(family);
    let p = threshold(ell, kappa);
    let bound = total / (32 * k as usize);

    let accepts = |removal: &[usize]| -> bool {
        let counts: Vec<usize> = grouped
            .sizes
            .iter()
            .zip(removal)
            .map(|(&c, &r)| c - r)
            .collect();
        let remaining: usize = counts.iter().sum();
        let mut heavy = 0u128;
        for g in 0..grouped.groups() {
            let deg = grouped.degree(&counts, g, p) as u128;
            if deg * (1u128 << (ell + 5)) * u128::from(k) >= remaining as u128 {
                heavy += grouped.sizes[g] as u128; // outer probability is over the full S
            }
        }
        heavy * 31 * u128::from(k) >= 3 * total as u128
    };

    match mode {
        AdversaryMode::Exhaustive => {
            let mut ok = true;
            for_each_removal(&grouped.sizes, bound, &mut |removal| {
                ok = accepts(removal);
                ok
            });
            Ok(ok)
        }
        AdversaryMode::GreedyPlusRandom { subsets, seed } => {
            let state = MultisetState::full(&grouped);
            let greedy = argmin_removal(&state, p, ell, k, total, bound, false);
            if !accepts(&greedy) {
                return Ok(false);
            }
            let mut rng = SeedRng::new(seed);
            for _ in 0..subsets {
                let size = rng.index(bound + 1);
                let mut removal = vec![0usize; grouped.groups()];
                let mut picked = 0usize;
                let mut guard = 0usize;
                while picked < size && guard < 16 * size + 16 {
                    let idx = rng.index(total);
                    let g = grouped.group_of[idx];
                    if removal[g] < grouped.sizes[g] {
                        removal[g] += 1;
                        picked += 1;
                    }
                    guard += 1;
                }
                if !accepts(&removal) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

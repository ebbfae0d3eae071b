//! Experiment harness: seeded sweeps over row counts, bisection for the
//! minimal passing `m`, batched lemma verification, and reporting.
//!
//! Determinism contract: trial `t` of grid point `i` draws every random
//! object from seeds derived from `(config.seed, i·trials + t)`, and results
//! merge in trial order, so outputs are identical at any worker count.

pub mod config;
pub mod report;

use rayon::prelude::*;

pub use config::{FamilySpec, InstanceKind, SweepConfig};
pub use report::{emit_report, SweepRecord};

use crate::collision::{
    find_collision_level, good_level, verify_collision_level, AdversaryMode, VectorFamily,
};
use crate::eigen::symmetric_eigenvalues;
use crate::embedding::{orthonormal_basis, sketch_apply, wilson_interval, DistortionReport, ORTHO_TOL};
use crate::error::{Error, Result};
use crate::hard_instance::{
    is_isometry, mixture_levels, sample_instance, sample_mixture, FactoredInstance,
    HardInstanceParams,
};
use crate::matrix::{sparse_dot, DenseMatrix, SparseColMatrix};
use crate::rng::{derive_seed, SeedRng};
use crate::sketches::{hadamard_order, SketchSpec};

const TAG_SKETCH: u64 = 0x01;
const TAG_INSTANCE: u64 = 0x02;
const TAG_RETRY: u64 = 0x03;
const TAG_TRIAL: u64 = 0x10;
const TAG_PROBE: u64 = 0x20;

const ISOMETRY_RETRIES: usize = 100;

/// A family pinned to concrete dimensions, able to produce single columns.
enum FamilyInstance {
    Spec(SketchSpec),
    Identity { n: usize },
}

impl FamilyInstance {
    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        match self {
            FamilyInstance::Spec(spec) => spec.column(j),
            FamilyInstance::Identity { .. } => vec![(j, 1.0)],
        }
    }

    fn rows(&self) -> usize {
        match self {
            FamilyInstance::Spec(spec) => spec.m,
            FamilyInstance::Identity { n } => *n,
        }
    }

    fn sparsity(&self) -> usize {
        match self {
            FamilyInstance::Spec(spec) => spec.s,
            FamilyInstance::Identity { .. } => 1,
        }
    }

    fn build(&self) -> SparseColMatrix {
        match self {
            FamilyInstance::Spec(spec) => spec.build(),
            FamilyInstance::Identity { n } => SparseColMatrix::identity(*n),
        }
    }
}

fn instantiate(
    family: FamilySpec,
    m: usize,
    n: usize,
    eps: f64,
    seed: u64,
) -> Result<FamilyInstance> {
    Ok(match family {
        FamilySpec::CountSketch => FamilyInstance::Spec(SketchSpec::count_sketch(m, n, seed)?),
        FamilySpec::Osnap { s } => FamilyInstance::Spec(SketchSpec::osnap(m, n, s, seed)?),
        FamilySpec::DenseRademacher => {
            FamilyInstance::Spec(SketchSpec::dense_rademacher(m, n, seed)?)
        }
        FamilySpec::HadamardBlock { d_block } => {
            let b = hadamard_order(eps)?;
            let d_block = match d_block {
                Some(k) => k,
                None => {
                    let mut k = 1usize;
                    while (k + 1) * (k + 1) * b <= m {
                        k += 1;
                    }
                    k
                }
            };
            FamilyInstance::Spec(SketchSpec::hadamard_block(eps, n, d_block)?)
        }
        FamilySpec::IdentityStub => FamilyInstance::Identity { n },
    })
}

/// Smallest row count the family admits (bisection lower bound).
fn family_min_rows(family: FamilySpec, eps: f64, d: usize) -> usize {
    let floor = match family {
        FamilySpec::Osnap { s } => s,
        FamilySpec::HadamardBlock { .. } => hadamard_order(eps).map_or(1, |b| b),
        _ => 1,
    };
    floor.max(d)
}

/// Block level for the adversarial instance kind: sized so two of the
/// `d·2^ell` drawn columns hit copies of the same sketch column with
/// constant probability, while keeping the block weight applicable
/// (`beta ≥ 4·eps`) and the draw count below `n/4`.
fn adversarial_level(m: usize, n: usize, d: usize, eps: f64) -> u32 {
    let target = ((m as f64).sqrt() / d as f64).log2().round().max(0.0) as u32;
    let mut cap_beta = 0u32;
    let mut pow = 1.0f64;
    while pow * 2.0 * 4.0 * eps <= 1.0 {
        pow *= 2.0;
        cap_beta += 1;
    }
    let mut cap_n = 0u32;
    while (d << (cap_n + 1)) <= n / 4 {
        cap_n += 1;
    }
    target.min(cap_beta).min(cap_n)
}

fn isometric_instance(
    kind: InstanceKind,
    n: usize,
    d: usize,
    eps: f64,
    m: usize,
    seed: u64,
) -> Result<FactoredInstance> {
    for retry in 0..ISOMETRY_RETRIES {
        let attempt_seed = derive_seed(seed, TAG_RETRY, retry as u64);
        let inst = match kind {
            InstanceKind::HardMixture => {
                if mixture_levels(eps) >= 1 {
                    sample_mixture(n, d, eps, attempt_seed)?
                } else {
                    // The mixture support collapses to level 0 at this eps.
                    sample_instance(&HardInstanceParams::new(n, d, 0, attempt_seed)?)
                }
            }
            InstanceKind::HardBeta(ell) => {
                sample_instance(&HardInstanceParams::new(n, d, ell, attempt_seed)?)
            }
            InstanceKind::HadamardAdversarial => {
                let ell = adversarial_level(m, n, d, eps);
                sample_instance(&HardInstanceParams::new(n, d, ell, attempt_seed)?)
            }
            InstanceKind::RandomSubspace => unreachable!("not an isometric kind"),
        };
        if is_isometry(&inst, 1e-9) {
            return Ok(inst);
        }
    }
    Err(Error::RetriesExhausted(ISOMETRY_RETRIES))
}

/// Distortion of a sketched factored instance, computed on gathered columns:
/// Gram(ΠU) = Wᵀ·Gram(ΠV)·W with Gram(ΠV) from sparse column dot products.
fn factored_report(
    columns: &[Vec<(usize, f64)>],
    inst: &FactoredInstance,
) -> Result<DistortionReport> {
    let vc = columns.len();
    let mut gram_pv = DenseMatrix::zeros(vc, vc);
    for i in 0..vc {
        for j in i..vc {
            let dot = sparse_dot(&columns[i], &columns[j]);
            gram_pv.set(i, j, dot);
            gram_pv.set(j, i, dot);
        }
    }
    let w = inst.w();
    let sandwich = w.transpose().matmul(&gram_pv.matmul(&w)?)?;
    let eig = symmetric_eigenvalues(&sandwich)?;
    let sigma_min = eig.first().copied().unwrap().max(0.0).sqrt();
    let sigma_max = eig.last().copied().unwrap().max(0.0).sqrt();
    Ok(DistortionReport {
        sigma_min,
        sigma_max,
        eps_hat: (1.0 - sigma_min).max(sigma_max - 1.0).max(0.0),
    })
}

/// One Monte-Carlo trial: draws a sketch and an instance from `trial_seed`
/// and reports the distortion of the sketched instance.
fn run_trial(
    family: FamilySpec,
    instance: InstanceKind,
    n: usize,
    d: usize,
    eps: f64,
    m: usize,
    trial_seed: u64,
) -> Result<DistortionReport> {
    let sketch_seed = derive_seed(trial_seed, TAG_SKETCH, 0);
    let fam = instantiate(family, m, n, eps, sketch_seed)?;
    match instance {
        InstanceKind::RandomSubspace => {
            let mut rng = SeedRng::new(derive_seed(trial_seed, TAG_INSTANCE, 0));
            let q = orthonormal_basis(&DenseMatrix::gaussian(n, d, &mut rng), ORTHO_TOL)?;
            let p = fam.build();
            let sketched = sketch_apply(&p, &q)?;
            crate::embedding::distortion_of(&sketched)
        }
        _ => {
            let inst = isometric_instance(
                instance,
                n,
                d,
                eps,
                m,
                derive_seed(trial_seed, TAG_INSTANCE, 0),
            )?;
            let columns: Vec<Vec<(usize, f64)>> =
                inst.v_indices.iter().map(|&j| fam.column(j)).collect();
            factored_report(&columns, &inst)
        }
    }
}

fn trial_fails(
    family: FamilySpec,
    instance: InstanceKind,
    n: usize,
    d: usize,
    eps: f64,
    m: usize,
    trial_seed: u64,
) -> Result<bool> {
    let rep = run_trial(family, instance, n, d, eps, m, trial_seed)?;
    Ok(rep.sigma_min < 1.0 - eps || rep.sigma_max > 1.0 + eps)
}

fn estimate_at(
    family: FamilySpec,
    instance: InstanceKind,
    n: usize,
    d: usize,
    eps: f64,
    m: usize,
    trials: u64,
    base_seed: u64,
) -> Result<(u64, f64, (f64, f64))> {
    let verdicts: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| trial_fails(family, instance, n, d, eps, m, derive_seed(base_seed, TAG_TRIAL, t)))
        .collect();
    let mut failures = 0u64;
    for v in verdicts {
        if v? {
            failures += 1;
        }
    }
    let delta_hat = failures as f64 / trials as f64;
    Ok((failures, delta_hat, wilson_interval(failures, trials)))
}

/// Runs the sweep: one record per grid row count, trials evaluated in
/// parallel and merged in trial order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.m_grid.len());
    for (mi, &m) in cfg.m_grid.iter().enumerate() {
        let probe = instantiate(cfg.family, m, cfg.n, cfg.eps, 0)?;
        let actual_m = probe.rows();
        let s = probe.sparsity();
        let base_seed = derive_seed(cfg.seed, TAG_PROBE, (mi as u64) * cfg.trials);
        let (failures, delta_hat, ci) = estimate_at(
            cfg.family,
            cfg.instance,
            cfg.n,
            cfg.d,
            cfg.eps,
            m,
            cfg.trials,
            base_seed,
        )?;
        records.push(SweepRecord {
            family: cfg.family.name().to_string(),
            m: actual_m,
            n: cfg.n,
            d: cfg.d,
            eps: cfg.eps,
            s,
            trials: cfg.trials,
            failures,
            delta_hat,
            ci_low: ci.0,
            ci_high: ci.1,
            seed: cfg.seed,
        });
    }
    Ok(records)
}

/// Re-runs one trial standalone. The global index is `grid_index·trials + t`,
/// matching the order failures were counted in.
pub fn replay_trial(cfg: &SweepConfig, global_index: u64) -> Result<ReplayReport> {
    cfg.validate()?;
    let mi = (global_index / cfg.trials) as usize;
    let t = global_index % cfg.trials;
    let &m = cfg
        .m_grid
        .get(mi)
        .ok_or_else(|| Error::InvalidParameter(format!("trial {global_index} beyond the sweep")))?;
    let base_seed = derive_seed(cfg.seed, TAG_PROBE, (mi as u64) * cfg.trials);
    let trial_seed = derive_seed(base_seed, TAG_TRIAL, t);
    let report = run_trial(cfg.family, cfg.instance, cfg.n, cfg.d, cfg.eps, m, trial_seed)?;
    let failed = report.sigma_min < 1.0 - cfg.eps || report.sigma_max > 1.0 + cfg.eps;
    Ok(ReplayReport {
        m,
        trial: t,
        failed,
        report,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ReplayReport {
    pub m: usize,
    pub trial: u64,
    pub failed: bool,
    pub report: DistortionReport,
}

/// Bisection for the smallest `m` whose empirical failure rate passes
/// `delta` with a confidence guard (`ci_high ≤ 1.5·delta`). Probes derive
/// their seeds from `(seed, m)`, so re-probing an `m` is reproducible.
pub fn min_m_search(
    family: FamilySpec,
    n: usize,
    d: usize,
    eps: f64,
    delta: f64,
    instance: InstanceKind,
    trials: u64,
    seed: u64,
) -> Result<usize> {
    if trials < 1 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(
            "need trials >= 1 and delta in (0,1)".into(),
        ));
    }
    let passes = |m: usize| -> Result<bool> {
        let base_seed = derive_seed(seed, TAG_PROBE, m as u64);
        let (_, delta_hat, ci) = estimate_at(family, instance, n, d, eps, m, trials, base_seed)?;
        Ok(delta_hat <= delta && ci.1 <= 1.5 * delta)
    };
    let mut lo = family_min_rows(family, eps, d);
    if lo > n {
        return Err(Error::NoBracket { lo, hi: n });
    }
    if passes(lo)? {
        return Ok(lo);
    }
    // Double until a passing upper end appears within [lo, n].
    let mut hi = lo;
    loop {
        let next = (hi * 2).min(n);
        if next == hi {
            return Err(Error::NoBracket { lo, hi: n });
        }
        hi = next;
        if passes(hi)? {
            break;
        }
        if hi == n {
            return Err(Error::NoBracket { lo, hi: n });
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Batched lemma verification report.
#[derive(Clone, Debug, Default)]
pub struct LemmaReport {
    pub good_level_pass: usize,
    pub good_level_fail: usize,
    pub collision_pass: usize,
    pub collision_fail: usize,
    pub greedy_pass: usize,
    pub greedy_fail: usize,
}

impl LemmaReport {
    /// Failures in the exhaustive tiers are theorem violations.
    pub fn fatal(&self) -> bool {
        self.good_level_fail > 0 || self.collision_fail > 0
    }
}

impl std::fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "good-inner-product lemma: {}/{} pass",
            self.good_level_pass,
            self.good_level_pass + self.good_level_fail
        )?;
        writeln!(
            f,
            "great collision (exhaustive): {}/{} pass",
            self.collision_pass,
            self.collision_pass + self.collision_fail
        )?;
        write!(
            f,
            "great collision (greedy, informational): {}/{} pass",
            self.greedy_pass,
            self.greedy_pass + self.greedy_fail
        )
    }
}

fn random_family(rng: &mut SeedRng, size: usize, dim: usize) -> VectorFamily {
    let vectors: Vec<Vec<f64>> = (0..size)
        .map(|_| {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let radius = if rng.sign() > 0.0 { 1.0 } else { rng.unit() };
            v.iter_mut().for_each(|x| *x *= radius / norm);
            v
        })
        .collect();
    VectorFamily::new(dim, vectors).expect("ball vectors satisfy the norm invariant")
}

fn degenerate_families() -> Vec<VectorFamily> {
    let e = |dim: usize, i: usize, sign: f64| {
        let mut v = vec![0.0; dim];
        v[i] = sign;
        v
    };
    vec![
        VectorFamily::new(3, vec![e(3, 1, 1.0); 6]).unwrap(),
        VectorFamily::new(4, (0..4).map(|i| e(4, i, 1.0)).collect()).unwrap(),
        VectorFamily::new(2, vec![e(2, 0, 1.0), e(2, 0, -1.0), e(2, 1, 1.0), e(2, 1, -1.0)])
            .unwrap(),
        VectorFamily::new(1, vec![vec![0.0]; 5]).unwrap(),
    ]
}

/// Runs the lemma suites on random families: the good-inner-product level
/// must exist and the collision level must verify exhaustively for every
/// family of size ≤ `max_size`; a greedy tier at |S| = 64 is reported but
/// not fatal.
pub fn verify_lemmas(
    seed: u64,
    family_count: usize,
    max_size: usize,
    kappa_set: &[f64],
) -> LemmaReport {
    let mut report = LemmaReport::default();
    let mut families: Vec<VectorFamily> = degenerate_families();
    for i in 0..family_count {
        let mut rng = SeedRng::substream(seed, i as u64);
        let size = 2 + rng.index(max_size.saturating_sub(1).max(1));
        let dim = 1 + rng.index(16);
        families.push(random_family(&mut rng, size, dim));
    }
    for fam in &families {
        for &kappa in kappa_set {
            match good_level(fam, kappa) {
                Ok(_) => report.good_level_pass += 1,
                Err(_) => report.good_level_fail += 1,
            }
            if fam.len() <= max_size {
                let ok = find_collision_level(fam, kappa, max_size)
                    .and_then(|cert| {
                        verify_collision_level(fam, kappa, cert.ell, AdversaryMode::Exhaustive)
                    })
                    .unwrap_or(false);
                if ok {
                    report.collision_pass += 1;
                } else {
                    report.collision_fail += 1;
                }
            }
        }
    }
    // Greedy tier: larger families, surrogate adversary on both sides.
    for i in 0..20u64 {
        let mut rng = SeedRng::substream(derive_seed(seed, TAG_PROBE, 1), i);
        let dim = 1 + rng.index(16);
        let fam = random_family(&mut rng, 64, dim);
        for &kappa in kappa_set {
            let ok = find_collision_level(&fam, kappa, 12)
                .and_then(|cert| {
                    verify_collision_level(
                        &fam,
                        kappa,
                        cert.ell,
                        AdversaryMode::GreedyPlusRandom {
                            subsets: 20,
                            seed: derive_seed(seed, TAG_TRIAL, i),
                        },
                    )
                })
                .unwrap_or(false);
            if ok {
                report.greedy_pass += 1;
            } else {
                report.greedy_fail += 1;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(family: FamilySpec, instance: InstanceKind) -> SweepConfig {
        SweepConfig {
            family,
            n: 256,
            d: 4,
            eps: 0.125,
            delta: 0.1,
            m_grid: vec![8, 32, 128],
            instance,
            trials: 60,
            seed: 11,
            gamma: 0.0,
        }
    }

    #[test]
    fn identity_stub_never_fails() {
        let cfg = small_config(FamilySpec::IdentityStub, InstanceKind::HardMixture);
        let records = run_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert_eq!(r.delta_hat, 0.0);
            assert_eq!(r.failures, 0);
        }
    }

    #[test]
    fn sweep_records_are_reproducible() {
        let cfg = small_config(FamilySpec::CountSketch, InstanceKind::HardMixture);
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(report::records_to_csv(&a), report::records_to_csv(&b));
    }

    #[test]
    fn failures_replay_standalone() {
        let cfg = small_config(FamilySpec::CountSketch, InstanceKind::HardMixture);
        let records = run_sweep(&cfg).unwrap();
        let mut checked = 0;
        for mi in 0..records.len() {
            for t in 0..cfg.trials {
                let idx = mi as u64 * cfg.trials + t;
                let rep = replay_trial(&cfg, idx).unwrap();
                if rep.failed {
                    checked += 1;
                }
            }
        }
        let total: u64 = records.iter().map(|r| r.failures).sum();
        assert_eq!(checked as u64, total);
        assert!(total > 0, "expected some failures at small m");
    }

    #[test]
    fn random_subspace_delta_decreases_with_m() {
        // Count-Sketch over a Gaussian subspace: failure mass moves down as m
        // grows, up to CI overlap.
        let cfg = SweepConfig {
            family: FamilySpec::CountSketch,
            n: 512,
            d: 8,
            eps: 0.25,
            delta: 0.1,
            m_grid: vec![64, 256, 1024, 4096],
            instance: InstanceKind::RandomSubspace,
            trials: 120,
            seed: 3,
            gamma: 0.0,
        };
        let records = run_sweep(&cfg).unwrap();
        for w in records.windows(2) {
            let non_increasing = w[1].delta_hat <= w[0].delta_hat;
            let ci_overlap = w[1].ci_low <= w[0].ci_high;
            assert!(
                non_increasing || ci_overlap,
                "delta_hat jumped: {} -> {}",
                w[0].delta_hat,
                w[1].delta_hat
            );
        }
        assert!(records.first().unwrap().delta_hat > records.last().unwrap().delta_hat);
    }

    #[test]
    fn min_m_identity_stub_returns_floor() {
        let m = min_m_search(
            FamilySpec::IdentityStub,
            128,
            4,
            0.125,
            0.1,
            InstanceKind::HardMixture,
            40,
            5,
        )
        .unwrap();
        assert_eq!(m, 4);
    }

    #[test]
    fn min_m_no_bracket_when_everything_fails() {
        // n too small for Count-Sketch to ever pass at delta = 0.01.
        let err = min_m_search(
            FamilySpec::CountSketch,
            8,
            4,
            0.125,
            0.01,
            InstanceKind::HardMixture,
            50,
            5,
        );
        assert!(matches!(err, Err(Error::NoBracket { .. })));
    }

    #[test]
    fn verify_lemmas_small_batch_all_pass() {
        let report = verify_lemmas(99, 60, 12, &[0.5, 0.25, 0.125]);
        assert_eq!(report.good_level_fail, 0);
        assert_eq!(report.collision_fail, 0);
        assert!(!report.fatal());
    }

    #[test]
    fn adversarial_level_respects_caps() {
        // beta cap: 2^ell <= 1/(4 eps).
        let ell = adversarial_level(1 << 12, 1 << 16, 4, 1.0 / 32.0);
        assert!(1usize << ell <= 8);
        // n cap: d * 2^ell <= n / 4.
        let ell = adversarial_level(1 << 12, 64, 4, 1.0 / 64.0);
        assert!(4usize << ell <= 16);
    }
}

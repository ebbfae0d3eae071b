//! Plain-text `key=value` configuration, `#` comments allowed.

use crate::error::{Error, Result};

pub use crate::kv::{parse_key_values, KeyValues};

/// Which subspace distribution a sweep draws its test instances from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    /// Orthonormalized Gaussian subspace.
    RandomSubspace,
    /// The level mixture (level 0 with probability 1/2, else uniform on
    /// `{1..L}`), isometric draws only. Degenerates to level 0 when `L < 1`.
    HardMixture,
    /// Fixed block level.
    HardBeta(u32),
    /// Block level targeted at a tiled block-diagonal sketch (sized so that
    /// two drawn columns land on copies of the same sketch column with
    /// constant probability).
    HadamardAdversarial,
}

impl InstanceKind {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "random_subspace" {
            Ok(InstanceKind::RandomSubspace)
        } else if s == "hard_mixture" {
            Ok(InstanceKind::HardMixture)
        } else if s == "hadamard_adversarial" {
            Ok(InstanceKind::HadamardAdversarial)
        } else if let Some(rest) = s.strip_prefix("hard_beta:") {
            let ell: u32 = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad hard_beta level {rest:?}")))?;
            Ok(InstanceKind::HardBeta(ell))
        } else {
            Err(Error::Parse(format!("unknown instance kind {s:?}")))
        }
    }

    pub fn name(&self) -> String {
        match self {
            InstanceKind::RandomSubspace => "random_subspace".into(),
            InstanceKind::HardMixture => "hard_mixture".into(),
            InstanceKind::HardBeta(ell) => format!("hard_beta:{ell}"),
            InstanceKind::HadamardAdversarial => "hadamard_adversarial".into(),
        }
    }
}

/// Sketch family a sweep probes. `IdentityStub` always yields the exact
/// identity on ℝⁿ regardless of the probed `m`; it exists to exercise the
/// harness plumbing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    CountSketch,
    Osnap { s: usize },
    DenseRademacher,
    /// `d_block = None` derives the largest block-diagonal fitting the probed
    /// `m`; `Some(k)` pins the tile scale.
    HadamardBlock { d_block: Option<usize> },
    IdentityStub,
}

impl FamilySpec {
    pub fn parse(kv: &KeyValues) -> Result<Self> {
        match kv.require("family")? {
            "count_sketch" => Ok(FamilySpec::CountSketch),
            "osnap" => Ok(FamilySpec::Osnap {
                s: kv.parse_require("s")?,
            }),
            "dense_rademacher" => Ok(FamilySpec::DenseRademacher),
            "hadamard_block" => Ok(FamilySpec::HadamardBlock {
                d_block: match kv.get("d_block") {
                    None => None,
                    Some(raw) => Some(raw.parse().map_err(|_| {
                        Error::Parse(format!("bad value for \"d_block\": {raw:?}"))
                    })?),
                },
            }),
            "identity_stub" => Ok(FamilySpec::IdentityStub),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::CountSketch => "count_sketch",
            FamilySpec::Osnap { .. } => "osnap",
            FamilySpec::DenseRademacher => "dense_rademacher",
            FamilySpec::HadamardBlock { .. } => "hadamard_block",
            FamilySpec::IdentityStub => "identity_stub",
        }
    }
}

/// One experiment sweep: a family probed over a grid of row counts.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: FamilySpec,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub m_grid: Vec<usize>,
    pub instance: InstanceKind,
    pub trials: u64,
    pub seed: u64,
    pub gamma: f64,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = parse_key_values(text)?;
        let family = FamilySpec::parse(&kv)?;
        let m_grid: Vec<usize> = kv
            .require("m_grid")?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad m_grid entry {t:?}")))
            })
            .collect::<Result<_>>()?;
        let config = SweepConfig {
            family,
            n: kv.parse_require("n")?,
            d: kv.parse_require("d")?,
            eps: kv.parse_require("eps")?,
            delta: kv.parse_or("delta", 0.1)?,
            m_grid,
            instance: InstanceKind::parse(kv.require("instance")?)?,
            trials: kv.parse_require("trials")?,
            seed: kv.parse_or("seed", 0)?,
            gamma: kv.parse_or("gamma", 0.0)?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_grid.is_empty() || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "m_grid must be nonempty and strictly ascending".into(),
            ));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, 0.5), got {}",
                self.eps
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0, 1)".into()));
        }
        if !(0.0..0.5).contains(&self.gamma) {
            return Err(Error::InvalidParameter("gamma must lie in [0, 1/2)".into()));
        }
        if self.d < 1 || self.n < self.d {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= d <= n, got d={}, n={}",
                self.d, self.n
            )));
        }
        if let FamilySpec::Osnap { s } = self.family {
            if s < 1 {
                return Err(Error::InvalidParameter("osnap needs s >= 1".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config_with_comments() {
        let text = "\
# phase transition probe
family = count_sketch
n = 1024
d = 8
eps = 0.125
delta = 0.1
m_grid = 16, 64, 256
instance = hard_mixture
trials = 50
seed = 7
";
        let cfg = SweepConfig::parse(text).unwrap();
        assert_eq!(cfg.family, FamilySpec::CountSketch);
        assert_eq!(cfg.m_grid, vec![16, 64, 256]);
        assert_eq!(cfg.instance, InstanceKind::HardMixture);
        assert_eq!(cfg.gamma, 0.0);
    }

    #[test]
    fn rejects_bad_grids_and_eps() {
        let base = "family=count_sketch\nn=64\nd=4\neps=EPS\nm_grid=GRID\ninstance=hard_mixture\ntrials=10\n";
        let bad_grid = base.replace("EPS", "0.125").replace("GRID", "8,8");
        assert!(SweepConfig::parse(&bad_grid).is_err());
        let bad_eps = base.replace("EPS", "0.6").replace("GRID", "8,16");
        assert!(SweepConfig::parse(&bad_eps).is_err());
    }

    #[test]
    fn instance_kind_roundtrip() {
        for kind in [
            InstanceKind::RandomSubspace,
            InstanceKind::HardMixture,
            InstanceKind::HardBeta(3),
            InstanceKind::HadamardAdversarial,
        ] {
            assert_eq!(InstanceKind::parse(&kind.name()).unwrap(), kind);
        }
    }
}

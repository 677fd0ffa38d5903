//! Monte Carlo realization of the feedback identification schemes and the
//! checks of their building blocks.
//!
//! * [`typical`]: conditional typical sets, counted exactly per type.
//! * [`hash`]: keyed hash maps and the collision check.
//! * [`code`]: channel sampling and explicit transmission codes.
//! * [`dif`] / [`rif`]: the deterministic and randomized schemes.
//! * [`exact`]: exhaustive error probabilities of the deterministic scheme.
//! * [`checks`]: typical-set growth and coverage measurements.

pub mod checks;
pub mod code;
pub mod dif;
pub mod exact;
pub mod hash;
pub mod rif;
pub mod stats;
pub mod typical;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::AveragedChannel;
use crate::error::{Error, Result};
use crate::info::entropy_of;
pub use checks::{lemma_checks, LemmaReport, LemmaRow, LemmaTarget};
pub use dif::{choose_dif_aux, run_dif_scheme, DifAux, DifPlan};
pub use exact::{exact_dif_errors, ExactErrors};
pub use hash::{hash_collision_check, CollisionReport, HashFamily, HASH_ALGORITHM};
pub use rif::{run_rif_scheme, RifAux, RifPlan, RifStats, UniformityReport};
pub use stats::{Estimate, TrialStats, Z95};
pub use typical::{conditional_typical_set, Convention, TypicalitySpec};

/// How the auxiliary kernel of a simulated scheme is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxSource {
    /// The lower-bound optimizer with `I(U;Z|X,Y)` held at zero.
    SliceZero,
    /// The lower-bound optimizer with `I(U;Z|X,Y)` up to the restricted capacity.
    #[default]
    RestrictedCapacity,
    /// `U = Z`.
    Copy,
}

impl FromStr for AuxSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slice-zero" => Ok(AuxSource::SliceZero),
            "restricted-capacity" => Ok(AuxSource::RestrictedCapacity),
            "copy" => Ok(AuxSource::Copy),
            other => Err(Error::InvalidParameter(format!(
                "unknown aux source `{other}` (expected slice-zero, restricted-capacity or copy)"
            ))),
        }
    }
}

/// Parameters of a protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub budget: f64,
    /// Length of each common-randomness block.
    pub n: usize,
    /// Length of each explicit code block; `None` means `ceil(sqrt(n))`.
    pub sqrt_block: Option<usize>,
    /// `M'`.
    pub hash_range: u64,
    /// `N`.
    pub messages: u64,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub gamma: f64,
    /// Rate slack of the binning; `None` means `gamma`.
    pub bin_gamma: Option<f64>,
    pub convention: Convention,
    /// `K` for the randomized scheme.
    pub blocks: usize,
    pub satellite_cap: usize,
    pub ambiguity_threshold: f64,
    pub aux: AuxSource,
    /// `|U|` passed to the lower-bound optimizer when it supplies the kernel.
    pub aux_alphabet: usize,
    pub identical_maps: bool,
    pub lambda1_target: f64,
    pub lambda2_target: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            budget: 0.2,
            n: 16,
            sqrt_block: None,
            hash_range: 4,
            messages: 16,
            trials: 10_000,
            seed: 1,
            epsilon: 0.05,
            gamma: 0.05,
            bin_gamma: None,
            convention: Convention::Conditional,
            blocks: 2,
            satellite_cap: 1 << 14,
            ambiguity_threshold: 0.5,
            aux: AuxSource::RestrictedCapacity,
            aux_alphabet: 2,
            identical_maps: false,
            lambda1_target: 1.0,
            lambda2_target: 1.0,
        }
    }
}

impl ProtocolConfig {
    pub fn code_length(&self) -> usize {
        self.sqrt_block.unwrap_or_else(|| (self.n as f64).sqrt().ceil() as usize)
    }

    pub fn bin_slack(&self) -> f64 {
        self.bin_gamma.unwrap_or(self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.code_length() == 0 {
            return bad("code blocks need at least one channel use".into());
        }
        if self.hash_range < 1 || self.messages < 1 {
            return bad("hash range and message count must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("at least one trial is required".into());
        }
        if !(self.epsilon > 0.0) || !(self.gamma >= 0.0) {
            return bad(format!("need epsilon > 0 and gamma >= 0, got {} and {}", self.epsilon, self.gamma));
        }
        if self.aux_alphabet == 0 {
            return bad("aux alphabet must have at least one symbol".into());
        }
        if self.bin_gamma.is_some_and(|g| !(g >= 0.0)) {
            return bad("bin gamma must be nonnegative".into());
        }
        if self.satellite_cap == 0 {
            return bad("satellite cap must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.ambiguity_threshold) {
            return bad("ambiguity threshold must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// `P(y,z|x)` with a kernel `P(u|z)` for one input symbol.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AuxLaw {
    pub ny: usize,
    pub nz: usize,
    pub nu: usize,
    pub pyz: Vec<f64>,
    pub q: Vec<f64>,
}

impl AuxLaw {
    pub fn new(avg: &AveragedChannel, x: usize, q: &[f64], nu: usize) -> Self {
        let (ny, nz) = (avg.y().size(), avg.z().size());
        let pyz = (0..ny * nz).map(|k| avg.prob(x, k / nz, k % nz)).collect();
        Self {
            ny,
            nz,
            nu,
            pyz,
            q: q.to_vec(),
        }
    }

    pub fn pz(&self) -> Vec<f64> {
        (0..self.nz).map(|z| (0..self.ny).map(|y| self.pyz[y * self.nz + z]).sum()).collect()
    }

    pub fn pu(&self) -> Vec<f64> {
        let pz = self.pz();
        (0..self.nu)
            .map(|u| (0..self.nz).map(|z| pz[z] * self.q[z * self.nu + u]).sum())
            .collect()
    }

    pub fn pyu(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ny * self.nu];
        for y in 0..self.ny {
            for z in 0..self.nz {
                for u in 0..self.nu {
                    out[y * self.nu + u] += self.pyz[y * self.nz + z] * self.q[z * self.nu + u];
                }
            }
        }
        out
    }

    fn h_u_given_z(&self) -> f64 {
        let pz = self.pz();
        (0..self.nz)
            .map(|z| pz[z] * entropy_of(&self.q[z * self.nu..(z + 1) * self.nu]))
            .sum()
    }

    /// `I(U;Z|X=x)`.
    pub fn i_uz(&self) -> f64 {
        (entropy_of(&self.pu()) - self.h_u_given_z()).max(0.0)
    }

    /// `I(U;Z|Y,X=x)`.
    pub fn i_uz_given_y(&self) -> f64 {
        let py: Vec<f64> = (0..self.ny).map(|y| self.pyz[y * self.nz..(y + 1) * self.nz].iter().sum()).collect();
        (entropy_of(&self.pyu()) - entropy_of(&py) - self.h_u_given_z()).max(0.0)
    }

    /// `ln P(y|u)`, row-major in `u`.
    pub fn ln_py_given_u(&self) -> Vec<f64> {
        let pu = self.pu();
        let pyu = self.pyu();
        let mut out = vec![f64::NEG_INFINITY; self.nu * self.ny];
        for u in 0..self.nu {
            for y in 0..self.ny {
                let p = pyu[y * self.nu + u];
                if p > 0.0 && pu[u] > 0.0 {
                    out[u * self.ny + y] = (p / pu[u]).ln();
                }
            }
        }
        out
    }
}

/// `ceil(2^{n r})` clamped to `[lo, hi]`, ignoring excesses below 1e-9.
pub(crate) fn rate_size(n: usize, rate: f64, lo: usize, hi: usize) -> usize {
    let v = ((n as f64 * rate).exp2() - 1e-9).ceil();
    if !(v.is_finite()) || v > hi as f64 {
        hi
    } else {
        (v as usize).clamp(lo, hi)
    }
}

pub(crate) const STREAM_SATELLITE: u64 = 0x5341_5401;
pub(crate) const STREAM_BINS: u64 = 0x4249_4e02;
pub(crate) const STREAM_BIN_CODE: u64 = 0x4243_4403;
pub(crate) const STREAM_HASH_CODE: u64 = 0x4843_4404;
pub(crate) const STREAM_TRIAL: u64 = 0x5452_4c05;
pub(crate) const STREAM_PAIRS: u64 = 0x5041_4906;
pub(crate) const STREAM_BASE_CODE: u64 = 0x4243_4207;

/// Ordered pairs `(i, j)`, `i != j`: all of them when `N <= 64`, otherwise
/// a seeded sample of 4096.
pub(crate) fn type2_pairs(messages: u64, seed: u64) -> Option<Vec<(u64, u64)>> {
    use rand::Rng;
    if messages <= 64 {
        return None;
    }
    let mut rng = crate::rng::child_rng(seed, STREAM_PAIRS, 0);
    Some(
        (0..4096)
            .map(|_| {
                let i = rng.gen_range(0..messages);
                let mut j = rng.gen_range(0..messages - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect(),
    )
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::channel::StateChannel;
    use crate::prob::{Alphabet, Pmf};
    use crate::sensing::{optimal_estimator, DistortionFn, EstimatorTable};

    /// `Y = (X, S)` with `S` uniform and `Z = Y`: a noiseless forward link
    /// whose feedback carries one fresh bit per use.
    pub fn revealing_channel() -> (StateChannel, DistortionFn, EstimatorTable) {
        let a = |n: &str, k| Alphabet::new(n, k).unwrap();
        let ch = StateChannel::from_law(
            a("X", 2),
            a("S", 2),
            a("Y", 4),
            a("Z", 4),
            Pmf::uniform(a("S", 2)),
            |x, s, y, z| if y == 2 * x + s && z == y { 1.0 } else { 0.0 },
        )
        .unwrap();
        let d = DistortionFn::hamming(2);
        let est = optimal_estimator(&ch, &d).unwrap();
        (ch, d, est)
    }
}

//! Estimates with normal-approximation confidence half-widths.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn proportion(hits: usize, samples: usize) -> Self {
        if samples == 0 {
            return Self {
                mean: 0.0,
                half_width: 0.0,
                samples,
            };
        }
        let p = hits as f64 / samples as f64;
        Self {
            mean: p,
            half_width: Z95 * (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    pub fn from_moments(sum: f64, sum_sq: f64, samples: usize) -> Self {
        if samples == 0 {
            return Self {
                mean: 0.0,
                half_width: 0.0,
                samples,
            };
        }
        let k = samples as f64;
        let mean = sum / k;
        let var = if samples > 1 {
            ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            half_width: Z95 * (var / k).sqrt(),
            samples,
        }
    }

    pub fn from_samples(values: &[f64]) -> Self {
        let sum = values.iter().sum();
        let sum_sq = values.iter().map(|v| v * v).sum();
        Self::from_moments(sum, sum_sq, values.len())
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.mean - v).abs() <= self.half_width
    }
}

/// Running first and second moments per channel use.
#[derive(Debug, Clone, Default)]
pub(crate) struct Moments {
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
        }
    }

    pub fn add(&mut self, values: &[f64]) {
        for (t, &v) in values.iter().enumerate() {
            self.sum[t] += v;
            self.sum_sq[t] += v * v;
        }
    }

    pub fn estimates(&self, samples: usize) -> Vec<Estimate> {
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&s, &q)| Estimate::from_moments(s, q, samples))
            .collect()
    }
}

/// Empirical errors, distortion and diagnostics of one scheme run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub scheme: String,
    pub n: usize,
    /// Total channel uses per trial.
    pub blocklength: usize,
    pub trials: usize,
    pub messages: u64,
    pub hash_range: u64,
    pub seed: u64,
    /// Missed identification of the sent message.
    pub lambda1: Estimate,
    /// Largest per-message empirical Type I error.
    pub lambda1_max: f64,
    /// Empirical Type I error per message, when `N <= 64`.
    pub lambda1_per_message: Option<Vec<f64>>,
    /// False acceptance averaged over evaluated ordered pairs.
    pub lambda2: Estimate,
    /// Largest per-pair empirical Type II error, when `N <= 64`.
    pub lambda2_max: Option<f64>,
    pub pairs_evaluated: usize,
    /// Per channel use: mean estimation distortion and its half-width.
    pub distortion: Vec<Estimate>,
    /// Per channel use: expected distortion `d*(x_t)` of the intended input.
    pub distortion_target: Vec<f64>,
    pub budget: f64,
    /// `log2` of the number of codewords typical with the feedback, per trial.
    pub typical_log2_sizes: Estimate,
    pub typical_min: usize,
    pub typical_max: usize,
    pub encoding_failures: usize,
    /// Trials whose decoder reconstructed a different common randomness.
    pub common_randomness_errors: usize,
    pub ambiguity_rate: f64,
    /// Rounded code parameters and other construction notes.
    pub diagnostics: Vec<String>,
}

impl TrialStats {
    /// Channel uses whose distortion exceeds `budget` by more than the
    /// half-width.
    pub fn distortion_violations(&self) -> Vec<usize> {
        self.distortion
            .iter()
            .enumerate()
            .filter(|(_, e)| e.mean > self.budget + e.half_width)
            .map(|(t, _)| t)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_half_width() {
        let e = Estimate::proportion(25, 100);
        assert_eq!(e.mean, 0.25);
        assert!((e.half_width - Z95 * (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        let m = Estimate::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.half_width - Z95 * (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}

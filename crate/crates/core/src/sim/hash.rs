//! Keyed hash maps `F_i` from common-randomness values to `[M']`, and the
//! collision check against the exponential tail bound.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::child_rng;

/// Identifier recorded in reports for the hash construction.
pub const HASH_ALGORITHM: &str = "sha256(seed || message || key) mod range";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashFamily {
    pub messages: u64,
    pub range: u64,
    pub seed: u64,
    /// Negative control: every message uses the map of message 0.
    pub identical_maps: bool,
}

impl HashFamily {
    pub fn new(messages: u64, range: u64, seed: u64) -> Result<Self> {
        if messages == 0 || range == 0 {
            return Err(Error::InvalidParameter(format!(
                "hash family needs messages >= 1 and range >= 1, got {messages} and {range}"
            )));
        }
        Ok(Self {
            messages,
            range,
            seed,
            identical_maps: false,
        })
    }

    pub fn with_identical_maps(mut self) -> Self {
        self.identical_maps = true;
        self
    }

    pub fn digest(&self, message: u64, key: &[u64]) -> [u8; 32] {
        let m = if self.identical_maps { 0 } else { message };
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(m.to_le_bytes());
        for k in key {
            h.update(k.to_le_bytes());
        }
        h.finalize().into()
    }

    /// `F_message(key)`.
    pub fn eval(&self, message: u64, key: &[u64]) -> u64 {
        let d = self.digest(message, key);
        u64::from_le_bytes(d[..8].try_into().expect("eight bytes")) % self.range
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub range: u64,
    pub domain_size: usize,
    pub pairs: usize,
    pub expected: f64,
    pub mean: f64,
    pub std_error: f64,
    pub within_three_se: bool,
    pub lambda: f64,
    /// Fraction of pairs whose collision fraction exceeds `lambda`.
    pub tail_fraction: f64,
    /// `2^{-|T| (lambda log2 M' - 1)}` at the measured domain size.
    pub tail_bound: f64,
    pub tail_below_bound: bool,
}

impl CollisionReport {
    pub fn passed(&self) -> bool {
        self.within_three_se && self.tail_below_bound
    }
}

/// Collision fractions `|{u : F_i(u) = F_j(u)}| / |domain|` for seeded
/// random pairs `i != j`.
pub fn hash_collision_check(hash: &HashFamily, domain: &[u64], pairs: usize, lambda: f64, seed: u64) -> Result<CollisionReport> {
    if hash.range < 2 {
        return Err(Error::InvalidParameter("collision check needs a range of at least 2".into()));
    }
    if hash.messages < 2 || domain.is_empty() || pairs == 0 {
        return Err(Error::InvalidParameter(
            "collision check needs two messages, a nonempty domain and at least one pair".into(),
        ));
    }
    let mut rng = child_rng(seed, 0x4841_5348, 0);
    let fractions: Vec<f64> = (0..pairs)
        .map(|_| {
            let (i, j) = if hash.messages < (1 << 32) {
                let v = sample(&mut rng, hash.messages as usize, 2);
                (v.index(0) as u64, v.index(1) as u64)
            } else {
                loop {
                    let a = rng.gen_range(0..hash.messages);
                    let b = rng.gen_range(0..hash.messages);
                    if a != b {
                        break (a, b);
                    }
                }
            };
            let hits = domain
                .iter()
                .filter(|&&u| hash.eval(i, &[u]) == hash.eval(j, &[u]))
                .count();
            hits as f64 / domain.len() as f64
        })
        .collect();
    let k = fractions.len() as f64;
    let mean = fractions.iter().sum::<f64>() / k;
    let var = if fractions.len() > 1 {
        fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let std_error = (var / k).sqrt();
    let expected = 1.0 / hash.range as f64;
    let tail_fraction = fractions.iter().filter(|&&f| f > lambda).count() as f64 / k;
    let exponent = domain.len() as f64 * (lambda * (hash.range as f64).log2() - 1.0);
    let tail_bound = (-exponent).exp2();
    Ok(CollisionReport {
        range: hash.range,
        domain_size: domain.len(),
        pairs,
        expected,
        mean,
        std_error,
        within_three_se: (mean - expected).abs() <= 3.0 * std_error,
        lambda,
        tail_fraction,
        tail_bound,
        tail_below_bound: tail_fraction < tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_are_reproducible_and_in_range() {
        let h = HashFamily::new(10, 7, 3).unwrap();
        for u in 0..50 {
            assert_eq!(h.eval(4, &[u]), h.eval(4, &[u]));
            assert!(h.eval(4, &[u]) < 7);
        }
        let other = HashFamily::new(10, 7, 4).unwrap();
        assert!((0..50).any(|u| h.eval(1, &[u]) != other.eval(1, &[u])));
    }

    #[test]
    fn uniform_collisions_and_negative_control() {
        let domain: Vec<u64> = (0..1024).collect();
        let h = HashFamily::new(1000, 4, 9).unwrap();
        let r = hash_collision_check(&h, &domain, 500, 0.5, 1).unwrap();
        assert!((r.mean - 0.25).abs() < 0.01, "{}", r.mean);
        let same = hash_collision_check(&h.clone().with_identical_maps(), &domain, 20, 0.5, 1).unwrap();
        assert_eq!(same.mean, 1.0);
        assert!(!same.passed());
    }
}

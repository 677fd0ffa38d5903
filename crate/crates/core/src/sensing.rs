//! Bayes state estimation from the encoder side: the estimator `h(x, z)`,
//! the per-symbol distortion `d*(x)` and the distortion-feasible sets.

use serde::{Deserialize, Serialize};

use crate::channel::{posterior_state, StateChannel};
use crate::error::{Error, Result};
use crate::prob::Pmf;

/// One-sided slack on every distortion comparison.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Distortion table `d(s, ŝ)`, row `s`, column `ŝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionFn {
    states: usize,
    table: Vec<f64>,
}

impl DistortionFn {
    pub fn new(states: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != states * states {
            return Err(Error::AlphabetMismatch(format!(
                "distortion table needs {states} x {states} entries, got {}",
                table.len()
            )));
        }
        if let Some(i) = table.iter().position(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "distortion entry ({}, {}) = {} is not a nonnegative number",
                i / states,
                i % states,
                table[i]
            )));
        }
        Ok(Self { states, table })
    }

    /// `d(s, ŝ) = [s != ŝ]`.
    pub fn hamming(states: usize) -> Self {
        let table = (0..states * states)
            .map(|i| if i / states == i % states { 0.0 } else { 1.0 })
            .collect();
        Self { states, table }
    }

    pub fn zero(states: usize) -> Self {
        Self {
            states,
            table: vec![0.0; states * states],
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    #[inline]
    pub fn get(&self, s: usize, estimate: usize) -> f64 {
        self.table[s * self.states + estimate]
    }
}

/// The estimator `h(x, z)` with its per-symbol distortions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorTable {
    nx: usize,
    nz: usize,
    map: Vec<usize>,
    reachable: Vec<bool>,
    dstar: Vec<f64>,
}

impl EstimatorTable {
    /// An arbitrary estimator map, with `d*` evaluated for it.
    pub fn from_map(ch: &StateChannel, d: &DistortionFn, map: Vec<usize>) -> Result<Self> {
        let (nx, nz) = (ch.x().size(), ch.z().size());
        if map.len() != nx * nz || map.iter().any(|&s| s >= ch.s().size()) {
            return Err(Error::AlphabetMismatch("estimator map does not fit the channel".into()));
        }
        check_distortion(ch, d)?;
        let reachable = (0..nx * nz)
            .map(|i| feedback_mass(ch, i / nz, i % nz) > 0.0)
            .collect();
        let mut est = Self {
            nx,
            nz,
            map,
            reachable,
            dstar: vec![0.0; nx],
        };
        est.dstar = (0..nx).map(|x| dstar_symbol(&est, ch, d, x)).collect();
        Ok(est)
    }

    #[inline]
    pub fn estimate(&self, x: usize, z: usize) -> usize {
        self.map[x * self.nz + z]
    }

    pub fn is_reachable(&self, x: usize, z: usize) -> bool {
        self.reachable[x * self.nz + z]
    }

    pub fn dstar(&self, x: usize) -> f64 {
        self.dstar[x]
    }

    pub fn dstars(&self) -> &[f64] {
        &self.dstar
    }

    pub fn n_inputs(&self) -> usize {
        self.nx
    }

    pub fn min_dstar(&self) -> f64 {
        self.dstar.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_dstar(&self) -> f64 {
        self.dstar.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `argmin_x d*(x)`, smallest index on ties.
    pub fn sensing_symbol(&self) -> usize {
        let m = self.min_dstar();
        self.dstar.iter().position(|&v| v == m).unwrap_or(0)
    }
}

fn check_distortion(ch: &StateChannel, d: &DistortionFn) -> Result<()> {
    if d.states() != ch.s().size() {
        return Err(Error::AlphabetMismatch(format!(
            "distortion table is {0} x {0}, state alphabet has {1} symbols",
            d.states(),
            ch.s().size()
        )));
    }
    Ok(())
}

/// `P(Z = z | X = x)` under the averaged law.
fn feedback_mass(ch: &StateChannel, x: usize, z: usize) -> f64 {
    ch.s()
        .symbols()
        .map(|s| ch.prior().prob(s) * ch.feedback_given_state(z, x, s))
        .sum()
}

/// `argmin_{ŝ} sum_s w(s) d(s, ŝ)`, smallest index on ties.
fn bayes_choice(weights: &[f64], d: &DistortionFn) -> usize {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for estimate in 0..d.states() {
        let value: f64 = weights
            .iter()
            .enumerate()
            .map(|(s, w)| w * d.get(s, estimate))
            .sum();
        if value < best_value {
            best = estimate;
            best_value = value;
        }
    }
    best
}

pub fn optimal_estimator(ch: &StateChannel, d: &DistortionFn) -> Result<EstimatorTable> {
    check_distortion(ch, d)?;
    let prior_choice = bayes_choice(ch.prior().probs(), d);
    let (nx, nz) = (ch.x().size(), ch.z().size());
    let mut map = Vec::with_capacity(nx * nz);
    for x in 0..nx {
        for z in 0..nz {
            map.push(match posterior_state(ch, x, z) {
                Ok(post) => bayes_choice(post.probs(), d),
                Err(Error::UnreachableObservation { .. }) => prior_choice,
                Err(e) => return Err(e),
            });
        }
    }
    EstimatorTable::from_map(ch, d, map)
}

/// `d*(x) = sum_{s,z} P_S(s) P(z|x,s) d(s, h(x,z))`.
pub fn dstar_symbol(est: &EstimatorTable, ch: &StateChannel, d: &DistortionFn, x: usize) -> f64 {
    let mut total = 0.0;
    for s in ch.s().symbols() {
        for z in ch.z().symbols() {
            total += ch.prior().prob(s) * ch.feedback_given_state(z, x, s) * d.get(s, est.estimate(x, z));
        }
    }
    total
}

/// `d*(P) = sum_x P(x) d*(x)`.
pub fn dstar_dist(est: &EstimatorTable, px: &Pmf) -> f64 {
    px.probs().iter().zip(est.dstars()).map(|(p, d)| p * d).sum()
}

/// `X_D = {x : d*(x) <= D}`, with the same slack as [`feasible_check`] so
/// that a point mass is feasible exactly when its symbol is.
pub fn feasible_symbols(est: &EstimatorTable, budget: f64) -> Vec<usize> {
    (0..est.n_inputs())
        .filter(|&x| est.dstar(x) <= budget + FEASIBILITY_SLACK)
        .collect()
}

pub fn feasible_check(est: &EstimatorTable, px: &Pmf, budget: f64) -> bool {
    dstar_dist(est, px) <= budget + FEASIBILITY_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::compose_channel;
    use crate::prob::{Alphabet, CondKernel};

    fn bit(name: &str) -> Alphabet {
        Alphabet::new(name, 2).unwrap()
    }

    fn binary(ps: f64, pn: f64) -> StateChannel {
        let forward = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0] * i[1]).unwrap();
        let feedback =
            CondKernel::from_fn(vec![bit("Y")], bit("Z"), |i, z| if i[0] == z { 1.0 - pn } else { pn }).unwrap();
        compose_channel(&forward, &feedback, &Pmf::bernoulli(bit("S"), ps).unwrap()).unwrap()
    }

    #[test]
    fn binary_estimator_and_distortions() {
        let ch = binary(0.2, 0.1);
        let est = optimal_estimator(&ch, &DistortionFn::hamming(2)).unwrap();
        assert_eq!(est.estimate(1, 1), 1);
        assert_eq!(est.estimate(1, 0), 0);
        assert_eq!(est.estimate(0, 0), 0);
        assert_eq!(est.estimate(0, 1), 0);
        assert!((est.dstar(0) - 0.2).abs() < 1e-15);
        assert!((est.dstar(1) - 0.1).abs() < 1e-15);
        let half = Pmf::bernoulli(bit("X"), 0.5).unwrap();
        assert!((dstar_dist(&est, &half) - 0.15).abs() < 1e-15);
        assert!(feasible_check(&est, &half, 0.15));
        assert!(!feasible_check(&est, &Pmf::point_mass(bit("X"), 0).unwrap(), 0.15));
        assert_eq!(feasible_symbols(&est, 0.15), vec![1]);
        assert_eq!(feasible_symbols(&est, 0.5), vec![0, 1]);
        assert!(feasible_symbols(&est, 0.05).is_empty());
    }

    #[test]
    fn zero_distortion_picks_index_zero() {
        let ch = binary(0.3, 0.2);
        let est = optimal_estimator(&ch, &DistortionFn::zero(2)).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                assert_eq!(est.estimate(x, z), 0);
            }
            assert_eq!(est.dstar(x), 0.0);
        }
    }

    #[test]
    fn state_independent_channel_uses_prior_map() {
        let forward = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0]).unwrap();
        let feedback = CondKernel::deterministic(vec![bit("Y")], bit("Z"), |i| i[0]).unwrap();
        let ch = compose_channel(&forward, &feedback, &Pmf::bernoulli(bit("S"), 0.3).unwrap()).unwrap();
        let est = optimal_estimator(&ch, &DistortionFn::hamming(2)).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                assert_eq!(est.estimate(x, z), 0);
            }
            assert!((est.dstar(x) - 0.3).abs() < 1e-15);
        }
        assert!(!est.is_reachable(0, 1));
    }

    #[test]
    fn negative_distortion_rejected() {
        assert!(DistortionFn::new(2, vec![0.0, -1.0, 1.0, 0.0]).is_err());
    }
}

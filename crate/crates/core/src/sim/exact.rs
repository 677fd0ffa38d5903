//! Exact error probabilities of a deterministic-scheme instance by summing
//! over every output and feedback sequence of the first phase.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dif::DifPlan;
use super::type2_pairs;
use crate::error::{Error, Result};
use crate::prob::MixedRadix;

/// Largest `n` accepted by [`exact_dif_errors`].
pub const EXACT_N_MAX: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactErrors {
    /// Expected Type I error under the trial's message distribution.
    pub lambda1: f64,
    /// Expected Type II error under the trial's pair distribution.
    pub lambda2: f64,
    /// Per message, when `N <= 64`.
    pub lambda1_per_message: Vec<f64>,
    pub lambda2_max: f64,
    /// `P(decoded common randomness != encoded)`.
    pub common_randomness_error: f64,
}

/// Sums the scheme's error events over all `(y^n, z^n)` of the first phase
/// and the exact transition matrices of both code blocks.
pub fn exact_dif_errors(plan: &DifPlan) -> Result<ExactErrors> {
    let n = plan.cfg.n;
    if n > EXACT_N_MAX {
        return Err(Error::EnumerationBound { n, n_max: EXACT_N_MAX });
    }
    let x = plan.aux.x_star;
    let (ny, nz) = (plan.avg.y().size(), plan.avg.z().size());
    let m_s = plan.codebook.len();
    let l = plan.n_bins;
    let ys: Vec<Vec<usize>> = MixedRadix::new(&vec![ny; n]).collect();
    let zs: Vec<Vec<usize>> = MixedRadix::new(&vec![nz; n]).collect();
    let enc: Vec<usize> = zs.par_iter().map(|z| plan.common_index(z).0).collect();
    let dec: Vec<Vec<usize>> = ys
        .par_iter()
        .map(|y| (0..l).map(|b| plan.decode_common(y, b).0).collect())
        .collect();
    let t_bin = match &plan.bin_code {
        Some(c) => c.transition(&plan.forward),
        None => vec![1.0],
    };
    let pyz: Vec<f64> = (0..ny * nz).map(|k| plan.avg.prob(x, k / nz, k % nz)).collect();
    // G[m][m'] = P(encoded m, decoded m')
    let g = ys
        .par_iter()
        .enumerate()
        .fold(
            || vec![0.0; m_s * m_s],
            |mut g, (iy, y)| {
                for (iz, z) in zs.iter().enumerate() {
                    let p: f64 = y.iter().zip(z).map(|(&a, &b)| pyz[a * nz + b]).product();
                    if p == 0.0 {
                        continue;
                    }
                    let m = enc[iz];
                    let bin = plan.bins[m];
                    for (b, &m_hat) in dec[iy].iter().enumerate() {
                        g[m * m_s + m_hat] += p * t_bin[bin * l + b];
                    }
                }
                g
            },
        )
        .reduce(
            || vec![0.0; m_s * m_s],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let t_hash = plan.hash_code.transition(&plan.forward);
    let range = plan.hash_code.size();
    let cr_error: f64 = (0..m_s * m_s)
        .filter(|k| plan.codebook[k / m_s] != plan.codebook[k % m_s])
        .map(|k| g[k])
        .sum();
    let map = |i: u64| -> Vec<usize> { (0..m_s).map(|m| plan.hash.eval(i, &plan.key(m)) as usize).collect() };
    let accept = |fi: &[usize], fj: &[usize]| -> f64 {
        let mut p = 0.0;
        for m in 0..m_s {
            let row = &t_hash[fi[m] * range..(fi[m] + 1) * range];
            for m_hat in 0..m_s {
                let gv = g[m * m_s + m_hat];
                if gv != 0.0 {
                    p += gv * row[fj[m_hat]];
                }
            }
        }
        p
    };
    let n_msg = plan.cfg.messages;
    match type2_pairs(n_msg, plan.cfg.seed) {
        None => {
            let maps: Vec<Vec<usize>> = (0..n_msg).map(map).collect();
            let l1: Vec<f64> = maps.iter().map(|f| 1.0 - accept(f, f)).collect();
            let mut l2_sum = 0.0;
            let mut l2_max: f64 = 0.0;
            for i in 0..n_msg {
                for j in (0..n_msg).filter(|&j| j != i) {
                    let v = accept(&maps[i as usize], &maps[j as usize]);
                    l2_sum += v;
                    l2_max = l2_max.max(v);
                }
            }
            let pairs = (n_msg * (n_msg - 1)) as f64;
            Ok(ExactErrors {
                lambda1: l1.iter().sum::<f64>() / n_msg as f64,
                lambda2: if n_msg > 1 { l2_sum / pairs } else { 0.0 },
                lambda1_per_message: l1,
                lambda2_max: l2_max,
                common_randomness_error: cr_error,
            })
        }
        Some(pairs) => {
            let trials = plan.cfg.trials;
            let mut weight = vec![0usize; pairs.len()];
            for t in 0..trials {
                weight[t % pairs.len()] += 1;
            }
            let (mut l1, mut l2, mut l2_max) = (0.0, 0.0, 0.0f64);
            for (&(i, j), &w) in pairs.iter().zip(&weight) {
                if w == 0 {
                    continue;
                }
                let (fi, fj) = (map(i), map(j));
                let v = accept(&fi, &fj);
                l1 += w as f64 * (1.0 - accept(&fi, &fi));
                l2 += w as f64 * v;
                l2_max = l2_max.max(v);
            }
            Ok(ExactErrors {
                lambda1: l1 / trials as f64,
                lambda2: l2 / trials as f64,
                lambda1_per_message: Vec::new(),
                lambda2_max: l2_max,
                common_randomness_error: cr_error,
            })
        }
    }
}

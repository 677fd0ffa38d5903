//! Entropy, conditional mutual information and channel capacity, in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{CondKernel, JointTable, Pmf};

/// Round-off floor below which a negative information value is a bug.
pub const NEGATIVE_FLOOR: f64 = -1e-10;
pub const DEFAULT_BA_TOL: f64 = 1e-9;
pub const DEFAULT_BA_MAX_ITER: usize = 100_000;

/// Display unit. Every computation is done in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InfoUnit {
    #[default]
    Bits,
    Nats,
}

impl InfoUnit {
    pub fn from_bits(self, bits: f64) -> f64 {
        match self {
            InfoUnit::Bits => bits,
            InfoUnit::Nats => bits * std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InfoUnit::Bits => "bits",
            InfoUnit::Nats => "nats",
        }
    }
}

/// Shannon entropy of an unnormalized-free probability vector, `0 log 0 = 0`.
#[inline]
pub fn entropy_of(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Binary entropy `h_b(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// Binary convolution `p * q = p(1-q) + (1-p)q`.
pub fn binary_convolution(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + (1.0 - p) * q
}

/// Entropy of the marginal on `vars`; the empty set has entropy zero.
pub fn entropy(jt: &JointTable, vars: &[&str]) -> Result<f64> {
    if vars.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy_of(jt.marginal(vars)?.data()))
}

fn disjoint(sets: &[&[&str]]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if let Some(v) = a.iter().find(|v| b.contains(v)) {
                return Err(Error::InvalidParameter(format!(
                    "variable `{v}` appears in two argument sets"
                )));
            }
        }
    }
    Ok(())
}

/// Clamps round-off negatives to zero, rejecting anything below the floor.
pub fn clamp_information(value: f64) -> Result<f64> {
    if value < NEGATIVE_FLOOR {
        Err(Error::NegativeInformation(value))
    } else {
        Ok(value.max(0.0))
    }
}

/// `I(A;B|G) = H(A,G) + H(B,G) - H(A,B,G) - H(G)`.
pub fn cond_mutual_info(jt: &JointTable, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    disjoint(&[a, b, given])?;
    let ag: Vec<&str> = a.iter().chain(given).copied().collect();
    let bg: Vec<&str> = b.iter().chain(given).copied().collect();
    let abg: Vec<&str> = a.iter().chain(b).chain(given).copied().collect();
    let value = entropy(jt, &ag)? + entropy(jt, &bg)? - entropy(jt, &abg)? - entropy(jt, given)?;
    clamp_information(value)
}

pub fn mutual_info(jt: &JointTable, a: &[&str], b: &[&str]) -> Result<f64> {
    cond_mutual_info(jt, a, b, &[])
}

/// `I(A;B | X = x)`, the mutual information of the slice at `X = x`.
pub fn cond_mutual_info_at(jt: &JointTable, a: &[&str], b: &[&str], var: &str, value: usize) -> Result<f64> {
    let slice = jt.slice(var, value)?;
    cond_mutual_info(&slice, a, b, &[])
}

/// Mutual information as a relative entropy `D(P_ABG || P_A|G P_B|G P_G)`.
///
/// Independent of the entropy-combination route above; tests use it as the
/// reference value.
pub mod kl {
    use super::*;

    pub fn cond_mutual_info(jt: &JointTable, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        disjoint(&[a, b, given])?;
        let order: Vec<&str> = a.iter().chain(b).chain(given).copied().collect();
        let joint = jt.marginal(&order)?;
        let na: usize = a.iter().map(|v| jt.dim(v)).product::<Result<usize>>()?;
        let nb: usize = b.iter().map(|v| jt.dim(v)).product::<Result<usize>>()?;
        let ng: usize = given.iter().map(|v| jt.dim(v)).product::<Result<usize>>()?;
        // The marginal is laid out as [a][b][g].
        let p = |ia: usize, ib: usize, ig: usize| joint.data()[(ia * nb + ib) * ng + ig];
        let mut pg = vec![0.0; ng];
        let mut pag = vec![0.0; na * ng];
        let mut pbg = vec![0.0; nb * ng];
        for ia in 0..na {
            for ib in 0..nb {
                for ig in 0..ng {
                    let v = p(ia, ib, ig);
                    pg[ig] += v;
                    pag[ia * ng + ig] += v;
                    pbg[ib * ng + ig] += v;
                }
            }
        }
        let mut total = 0.0;
        for ia in 0..na {
            for ib in 0..nb {
                for ig in 0..ng {
                    let v = p(ia, ib, ig);
                    if v > 0.0 {
                        total += v * (v * pg[ig] / (pag[ia * ng + ig] * pbg[ib * ng + ig])).log2();
                    }
                }
            }
        }
        Ok(total)
    }
}

/// Capacity estimate with the Blahut-Arimoto bracketing certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    /// Mutual information achieved by `argmax`, in bits.
    pub capacity: f64,
    pub argmax: Pmf,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Per-input divergences `D(W(.|x) || q)` in nats.
fn divergences(kernel: &[f64], width: usize, p: &[f64], out: &mut [f64]) {
    let mut q = vec![0.0; width];
    for (x, &px) in p.iter().enumerate() {
        for (y, qy) in q.iter_mut().enumerate() {
            *qy += px * kernel[x * width + y];
        }
    }
    for (x, d) in out.iter_mut().enumerate() {
        let row = &kernel[x * width..(x + 1) * width];
        *d = row
            .iter()
            .zip(&q)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &qy)| w * (w / qy).ln())
            .sum();
    }
}

/// One fixed-multiplier run maximizing `I(p) + p·reward` (nats) from `p`.
///
/// Returns (lower, upper, iterations) with the gap measured in nats.
fn blahut_arimoto_run(
    kernel: &[f64],
    width: usize,
    reward: &[f64],
    p: &mut [f64],
    tol_nats: f64,
    max_iter: usize,
) -> Result<(f64, f64, usize)> {
    let n = p.len();
    let mut d = vec![0.0; n];
    let mut gap = f64::INFINITY;
    for it in 0..max_iter {
        divergences(kernel, width, p, &mut d);
        let score: Vec<f64> = d.iter().zip(reward).map(|(a, b)| a + b).collect();
        let lower: f64 = p.iter().zip(&score).map(|(a, b)| a * b).sum();
        let upper = score
            .iter()
            .zip(p.iter())
            .filter(|(_, &px)| px > 0.0)
            .map(|(s, _)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        gap = upper - lower;
        if gap < tol_nats {
            return Ok((lower, upper, it));
        }
        let shift = upper;
        let mut total = 0.0;
        for (px, s) in p.iter_mut().zip(&score) {
            *px *= (s - shift).exp();
            total += *px;
        }
        p.iter_mut().for_each(|px| *px /= total);
    }
    Err(Error::NoConvergence {
        gap: gap / std::f64::consts::LN_2,
        iterations: max_iter,
    })
}

fn kernel_parts(kernel: &CondKernel) -> Result<(usize, usize)> {
    if kernel.inputs().len() != 1 {
        return Err(Error::InvalidParameter("capacity needs a single-input kernel".into()));
    }
    Ok((kernel.inputs()[0].size(), kernel.output().size()))
}

/// Capacity of a discrete memoryless channel.
///
/// Stops when the upper iterate `max_x D(W_x||q)` and the lower iterate
/// `I(p;W)` are closer than `tol` bits.
pub fn blahut_arimoto_capacity(kernel: &CondKernel, tol: f64, max_iter: usize) -> Result<Capacity> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (nx, ny) = kernel_parts(kernel)?;
    let mut p = vec![1.0 / nx as f64; nx];
    let zero = vec![0.0; nx];
    let tol_nats = tol * std::f64::consts::LN_2;
    let (lower, upper, iterations) = blahut_arimoto_run(kernel.table(), ny, &zero, &mut p, tol_nats, max_iter)?;
    let lower = (lower / std::f64::consts::LN_2).max(0.0);
    let upper = (upper / std::f64::consts::LN_2).max(lower);
    Ok(Capacity {
        capacity: lower,
        argmax: pmf_from(kernel, p)?,
        lower,
        upper,
        iterations,
    })
}

fn pmf_from(kernel: &CondKernel, mut p: Vec<f64>) -> Result<Pmf> {
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    let drift = p.iter().sum::<f64>() - 1.0;
    if let Some(m) = p.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *m -= drift;
    }
    Pmf::new(kernel.inputs()[0].clone(), p)
}

/// Mutual information of an input pmf through a single-input kernel, bits.
pub fn input_output_information(kernel: &[f64], width: usize, p: &[f64]) -> f64 {
    let mut d = vec![0.0; p.len()];
    divergences(kernel, width, p, &mut d);
    (p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / std::f64::consts::LN_2).max(0.0)
}

/// Result of maximizing `I(X;Y) + sum_x p(x) reward(x)` under a linear cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedOptimum {
    /// Objective value in bits.
    pub value: f64,
    pub argmax: Pmf,
    /// Cost of `argmax`.
    pub cost: f64,
    /// Lagrange multiplier on the cost, bits per unit cost.
    pub multiplier: f64,
    /// Frank-Wolfe duality gap at `argmax`; bounds the suboptimality.
    pub certificate_gap: f64,
}

/// Blahut-Arimoto with a linear reward and a linear cost budget.
///
/// Maximizes `I(p;W) + p·reward` over `{p : p·cost <= budget}`. The cost
/// constraint is handled by bisection on the multiplier; when the optimal
/// multiplier sits at a kink the two bracketing solutions are mixed to spend
/// the budget exactly. Inner runs that hit `max_iter` are kept; the
/// returned `certificate_gap` bounds the suboptimality of the final input.
/// Returns `None` when the feasible set is empty.
pub fn blahut_arimoto_constrained(
    kernel: &CondKernel,
    reward: &[f64],
    cost: &[f64],
    budget: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Option<ConstrainedOptimum>> {
    let (nx, ny) = kernel_parts(kernel)?;
    if reward.len() != nx || cost.len() != nx {
        return Err(Error::AlphabetMismatch("reward/cost length must equal |X|".into()));
    }
    let min_cost = cost.iter().copied().fold(f64::INFINITY, f64::min);
    if budget < min_cost - crate::sensing::FEASIBILITY_SLACK {
        return Ok(None);
    }
    let ln2 = std::f64::consts::LN_2;
    let tol_nats = tol * ln2;
    let w = kernel.table();
    let reward_nats: Vec<f64> = reward.iter().map(|r| r * ln2).collect();
    let eval = |p: &[f64]| input_output_information(w, ny, p) + p.iter().zip(reward).map(|(a, b)| a * b).sum::<f64>();
    let spend = |p: &[f64]| p.iter().zip(cost).map(|(a, b)| a * b).sum::<f64>();

    let active: Vec<bool> = cost
        .iter()
        .map(|&c| c <= min_cost + crate::sensing::FEASIBILITY_SLACK || budget > min_cost + crate::sensing::FEASIBILITY_SLACK)
        .collect();
    let start = |p: &mut Vec<f64>| {
        let k = active.iter().filter(|&&a| a).count() as f64;
        for (px, &a) in p.iter_mut().zip(&active) {
            *px = if a { 1.0 / k } else { 0.0 };
        }
    };
    let run_at = |s: f64, p: &mut Vec<f64>| -> Result<()> {
        let r: Vec<f64> = reward_nats.iter().zip(cost).map(|(r, c)| r - s * c).collect();
        match blahut_arimoto_run(w, ny, &r, p, tol_nats * 1e-2, max_iter) {
            Err(Error::NoConvergence { .. }) => Ok(()),
            other => other.map(|_| ()),
        }
    };

    let mut p = vec![0.0; nx];
    start(&mut p);
    run_at(0.0, &mut p)?;
    let (p, multiplier) = if spend(&p) <= budget + crate::sensing::FEASIBILITY_SLACK {
        (p, 0.0)
    } else {
        // Bracket the multiplier: cost(p_s) is nonincreasing in s.
        let mut lo = 0.0;
        let mut p_lo = p.clone();
        let mut hi = 1.0;
        let mut p_hi = p.clone();
        loop {
            run_at(hi, &mut p_hi)?;
            if spend(&p_hi) <= budget {
                break;
            }
            lo = hi;
            p_lo.clone_from(&p_hi);
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::NoConvergence {
                    gap: spend(&p_hi) - budget,
                    iterations: max_iter,
                });
            }
        }
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.max(1.0) || (budget - spend(&p_hi)).abs() < 1e-15 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let mut p_mid = p_hi.clone();
            run_at(mid, &mut p_mid)?;
            if spend(&p_mid) <= budget {
                hi = mid;
                p_hi = p_mid;
            } else {
                lo = mid;
                p_lo = p_mid;
            }
        }
        let (c_lo, c_hi) = (spend(&p_lo), spend(&p_hi));
        let p = if c_lo > c_hi + 1e-15 && c_hi < budget {
            let t = ((budget - c_hi) / (c_lo - c_hi)).clamp(0.0, 1.0);
            p_lo.iter().zip(&p_hi).map(|(a, b)| t * a + (1.0 - t) * b).collect()
        } else {
            p_hi
        };
        (p, hi / ln2)
    };
    let argmax = pmf_from(kernel, p)?;
    let probs = argmax.probs().to_vec();
    let certificate_gap = frank_wolfe_gap(w, ny, reward, cost, budget, &probs);
    Ok(Some(ConstrainedOptimum {
        value: eval(&probs),
        cost: spend(&probs),
        argmax,
        multiplier,
        certificate_gap,
    }))
}

/// `max_{v in P} grad·(v - p)` over the polytope `{simplex, cost <= budget}`.
pub(crate) fn frank_wolfe_gap(w: &[f64], width: usize, reward: &[f64], cost: &[f64], budget: f64, p: &[f64]) -> f64 {
    let mut d = vec![0.0; p.len()];
    divergences(w, width, p, &mut d);
    let grad: Vec<f64> = d
        .iter()
        .zip(reward)
        .map(|(d, r)| d / std::f64::consts::LN_2 + r)
        .collect();
    let at_p: f64 = grad.iter().zip(p).map(|(g, q)| g * q).sum();
    let best = crate::simplex::maximize_linear(&grad, cost, budget).unwrap_or(at_p);
    (best - at_p).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;

    fn bsc(p: f64) -> CondKernel {
        let a = Alphabet::new("X", 2).unwrap();
        let b = Alphabet::new("Y", 2).unwrap();
        CondKernel::new(vec![a], b, vec![1.0 - p, p, p, 1.0 - p]).unwrap()
    }

    fn table(data: Vec<f64>, dims: Vec<usize>, names: &[&str]) -> JointTable {
        JointTable::new(names.iter().map(|s| s.to_string()).collect(), dims, data).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let b = table(vec![0.5, 0.5], vec![2], &["A"]);
        assert!((entropy(&b, &["A"]).unwrap() - 1.0).abs() < 1e-15);
        let pm = table(vec![1.0, 0.0], vec![2], &["A"]);
        assert_eq!(entropy(&pm, &["A"]).unwrap(), 0.0);
        // -0.26 log2 0.26 - 0.74 log2 0.74
        assert!((binary_entropy(0.26) - 0.826_746_372_492_863_4).abs() < 1e-12);
    }

    #[test]
    fn copy_variable_information_is_entropy() {
        let jt = table(vec![0.3, 0.0, 0.0, 0.7], vec![2, 2], &["A", "B"]);
        let i = mutual_info(&jt, &["A"], &["B"]).unwrap();
        assert!((i - binary_entropy(0.3)).abs() < 1e-14);
        let ind = table(vec![0.06, 0.24, 0.14, 0.56], vec![2, 2], &["A", "B"]);
        assert!(mutual_info(&ind, &["A"], &["B"]).unwrap() < 1e-15);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let jt = table(vec![0.25; 4], vec![2, 2], &["A", "B"]);
        assert!(cond_mutual_info(&jt, &["A"], &["A"], &[]).is_err());
    }

    #[test]
    fn negative_below_floor_is_error() {
        assert!(clamp_information(-1e-11).unwrap() == 0.0);
        assert!(clamp_information(-1e-9).is_err());
    }

    #[test]
    fn bsc_capacity() {
        let c = blahut_arimoto_capacity(&bsc(0.1), 1e-9, 100_000).unwrap();
        assert!((c.capacity - (1.0 - binary_entropy(0.1))).abs() < 1e-9);
        assert!(c.lower <= c.capacity && c.capacity <= c.upper);
    }

    #[test]
    fn useless_and_noiseless_channels() {
        let a = Alphabet::new("X", 3).unwrap();
        let b = Alphabet::new("Y", 2).unwrap();
        let useless = CondKernel::new(vec![a], b, vec![0.3, 0.7, 0.3, 0.7, 0.3, 0.7]).unwrap();
        assert!(blahut_arimoto_capacity(&useless, 1e-9, 1000).unwrap().capacity < 1e-12);
        let c = blahut_arimoto_capacity(&bsc(0.0), 1e-9, 1000).unwrap();
        assert!((c.capacity - 1.0).abs() < 1e-12);
        assert!((c.argmax.prob(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_carries_gap() {
        // Z-channel: uniform start is not optimal, one iteration is not enough.
        let a = Alphabet::new("X", 2).unwrap();
        let b = Alphabet::new("Y", 2).unwrap();
        let z = CondKernel::new(vec![a], b, vec![1.0, 0.0, 0.5, 0.5]).unwrap();
        match blahut_arimoto_capacity(&z, 1e-12, 1) {
            Err(Error::NoConvergence { gap, iterations: 1 }) => assert!(gap > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constrained_matches_unconstrained_when_budget_is_slack() {
        let k = bsc(0.1);
        let r = blahut_arimoto_constrained(&k, &[0.0, 0.0], &[0.0, 1.0], 1.0, 1e-10, 100_000)
            .unwrap()
            .unwrap();
        assert!((r.value - (1.0 - binary_entropy(0.1))).abs() < 1e-9);
        assert_eq!(r.multiplier, 0.0);
    }

    #[test]
    fn constrained_binding_budget() {
        // BSC with cost on symbol 1: optimum spends the budget exactly and
        // equals h_b(0.1 * (1 - b) + 0.9 b) - h_b(0.1) evaluated at P(1) = b.
        let k = bsc(0.1);
        let b = 0.2;
        let r = blahut_arimoto_constrained(&k, &[0.0, 0.0], &[0.0, 1.0], b, 1e-10, 100_000)
            .unwrap()
            .unwrap();
        let expect = binary_entropy(binary_convolution(b, 0.1)) - binary_entropy(0.1);
        assert!((r.cost - b).abs() < 1e-9, "cost {}", r.cost);
        assert!((r.value - expect).abs() < 1e-8, "{} vs {}", r.value, expect);
        assert!(r.certificate_gap < 1e-7);
    }

    #[test]
    fn infeasible_budget() {
        let k = bsc(0.1);
        assert!(blahut_arimoto_constrained(&k, &[0.0; 2], &[0.5, 1.0], 0.2, 1e-9, 1000)
            .unwrap()
            .is_none());
    }
}

//! Conditional typical sets over a context sequence, with exact counting
//! and exact probabilities computed type by type.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumeration bound for binary `U`; larger alphabets scale it down so the
/// search space stays near `2^22`.
pub const DEFAULT_N_MAX: usize = 22;

const CELL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `|N(c,u)/N(c) - P(u|c)| <= eps` for every context value that occurs.
    #[default]
    Conditional,
    /// `|N(c,u)/n - P(c,u)| <= eps * P(c,u)` for every cell.
    Robust,
    /// `|N(c,u)/n - P(c,u)| <= eps` for every cell.
    Strong,
}

impl Convention {
    pub fn label(self) -> &'static str {
        match self {
            Convention::Conditional => "conditional",
            Convention::Robust => "robust",
            Convention::Strong => "strong",
        }
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conditional" => Ok(Convention::Conditional),
            "robust" => Ok(Convention::Robust),
            "strong" => Ok(Convention::Strong),
            other => Err(Error::InvalidParameter(format!(
                "unknown typicality convention `{other}` (expected conditional, robust or strong)"
            ))),
        }
    }
}

/// Reference law `P(c) P(u|c)` of a context `C` and an auxiliary `U`,
/// a tolerance and a blocklength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalitySpec {
    pub epsilon: f64,
    pub convention: Convention,
    pub n: usize,
    pub n_max: usize,
    /// `P(c)`.
    pub context: Vec<f64>,
    /// `P(u|c)`, row-major with `nu` columns.
    pub cond: Vec<f64>,
    pub nu: usize,
}

impl TypicalitySpec {
    pub fn new(context: Vec<f64>, cond: Vec<f64>, nu: usize, epsilon: f64, convention: Convention, n: usize) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if nu == 0 || cond.len() != context.len() * nu {
            return Err(Error::AlphabetMismatch(format!(
                "conditional table has {} entries for {} contexts and |U| = {nu}",
                cond.len(),
                context.len()
            )));
        }
        for (row, r) in cond.chunks(nu).enumerate() {
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || r.iter().any(|&v| v < 0.0) {
                return Err(Error::NotStochastic {
                    what: "P(U|context)".into(),
                    row,
                    sum,
                });
            }
        }
        let n_max = default_n_max(nu);
        Ok(Self {
            epsilon,
            convention,
            n,
            n_max,
            context,
            cond,
            nu,
        })
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn nc(&self) -> usize {
        self.context.len()
    }

    pub fn joint(&self, c: usize, u: usize) -> f64 {
        self.context[c] * self.cond[c * self.nu + u]
    }

    pub fn check_enumerable(&self) -> Result<()> {
        if self.n > self.n_max {
            return Err(Error::EnumerationBound {
                n: self.n,
                n_max: self.n_max,
            });
        }
        Ok(())
    }

    /// Whether `counts` (over `U`) is an admissible split of the `n_c`
    /// positions carrying context value `c`.
    pub fn cell_ok(&self, c: usize, n_c: usize, counts: &[usize]) -> bool {
        self.cell_excess(c, n_c, counts) <= CELL_SLACK
    }

    /// Largest amount by which a cell of context value `c` misses its
    /// tolerance; nonpositive when the split is admissible.
    pub fn cell_excess(&self, c: usize, n_c: usize, counts: &[usize]) -> f64 {
        let n = self.n as f64;
        let eps = self.epsilon;
        let worst = |f: &dyn Fn(usize, usize) -> f64| {
            counts
                .iter()
                .enumerate()
                .map(|(u, &k)| f(u, k))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        match self.convention {
            Convention::Conditional => {
                if n_c == 0 {
                    return f64::NEG_INFINITY;
                }
                worst(&|u, k| (k as f64 / n_c as f64 - self.cond[c * self.nu + u]).abs() - eps)
            }
            Convention::Robust => worst(&|u, k| {
                let p = self.joint(c, u);
                (k as f64 / n - p).abs() - eps * p
            }),
            Convention::Strong => worst(&|u, k| (k as f64 / n - self.joint(c, u)).abs() - eps),
        }
    }

    /// Admissible `U`-compositions of `n_c` positions with context `c`.
    pub fn admissible(&self, c: usize, n_c: usize) -> Vec<Vec<usize>> {
        compositions(n_c, self.nu)
            .into_iter()
            .filter(|k| self.cell_ok(c, n_c, k))
            .collect()
    }

    pub fn is_typical(&self, context: &[usize], u: &[usize]) -> bool {
        self.excess(context, u) <= CELL_SLACK
    }

    /// Largest cell excess of `u` against `context`.
    pub fn excess(&self, context: &[usize], u: &[usize]) -> f64 {
        let nc = self.nc();
        let mut joint = vec![0usize; nc * self.nu];
        for (&c, &v) in context.iter().zip(u) {
            joint[c * self.nu + v] += 1;
        }
        (0..nc)
            .map(|c| {
                let row = &joint[c * self.nu..(c + 1) * self.nu];
                self.cell_excess(c, row.iter().sum(), row)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `log2 |T(context)|` from the context type alone; `None` if empty.
    pub fn log2_count(&self, context_counts: &[usize]) -> Option<f64> {
        let mut total = 0.0;
        for (c, &n_c) in context_counts.iter().enumerate() {
            let terms: Vec<f64> = self.admissible(c, n_c).iter().map(|k| ln_multinomial(n_c, k)).collect();
            total += log_sum_exp(&terms)?;
        }
        Some(total / std::f64::consts::LN_2)
    }

    /// Probability that `U^n` drawn from `P(u|c)` letter by letter is
    /// typical with a context of the given type.
    pub fn conditional_mass(&self, context_counts: &[usize]) -> f64 {
        self.mass(context_counts, |c, u| self.cond[c * self.nu + u])
    }

    /// Probability that `U^n` drawn i.i.d. from `pu` is typical with a
    /// context of the given type.
    pub fn marginal_mass(&self, context_counts: &[usize], pu: &[f64]) -> f64 {
        self.mass(context_counts, |_, u| pu[u])
    }

    fn mass(&self, context_counts: &[usize], p: impl Fn(usize, usize) -> f64) -> f64 {
        let mut total = 0.0;
        for (c, &n_c) in context_counts.iter().enumerate() {
            let terms: Vec<f64> = self
                .admissible(c, n_c)
                .iter()
                .filter_map(|k| {
                    let mut l = ln_multinomial(n_c, k);
                    for (u, &ku) in k.iter().enumerate() {
                        if ku > 0 {
                            let pu = p(c, u);
                            if pu <= 0.0 {
                                return None;
                            }
                            l += ku as f64 * pu.ln();
                        }
                    }
                    Some(l)
                })
                .collect();
            match log_sum_exp(&terms) {
                Some(l) => total += l,
                None => return 0.0,
            }
        }
        total.exp()
    }

    /// Probability of a context type under i.i.d. `P(c)`.
    pub fn type_probability(&self, context_counts: &[usize]) -> f64 {
        let mut l = ln_multinomial(self.n, context_counts);
        for (c, &k) in context_counts.iter().enumerate() {
            if k > 0 {
                if self.context[c] <= 0.0 {
                    return 0.0;
                }
                l += k as f64 * self.context[c].ln();
            }
        }
        l.exp()
    }

    /// Every context type of length `n`.
    pub fn context_types(&self) -> Vec<Vec<usize>> {
        compositions(self.n, self.nc())
    }
}

fn default_n_max(nu: usize) -> usize {
    if nu <= 2 {
        DEFAULT_N_MAX
    } else {
        ((DEFAULT_N_MAX as f64) / (nu as f64).log2()).floor() as usize
    }
}

/// The exact set of `u^n` typical with `context`, in lexicographic order.
pub fn conditional_typical_set(spec: &TypicalitySpec, context: &[usize]) -> Result<Vec<Vec<usize>>> {
    spec.check_enumerable()?;
    if context.len() != spec.n {
        return Err(Error::InvalidParameter(format!(
            "context has length {} but the blocklength is {}",
            context.len(),
            spec.n
        )));
    }
    if let Some(&c) = context.iter().find(|&&c| c >= spec.nc()) {
        return Err(Error::InvalidParameter(format!("context symbol {c} is out of range")));
    }
    let nc = spec.nc();
    let positions: Vec<Vec<usize>> = (0..nc)
        .map(|c| (0..spec.n).filter(|&t| context[t] == c).collect())
        .collect();
    let mut out: Vec<Vec<usize>> = vec![vec![0; spec.n]];
    for c in 0..nc {
        let pos = &positions[c];
        let mut fills: Vec<Vec<usize>> = Vec::new();
        for k in spec.admissible(c, pos.len()) {
            arrangements(&k, &mut Vec::with_capacity(pos.len()), &mut k.clone(), &mut fills);
        }
        let mut next = Vec::with_capacity(out.len() * fills.len());
        for base in &out {
            for f in &fills {
                let mut u = base.clone();
                for (&t, &v) in pos.iter().zip(f) {
                    u[t] = v;
                }
                next.push(u);
            }
        }
        out = next;
        if out.is_empty() {
            break;
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyTypicalSet {
            n: spec.n,
            epsilon: spec.epsilon,
        });
    }
    out.sort();
    Ok(out)
}

fn arrangements(counts: &[usize], cur: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let total: usize = counts.iter().sum();
    if cur.len() == total {
        out.push(cur.clone());
        return;
    }
    for v in 0..left.len() {
        if left[v] > 0 {
            left[v] -= 1;
            cur.push(v);
            arrangements(counts, cur, left, out);
            cur.pop();
            left[v] += 1;
        }
    }
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative terms.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == parts {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub(crate) fn ln_multinomial(n: usize, k: &[usize]) -> f64 {
    ln_factorial(n) - k.iter().map(|&v| ln_factorial(v)).sum::<f64>()
}

fn log_sum_exp(terms: &[f64]) -> Option<f64> {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return None;
    }
    Some(m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::MixedRadix;

    fn binary_spec(convention: Convention, eps: f64, n: usize) -> TypicalitySpec {
        TypicalitySpec::new(vec![0.74, 0.26], vec![0.9, 0.1, 0.15, 0.85], 2, eps, convention, n).unwrap()
    }

    fn brute_force(spec: &TypicalitySpec, ctx: &[usize]) -> Vec<Vec<usize>> {
        MixedRadix::new(&vec![spec.nu; spec.n])
            .filter(|u| spec.is_typical(ctx, u))
            .collect()
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let ctx = [0, 1, 0, 0, 1, 0, 0, 0, 1, 0];
        for conv in [Convention::Conditional, Convention::Robust, Convention::Strong] {
            for eps in [0.1, 0.3, 0.6] {
                let spec = binary_spec(conv, eps, ctx.len());
                let brute = brute_force(&spec, &ctx);
                match conditional_typical_set(&spec, &ctx) {
                    Ok(set) => assert_eq!(set, brute, "{conv:?} {eps}"),
                    Err(Error::EmptyTypicalSet { .. }) => assert!(brute.is_empty()),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn counting_matches_enumeration() {
        let ctx = [0, 1, 0, 0, 1, 0, 0, 1, 1, 0, 0, 0];
        let spec = binary_spec(Convention::Conditional, 0.2, ctx.len());
        let set = conditional_typical_set(&spec, &ctx).unwrap();
        let counts = [8, 4];
        assert!((spec.log2_count(&counts).unwrap() - (set.len() as f64).log2()).abs() < 1e-9);
    }

    #[test]
    fn vacuous_and_copy_cases() {
        let spec = binary_spec(Convention::Conditional, 1.0, 6);
        assert_eq!(conditional_typical_set(&spec, &[0, 1, 0, 1, 1, 0]).unwrap().len(), 64);
        let copy = TypicalitySpec::new(vec![0.5, 0.5], vec![1.0, 0.0, 0.0, 1.0], 2, 0.05, Convention::Conditional, 6).unwrap();
        let ctx = [0, 1, 1, 0, 1, 0];
        assert_eq!(conditional_typical_set(&copy, &ctx).unwrap(), vec![ctx.to_vec()]);
    }

    #[test]
    fn tiny_epsilon_is_reported() {
        let spec = binary_spec(Convention::Conditional, 1e-6, 8);
        assert!(matches!(
            conditional_typical_set(&spec, &[0, 0, 0, 1, 0, 0, 1, 0]),
            Err(Error::EmptyTypicalSet { .. })
        ));
        let long = binary_spec(Convention::Conditional, 0.1, 30);
        assert!(matches!(
            conditional_typical_set(&long, &[0; 30]),
            Err(Error::EnumerationBound { .. })
        ));
    }

    #[test]
    fn masses_sum_over_types() {
        let spec = binary_spec(Convention::Conditional, 0.2, 9);
        let total: f64 = spec.context_types().iter().map(|t| spec.type_probability(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let loose = binary_spec(Convention::Conditional, 1.0, 9);
        for t in loose.context_types() {
            assert!((loose.conditional_mass(&t) - 1.0).abs() < 1e-12);
        }
    }
}

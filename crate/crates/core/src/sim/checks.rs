//! Growth rate, coverage and information density of conditional typical
//! sets, each computed exactly over context types and estimated by sampling.

use serde::{Deserialize, Serialize};

use super::code::draw_index;
use super::dif::DifAux;
use super::rif::RifAux;
use super::stats::Estimate;
use super::typical::{Convention, TypicalitySpec};
use super::AuxLaw;
use crate::channel::AveragedChannel;
use crate::error::{Error, Result};
use crate::rng::child_rng;

const STREAM_LEMMA: u64 = 0x4c45_4d08;

/// Context law, auxiliary kernel and the information target of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaTarget {
    pub label: String,
    /// `P(c)`.
    pub context: Vec<f64>,
    /// `P(u|c)`, row-major in `c`.
    pub cond: Vec<f64>,
    /// Law of `U` given the code part of `c`, used for the information density.
    pub reference: Vec<f64>,
    pub nu: usize,
    /// `I(U;Z|X)` in bits.
    pub target: f64,
}

impl LemmaTarget {
    /// Context `Z` from `n` uses of `x*`; the density uses `P_U`.
    pub fn dif(avg: &AveragedChannel, aux: &DifAux) -> Self {
        let law = AuxLaw::new(avg, aux.x_star, &aux.kernel, aux.nu);
        let pu = law.pu();
        Self {
            label: format!("dif x*={}", aux.x_star),
            context: law.pz(),
            cond: aux.kernel.clone(),
            reference: (0..law.nz).flat_map(|_| pu.iter().copied()).collect(),
            nu: aux.nu,
            target: law.i_uz(),
        }
    }

    /// Context `(X, Z)` with `X ~ P_X`; the density uses `P(u|x)`.
    pub fn rif(avg: &AveragedChannel, aux: &RifAux) -> Self {
        let (nx, nz, nu) = (aux.px.len(), avg.z().size(), aux.nu);
        let mut context = vec![0.0; nx * nz];
        let mut reference = vec![0.0; nx * nz * nu];
        let mut target = 0.0;
        for x in 0..nx {
            let q = &aux.kernel[x * nz * nu..(x + 1) * nz * nu];
            let law = AuxLaw::new(avg, x, q, nu);
            let pu = law.pu();
            for (z, pz) in law.pz().into_iter().enumerate() {
                context[x * nz + z] = aux.px[x] * pz;
                reference[(x * nz + z) * nu..(x * nz + z + 1) * nu].copy_from_slice(&pu);
            }
            if aux.px[x] > 0.0 {
                target += aux.px[x] * law.i_uz();
            }
        }
        Self {
            label: "rif".into(),
            context,
            cond: aux.kernel.clone(),
            reference,
            nu,
            target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub n: usize,
    /// Exact `E[(1/n) log2 |T|]` over context types with a nonempty set.
    pub exact_rate: f64,
    /// Sampled `(1/n) log2 |T|`.
    pub rate: Estimate,
    /// `|rate - target|`.
    pub deviation: f64,
    /// Probability that the typical set of the context is nonempty.
    pub nonempty: f64,
    /// Exact `Pr[U^n in T(C^n)]` with `U^n` drawn from `P(u|c)`.
    pub coverage: f64,
    /// Sampled coverage.
    pub coverage_estimate: Estimate,
    /// Sampled `-(1/n) log2 P(u^n)` over typical draws.
    pub density: Estimate,
    pub density_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub label: String,
    pub target: f64,
    pub epsilon: f64,
    pub convention: Convention,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<LemmaRow>,
    /// Deviation nonincreasing in `n` up to the sum of neighbouring half-widths.
    pub trend_ok: bool,
}

impl LemmaReport {
    pub fn coverage_at(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.coverage)
    }
}

/// Runs the check at every `n` in `ns`.
pub fn lemma_checks(
    target: &LemmaTarget,
    ns: &[usize],
    epsilon: f64,
    convention: Convention,
    samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("lemma checks need at least one sample".into()));
    }
    let nu = target.nu;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let spec = TypicalitySpec::new(target.context.clone(), target.cond.clone(), nu, epsilon, convention, n)?;
        let (mut exact, mut nonempty, mut coverage) = (0.0, 0.0, 0.0);
        for t in spec.context_types() {
            let p = spec.type_probability(&t);
            if p == 0.0 {
                continue;
            }
            if let Some(l) = spec.log2_count(&t) {
                exact += p * l / n as f64;
                nonempty += p;
                coverage += p * spec.conditional_mass(&t);
            }
        }
        if !(nonempty > 0.0) {
            return Err(Error::EmptyTypicalSet { n, epsilon });
        }
        let mut rng = child_rng(seed, STREAM_LEMMA, n as u64);
        let (mut rates, mut densities) = (Vec::new(), Vec::new());
        let mut covered = 0;
        let nc = target.context.len();
        for _ in 0..samples {
            let c: Vec<usize> = (0..n).map(|_| draw_index(&target.context, &mut rng)).collect();
            let u: Vec<usize> = c
                .iter()
                .map(|&ct| draw_index(&target.cond[ct * nu..(ct + 1) * nu], &mut rng))
                .collect();
            let mut counts = vec![0usize; nc];
            for &ct in &c {
                counts[ct] += 1;
            }
            if let Some(l) = spec.log2_count(&counts) {
                rates.push(l / n as f64);
            }
            if spec.is_typical(&c, &u) {
                covered += 1;
                let lp: f64 = c.iter().zip(&u).map(|(&ct, &ut)| target.reference[ct * nu + ut].log2()).sum();
                densities.push(-lp / n as f64);
            }
        }
        let rate = Estimate::from_samples(&rates);
        let density = Estimate::from_samples(&densities);
        rows.push(LemmaRow {
            n,
            exact_rate: exact / nonempty,
            rate,
            deviation: (rate.mean - target.target).abs(),
            nonempty,
            coverage,
            coverage_estimate: Estimate::proportion(covered, samples),
            density,
            density_deviation: (density.mean - target.target).abs(),
        });
    }
    let trend_ok = rows
        .windows(2)
        .all(|w| w[1].deviation <= w[0].deviation + w[0].rate.half_width + w[1].rate.half_width);
    Ok(LemmaReport {
        label: target.label.clone(),
        target: target.target,
        epsilon,
        convention,
        samples,
        seed,
        rows,
        trend_ok,
    })
}

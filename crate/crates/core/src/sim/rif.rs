//! Randomized scheme: `K` chained blocks over a superposition code, each
//! block's common randomness selecting the next base codeword, then a hash
//! of the accumulated randomness.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::code::{draw_index, ChannelSampler, TransmissionCode};
use super::dif::{aggregate, Outcome};
use super::hash::HashFamily;
use super::stats::TrialStats;
use super::typical::TypicalitySpec;
use super::{rate_size, type2_pairs, AuxLaw, AuxSource, ProtocolConfig};
use super::{STREAM_BASE_CODE, STREAM_BINS, STREAM_HASH_CODE, STREAM_SATELLITE, STREAM_TRIAL};
use crate::bounds::{BoundContext, SolverConfig};
use crate::channel::{averaged_channel, forward_marginal, AveragedChannel, StateChannel};
use crate::error::{Error, Result};
use crate::info::input_output_information;
use crate::prob::CondKernel;
use crate::rng::child_rng;
use crate::sensing::{DistortionFn, EstimatorTable, FEASIBILITY_SLACK};

/// Base-code type and auxiliary kernel `P(u|x,z)` of the randomized scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RifAux {
    pub px: Vec<f64>,
    pub nu: usize,
    /// `P(u|x,z)`, row-major in `(x, z)`.
    pub kernel: Vec<f64>,
    pub source: AuxSource,
}

impl RifAux {
    /// Takes `P_X` and `P(u|x,z)` from the randomized lower-bound witness.
    pub fn from_bounds(ctx: &BoundContext, cfg: &ProtocolConfig, solver: &SolverConfig) -> Result<Self> {
        let solver = SolverConfig {
            u_alphabet_size: Some(cfg.aux_alphabet),
            ..solver.clone()
        };
        let r = ctx.rif_lower(cfg.budget, &solver)?;
        let (px, k) = match (r.witness_px, r.witness_aux) {
            (Some(p), Some(k)) => (p.probs().to_vec(), k),
            _ => {
                return Err(Error::Construction(
                    "the lower-bound solve returned no witness (infeasible budget or zero capacity)".into(),
                ))
            }
        };
        let nz = ctx.channel().z().size();
        if cfg.aux == AuxSource::Copy {
            let nx = px.len();
            let mut kernel = vec![0.0; nx * nz * nz];
            for c in 0..nx * nz {
                kernel[c * nz + c % nz] = 1.0;
            }
            return Ok(Self {
                px,
                nu: nz,
                kernel,
                source: cfg.aux,
            });
        }
        Ok(Self {
            px,
            nu: k.output().size(),
            kernel: k.table().to_vec(),
            source: cfg.aux,
        })
    }
}

/// Chi-square test of the subcode indices and a DKW band on the law of the
/// accumulated randomness over its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub subcode_categories: usize,
    pub subcode_samples: usize,
    pub chi_square: f64,
    /// 95% quantile of the chi-square law, Wilson-Hilferty approximation.
    pub chi_square_critical: f64,
    pub subcode_uniform: bool,
    pub theta_range: f64,
    pub theta_samples: usize,
    /// `sup |F_n - F|` against the uniform law on the range.
    pub ks_statistic: f64,
    /// `sqrt(ln(2 / 0.05) / (2 n))`.
    pub dkw_band: f64,
    pub theta_uniform: bool,
    pub distinct_values: usize,
}

impl UniformityReport {
    pub fn passed(&self) -> bool {
        self.subcode_uniform && self.theta_uniform
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RifStats {
    pub stats: TrialStats,
    /// `desync[0]` counts trials whose base codewords were all recovered;
    /// `desync[k]` those whose first wrong base codeword was block `k`.
    pub desync: Vec<usize>,
    pub uniformity: UniformityReport,
    pub base_size: usize,
    pub bins: usize,
    pub subcode_size: usize,
    pub satellite_size: usize,
}

#[derive(Debug)]
struct Satellite {
    words: Vec<Vec<usize>>,
    bins: Vec<usize>,
}

/// Every codebook and map of one randomized-scheme instance.
#[derive(Debug)]
pub struct RifPlan {
    pub cfg: ProtocolConfig,
    pub aux: RifAux,
    pub support: Vec<usize>,
    pub i_xy: f64,
    pub i_uz: f64,
    pub i_uz_given_y: f64,
    pub spec: TypicalitySpec,
    pub base: TransmissionCode,
    pub n_bins: usize,
    pub subcode: usize,
    pub satellite_size: usize,
    pub hash_code: TransmissionCode,
    pub hash: HashFamily,
    pub diagnostics: Vec<String>,
    satellites: Vec<OnceLock<Satellite>>,
    /// `P(u|x)`, row-major in `x`.
    pu_given_x: Vec<f64>,
    /// `ln P(y|x,u)`, indexed `(x * nu + u) * ny + y`.
    ln_py: Vec<f64>,
    ny: usize,
    nz: usize,
    forward: CondKernel,
    sampler: ChannelSampler,
    est: EstimatorTable,
    distortion: DistortionFn,
}

fn slice_laws(avg: &AveragedChannel, aux: &RifAux) -> Vec<AuxLaw> {
    let nz = avg.z().size();
    let block = nz * aux.nu;
    (0..aux.px.len())
        .map(|x| AuxLaw::new(avg, x, &aux.kernel[x * block..(x + 1) * block], aux.nu))
        .collect()
}

impl RifPlan {
    pub fn new(ch: &StateChannel, d: &DistortionFn, est: &EstimatorTable, aux: RifAux, cfg: &ProtocolConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.blocks < 2 {
            return Err(Error::InvalidParameter(format!("the randomized scheme needs K >= 2, got {}", cfg.blocks)));
        }
        let nx = ch.x().size();
        let nz = ch.z().size();
        if aux.px.len() != nx || aux.kernel.len() != nx * nz * aux.nu {
            return Err(Error::AlphabetMismatch("auxiliary law does not match the channel alphabets".into()));
        }
        let cost: f64 = aux.px.iter().zip(est.dstars()).map(|(p, d)| p * d).sum();
        if cost > cfg.budget + FEASIBILITY_SLACK {
            return Err(Error::InvalidParameter(format!(
                "base-code type has d*(P_X) = {cost} above the budget {}",
                cfg.budget
            )));
        }
        let avg = averaged_channel(ch);
        let forward = forward_marginal(&avg);
        let ny = avg.y().size();
        let laws = slice_laws(&avg, &aux);
        let support: Vec<usize> = (0..nx).filter(|&x| aux.px[x] > 0.0).collect();
        let i_xy = input_output_information(forward.table(), ny, &aux.px);
        let i_uz: f64 = support.iter().map(|&x| aux.px[x] * laws[x].i_uz()).sum();
        let i_uz_given_y: f64 = support.iter().map(|&x| aux.px[x] * laws[x].i_uz_given_y()).sum();
        let mut context = vec![0.0; nx * nz];
        for x in 0..nx {
            for z in 0..nz {
                context[x * nz + z] = aux.px[x] * avg.feedback_marginal(x, z);
            }
        }
        let spec = TypicalitySpec::new(context, aux.kernel.clone(), aux.nu, cfg.epsilon, cfg.convention, cfg.n)?;
        spec.check_enumerable()?;
        let reachable: f64 = spec
            .context_types()
            .iter()
            .filter(|t| spec.log2_count(t).is_some())
            .map(|t| spec.type_probability(t))
            .sum();
        if !(reachable > 0.0) {
            return Err(Error::EmptyTypicalSet {
                n: cfg.n,
                epsilon: cfg.epsilon,
            });
        }
        let cap = cfg.satellite_cap;
        let n_bins = rate_size(cfg.n, i_uz_given_y + cfg.bin_slack(), 1, cap);
        let subcode = rate_size(cfg.n, i_xy - i_uz_given_y - cfg.epsilon - cfg.gamma, 1, cap);
        let base_size = (n_bins * subcode).min(cap);
        if base_size < n_bins * subcode {
            return Err(Error::Construction(format!(
                "base code of {n_bins} x {subcode} codewords exceeds the cap {cap}"
            )));
        }
        let weights: Vec<f64> = support.iter().map(|&x| aux.px[x]).collect();
        let base = TransmissionCode::random(
            base_size,
            cfg.n,
            &support,
            &weights,
            &mut child_rng(cfg.seed, STREAM_BASE_CODE, 0),
        );
        let satellite_size = rate_size(cfg.n, i_uz + cfg.gamma, 1, cap);
        let mut pu_given_x = vec![0.0; nx * aux.nu];
        for x in 0..nx {
            for z in 0..nz {
                let w = avg.feedback_marginal(x, z);
                for u in 0..aux.nu {
                    pu_given_x[x * aux.nu + u] += w * aux.kernel[(x * nz + z) * aux.nu + u];
                }
            }
        }
        let mut ln_py = Vec::with_capacity(nx * aux.nu * ny);
        for law in &laws {
            ln_py.extend(law.ln_py_given_u());
        }
        let len = cfg.code_length();
        let code_inputs: Vec<usize> = (0..nx).filter(|&x| est.dstar(x) <= cfg.budget + FEASIBILITY_SLACK).collect();
        let code_weights = super::code::code_weights(&forward, &code_inputs);
        if cfg.hash_range > 1 << 20 {
            return Err(Error::InvalidParameter("hash range above 2^20 is not simulated".into()));
        }
        let hash_code = TransmissionCode::random(
            cfg.hash_range as usize,
            len,
            &code_inputs,
            &code_weights,
            &mut child_rng(cfg.seed, STREAM_HASH_CODE, 1),
        );
        let mut hash = HashFamily::new(cfg.messages, cfg.hash_range, cfg.seed)?;
        if cfg.identical_maps {
            hash = hash.with_identical_maps();
        }
        let n = cfg.n as f64;
        let diagnostics = vec![
            format!(
                "rates: I(X;Y) = {i_xy:.6}, I(U;Z|X) = {i_uz:.6}, I(U;Z|X,Y) = {i_uz_given_y:.6}"
            ),
            format!(
                "bins: 2^(n(I(U;Z|X,Y)+gamma)) = {:.3} rounded to {n_bins}",
                (n * (i_uz_given_y + cfg.bin_slack())).exp2()
            ),
            format!(
                "subcodes: 2^(n(I(X;Y)-I(U;Z|X,Y)-eps-gamma)) = {:.3} rounded to {subcode}",
                (n * (i_xy - i_uz_given_y - cfg.epsilon - cfg.gamma)).exp2()
            ),
            format!(
                "satellite codes: 2^(n(I(U;Z|X)+gamma)) = {:.3} rounded to {satellite_size}",
                (n * (i_uz + cfg.gamma)).exp2()
            ),
            format!("hash code: length {len} over inputs {code_inputs:?}"),
        ];
        Ok(Self {
            cfg: cfg.clone(),
            aux,
            support,
            i_xy,
            i_uz,
            i_uz_given_y,
            spec,
            base,
            n_bins,
            subcode,
            satellite_size,
            hash_code,
            hash,
            diagnostics,
            satellites: (0..base_size).map(|_| OnceLock::new()).collect(),
            pu_given_x,
            ln_py,
            ny,
            nz,
            forward,
            sampler: ChannelSampler::new(ch),
            est: est.clone(),
            distortion: d.clone(),
        })
    }

    pub fn blocklength(&self) -> usize {
        self.cfg.n * self.cfg.blocks + self.hash_code.length
    }

    /// `(u_1^n, ..., u_{K-1}^n, b_2, ..., b_K)` as hash key words.
    fn theta_key(&self, base: &[usize], sat: &[usize], subs: &[usize]) -> Vec<u64> {
        let mut key = Vec::with_capacity(sat.len() * self.cfg.n + subs.len());
        for (&c, &m) in base.iter().zip(sat) {
            key.extend(self.satellite(c).words[m].iter().map(|&u| u as u64));
        }
        key.extend(subs.iter().map(|&b| b as u64));
        key
    }

    /// Number of values of the accumulated randomness
    /// `(u_1, ..., u_{K-1}, b_2, ..., b_K)`.
    pub fn theta_range(&self) -> f64 {
        ((self.satellite_size * self.subcode) as f64).powi(self.cfg.blocks as i32 - 1)
    }

    fn satellite(&self, c: usize) -> &Satellite {
        self.satellites[c].get_or_init(|| {
            let nu = self.aux.nu;
            let mut rng = child_rng(self.cfg.seed, STREAM_SATELLITE, c as u64);
            let words = (0..self.satellite_size)
                .map(|_| {
                    self.base
                        .word(c)
                        .iter()
                        .map(|&x| draw_index(&self.pu_given_x[x * nu..(x + 1) * nu], &mut rng))
                        .collect()
                })
                .collect();
            let mut rng = child_rng(self.cfg.seed, STREAM_BINS, c as u64);
            let bins = (0..self.satellite_size).map(|_| rng.gen_range(0..self.n_bins)).collect();
            Satellite { words, bins }
        })
    }

    /// Indices of the satellite codewords of base codeword `c` typical with `z`.
    pub fn typical_indices(&self, c: usize, z: &[usize]) -> Vec<usize> {
        let context: Vec<usize> = self.base.word(c).iter().zip(z).map(|(&x, &zt)| x * self.nz + zt).collect();
        let sat = self.satellite(c);
        (0..sat.words.len()).filter(|&m| self.spec.is_typical(&context, &sat.words[m])).collect()
    }

    /// Satellite codeword of `c` with the smallest cell excess against `z`.
    fn nearest(&self, c: usize, z: &[usize]) -> usize {
        let context: Vec<usize> = self.base.word(c).iter().zip(z).map(|(&x, &zt)| x * self.nz + zt).collect();
        let mut best = (f64::INFINITY, 0);
        for (m, u) in self.satellite(c).words.iter().enumerate() {
            let e = self.spec.excess(&context, u);
            if e < best.0 {
                best = (e, m);
            }
        }
        best.1
    }

    /// Maximum-likelihood satellite codeword of `c` in bin `bin` given `y`.
    fn decode_satellite(&self, c: usize, bin: usize, y: &[usize]) -> (usize, bool) {
        let sat = self.satellite(c);
        let x = self.base.word(c);
        let nu = self.aux.nu;
        let mut best: Option<(f64, usize)> = None;
        let mut tie = false;
        for (m, u) in sat.words.iter().enumerate() {
            if sat.bins[m] != bin {
                continue;
            }
            let l: f64 = (0..y.len())
                .map(|t| self.ln_py[(x[t] * nu + u[t]) * self.ny + y[t]])
                .sum();
            match best {
                None => best = Some((l, m)),
                Some((b, _)) if l > b + 1e-12 => {
                    best = Some((l, m));
                    tie = false;
                }
                Some((b, w)) if (l - b).abs() <= 1e-12 => tie |= *u != sat.words[w],
                _ => {}
            }
        }
        best.map_or((0, false), |(_, m)| (m, tie))
    }

    fn trial(&self, t: usize, pairs: Option<&[(u64, u64)]>) -> (Outcome, usize, Vec<usize>, f64) {
        let mut rng = child_rng(self.cfg.seed, STREAM_TRIAL, t as u64);
        let n_msg = self.cfg.messages;
        let (sent, partner) = match pairs {
            Some(p) => {
                let (i, j) = p[t % p.len()];
                (i, Some(j))
            }
            None => (rng.gen_range(0..n_msg), None),
        };
        let (n, k_blocks) = (self.cfg.n, self.cfg.blocks);
        let total = self.blocklength();
        let mut dist = Vec::with_capacity(total);
        let mut target = Vec::with_capacity(total);
        let mut ys: Vec<Vec<usize>> = Vec::with_capacity(k_blocks);
        let mut base_idx = vec![0usize];
        let mut sat_idx = Vec::with_capacity(k_blocks);
        let mut subs = Vec::with_capacity(k_blocks);
        let (mut failed, mut first_typical) = (false, 0);
        let mut send = |x: usize, rng: &mut rand_chacha::ChaCha8Rng, ys: &mut Vec<usize>, zs: &mut Vec<usize>| {
            let (s, y, z) = self.sampler.sample(x, rng);
            dist.push(self.distortion.get(s, self.est.estimate(x, z)));
            target.push(self.est.dstar(x));
            ys.push(y);
            zs.push(z);
        };
        for k in 0..k_blocks {
            let c = base_idx[k];
            let (mut y, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for &x in self.base.word(c) {
                send(x, &mut rng, &mut y, &mut z);
            }
            ys.push(y);
            if k + 1 < k_blocks {
                let typical = self.typical_indices(c, &z);
                if k == 0 {
                    first_typical = typical.len();
                }
                let m = if typical.is_empty() {
                    failed = true;
                    self.nearest(c, &z)
                } else {
                    typical[rng.gen_range(0..typical.len())]
                };
                sat_idx.push(m);
                let b = rng.gen_range(0..self.subcode);
                subs.push(b);
                base_idx.push(self.satellite(c).bins[m] * self.subcode + b);
            }
        }
        let theta = self.theta_key(&base_idx, &sat_idx, &subs);
        let w = self.hash.eval(sent, &theta) as usize;
        let (mut hy, mut hz) = (Vec::new(), Vec::new());
        for &x in self.hash_code.word(w) {
            send(x, &mut rng, &mut hy, &mut hz);
        }
        let mut c_hat = vec![0usize];
        let mut sat_hat = Vec::with_capacity(k_blocks);
        let mut sub_hat = Vec::with_capacity(k_blocks);
        let mut ambiguous = false;
        let mut desync = 0;
        for k in 1..k_blocks {
            let c = self.base.decode(&ys[k], &self.forward);
            if desync == 0 && c != base_idx[k] {
                desync = k + 1;
            }
            let (bin, b) = (c / self.subcode, c % self.subcode);
            let (m, tie) = self.decode_satellite(c_hat[k - 1], bin, &ys[k - 1]);
            ambiguous |= tie;
            sat_hat.push(m);
            sub_hat.push(b);
            c_hat.push(c);
        }
        let theta_hat = self.theta_key(&c_hat, &sat_hat, &sub_hat);
        let w_hat = self.hash_code.decode(&hy, &self.forward) as u64;
        let accept = |j: u64| self.hash.eval(j, &theta_hat) == w_hat;
        let mut mask = 0u64;
        let mut false_accepts = 0u32;
        match partner {
            Some(j) => false_accepts = accept(j) as u32,
            None => {
                for j in (0..n_msg).filter(|&j| j != sent) {
                    if accept(j) {
                        mask |= 1 << j;
                        false_accepts += 1;
                    }
                }
            }
        }
        let index = sat_idx
            .iter()
            .map(|&m| (m, self.satellite_size))
            .chain(subs.iter().map(|&b| (b, self.subcode)))
            .fold(0.0, |acc, (v, radix)| acc * radix as f64 + v as f64);
        let outcome = Outcome {
            sent,
            hit: accept(sent),
            mask,
            false_accepts,
            dist,
            target,
            typical: first_typical,
            failed,
            cr_error: theta_hat != theta,
            ambiguous,
        };
        (outcome, desync, subs, index)
    }

    pub fn run(&self) -> Result<RifStats> {
        let pairs = type2_pairs(self.cfg.messages, self.cfg.seed);
        let runs: Vec<_> = (0..self.cfg.trials)
            .into_par_iter()
            .map(|t| self.trial(t, pairs.as_deref()))
            .collect();
        let mut desync = vec![0usize; self.cfg.blocks + 1];
        let mut subs = Vec::new();
        let mut indices = Vec::with_capacity(runs.len());
        let mut outcomes = Vec::with_capacity(runs.len());
        for (o, k, b, dg) in runs {
            desync[k] += 1;
            subs.extend(b);
            indices.push(dg);
            outcomes.push(o);
        }
        let stats = aggregate(
            "rif",
            &self.cfg,
            self.blocklength(),
            outcomes,
            pairs.is_some(),
            self.diagnostics.clone(),
        );
        if stats.ambiguity_rate > self.cfg.ambiguity_threshold {
            return Err(Error::Ambiguity {
                rate: stats.ambiguity_rate,
                threshold: self.cfg.ambiguity_threshold,
            });
        }
        Ok(RifStats {
            stats,
            desync,
            uniformity: uniformity(&subs, self.subcode, &indices, self.theta_range()),
            base_size: self.base.size(),
            bins: self.n_bins,
            subcode_size: self.subcode,
            satellite_size: self.satellite_size,
        })
    }
}

/// 95% chi-square quantile with `k` degrees of freedom.
pub fn chi_square_95(k: usize) -> f64 {
    let k = k as f64;
    let z = 1.644_853_626_951_472;
    let c = 2.0 / (9.0 * k);
    k * (1.0 - c + z * c.sqrt()).powi(3)
}

fn uniformity(subs: &[usize], categories: usize, indices: &[f64], range: f64) -> UniformityReport {
    let (chi_square, chi_square_critical) = if categories > 1 && !subs.is_empty() {
        let mut counts = vec![0usize; categories];
        for &b in subs {
            counts[b] += 1;
        }
        let e = subs.len() as f64 / categories as f64;
        let chi: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        (chi, chi_square_95(categories - 1))
    } else {
        (0.0, 0.0)
    };
    let mut sorted = indices.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    let (mut ks, mut distinct, mut i) = (0.0f64, 0, 0);
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = ((i as f64) / k - v / range).abs();
        let at = ((j as f64) / k - (v + 1.0) / range).abs();
        ks = ks.max(below).max(at);
        distinct += 1;
        i = j;
    }
    let dkw_band = ((2.0f64 / 0.05).ln() / (2.0 * k)).sqrt();
    UniformityReport {
        subcode_categories: categories,
        subcode_samples: subs.len(),
        chi_square,
        chi_square_critical,
        subcode_uniform: chi_square <= chi_square_critical,
        theta_range: range,
        theta_samples: sorted.len(),
        ks_statistic: ks,
        dkw_band,
        theta_uniform: ks <= dkw_band,
        distinct_values: distinct,
    }
}

/// Builds the plan and runs it.
pub fn run_rif_scheme(
    ch: &StateChannel,
    d: &DistortionFn,
    est: &EstimatorTable,
    aux: RifAux,
    cfg: &ProtocolConfig,
) -> Result<RifStats> {
    RifPlan::new(ch, d, est, aux, cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{build_binary_channel, example_context, BinaryExampleParams};
    use crate::sim::fixtures::revealing_channel;

    #[test]
    fn noiseless_two_block_chain_is_exact() {
        let (ch, d, est) = revealing_channel();
        let mut kernel = vec![0.0; 2 * 4 * 4];
        for c in 0..8 {
            kernel[c * 4 + c % 4] = 1.0;
        }
        let aux = RifAux {
            px: vec![0.0, 1.0],
            nu: 4,
            kernel,
            source: AuxSource::Copy,
        };
        let cfg = ProtocolConfig {
            n: 8,
            messages: 4,
            gamma: 0.5,
            bin_gamma: Some(0.0),
            trials: 2000,
            ..Default::default()
        };
        let r = run_rif_scheme(&ch, &d, &est, aux, &cfg).unwrap();
        assert_eq!(r.stats.lambda1.mean, 0.0);
        assert_eq!(r.desync[0], cfg.trials);
        assert_eq!(r.stats.blocklength, 2 * 8 + 3);
    }

    #[test]
    fn chi_square_quantiles() {
        assert!((chi_square_95(1) - 3.841).abs() < 0.1);
        assert!((chi_square_95(10) - 18.307).abs() < 0.05);
    }

    #[test]
    fn binary_example_runs_with_diagnostics() {
        let p = BinaryExampleParams::new(0.2, 0.1).unwrap();
        let (ch, d) = build_binary_channel(&p).unwrap();
        let (ctx, est) = example_context(&p).unwrap();
        let cfg = ProtocolConfig {
            n: 10,
            trials: 300,
            ambiguity_threshold: 1.0,
            ..Default::default()
        };
        let aux = RifAux::from_bounds(&ctx, &cfg, &SolverConfig::default()).unwrap();
        let r = run_rif_scheme(&ch, &d, &est, aux, &cfg).unwrap();
        assert_eq!(r.desync.iter().sum::<usize>(), cfg.trials);
        assert!(r.stats.diagnostics.iter().any(|s| s.starts_with("subcodes")));
        assert!((0.0..=1.0).contains(&r.stats.lambda1.mean));
    }
}

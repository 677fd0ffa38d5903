//! Deterministic scheme: `n` uses of a fixed symbol build common randomness
//! from the feedback, then a short code carries the bin index and the hash.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::code::{code_weights, draw_index, ChannelSampler, TransmissionCode};
use super::hash::HashFamily;
use super::stats::{Estimate, Moments, TrialStats};
use super::typical::TypicalitySpec;
use super::{rate_size, type2_pairs, AuxLaw, AuxSource, ProtocolConfig};
use super::{STREAM_BINS, STREAM_BIN_CODE, STREAM_HASH_CODE, STREAM_SATELLITE, STREAM_TRIAL};
use crate::bounds::{BoundContext, RhsMode, SolverConfig};
use crate::channel::{averaged_channel, forward_marginal, StateChannel};
use crate::error::{Error, Result};
use crate::prob::CondKernel;
use crate::rng::child_rng;
use crate::sensing::{feasible_symbols, DistortionFn, EstimatorTable};

/// Sending symbol and auxiliary kernel `P(u|z)` for the deterministic scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifAux {
    pub x_star: usize,
    pub nu: usize,
    /// `P(u|z)`, row-major in `z`.
    pub kernel: Vec<f64>,
    pub source: AuxSource,
}

/// Picks `x*` and `P(u|z)` as configured.
pub fn choose_dif_aux(ctx: &BoundContext, cfg: &ProtocolConfig, solver: &SolverConfig) -> Result<DifAux> {
    let xs = feasible_symbols(ctx.estimator(), cfg.budget);
    if xs.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no input symbol meets the distortion budget {}",
            cfg.budget
        )));
    }
    let nz = ctx.channel().z().size();
    let rhs_mode = match cfg.aux {
        AuxSource::Copy => {
            let hz = ctx.slice_feedback_entropy();
            let x_star = *xs
                .iter()
                .reduce(|a, b| if hz[*b] > hz[*a] { b } else { a })
                .expect("nonempty");
            let mut kernel = vec![0.0; nz * nz];
            for z in 0..nz {
                kernel[z * nz + z] = 1.0;
            }
            return Ok(DifAux {
                x_star,
                nu: nz,
                kernel,
                source: cfg.aux,
            });
        }
        AuxSource::SliceZero => RhsMode::SliceZero,
        AuxSource::RestrictedCapacity => RhsMode::RestrictedCapacity,
    };
    let s = SolverConfig {
        rhs_mode,
        u_alphabet_size: Some(cfg.aux_alphabet),
        ..solver.clone()
    };
    let r = ctx.dif_lower(cfg.budget, &s)?;
    match (r.x_star, r.witness_aux) {
        (Some(x_star), Some(k)) => {
            let nu = k.output().size();
            Ok(DifAux {
                x_star,
                nu,
                kernel: k.table()[x_star * nz * nu..(x_star + 1) * nz * nu].to_vec(),
                source: cfg.aux,
            })
        }
        _ => Err(Error::Construction(
            "the lower-bound solve returned no auxiliary kernel (zero restricted capacity)".into(),
        )),
    }
}

/// Every codebook and map of one deterministic-scheme instance.
#[derive(Debug, Clone)]
pub struct DifPlan {
    pub cfg: ProtocolConfig,
    pub aux: DifAux,
    /// `X_D`.
    pub inputs: Vec<usize>,
    pub i_uz: f64,
    pub i_uz_given_y: f64,
    pub spec: TypicalitySpec,
    pub codebook: Vec<Vec<usize>>,
    pub bins: Vec<usize>,
    pub n_bins: usize,
    pub bin_code: Option<TransmissionCode>,
    pub hash_code: TransmissionCode,
    pub hash: HashFamily,
    pub diagnostics: Vec<String>,
    ln_py_given_u: Vec<f64>,
    ny: usize,
    pub(crate) forward: CondKernel,
    pub(crate) avg: crate::channel::AveragedChannel,
    sampler: ChannelSampler,
    est: EstimatorTable,
    distortion: DistortionFn,
}

impl DifPlan {
    pub fn new(ch: &StateChannel, d: &DistortionFn, est: &EstimatorTable, aux: DifAux, cfg: &ProtocolConfig) -> Result<Self> {
        cfg.validate()?;
        let inputs = feasible_symbols(est, cfg.budget);
        if !inputs.contains(&aux.x_star) {
            return Err(Error::InvalidParameter(format!(
                "x* = {} is not in the feasible set {inputs:?}",
                aux.x_star
            )));
        }
        let avg = averaged_channel(ch);
        let forward = forward_marginal(&avg);
        let law = AuxLaw::new(&avg, aux.x_star, &aux.kernel, aux.nu);
        let spec = TypicalitySpec::new(law.pz(), aux.kernel.clone(), aux.nu, cfg.epsilon, cfg.convention, cfg.n)?;
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
        let i_uz = law.i_uz();
        let i_uz_given_y = law.i_uz_given_y();
        let pu = law.pu();
        let m_s = rate_size(cfg.n, i_uz + cfg.gamma, 1, cfg.satellite_cap);
        let mut rng = child_rng(cfg.seed, STREAM_SATELLITE, 0);
        let codebook: Vec<Vec<usize>> = (0..m_s)
            .map(|_| (0..cfg.n).map(|_| draw_index(&pu, &mut rng)).collect())
            .collect();
        let n_bins = rate_size(cfg.n, i_uz_given_y + cfg.bin_slack(), 1, m_s);
        let mut perm: Vec<usize> = (0..m_s).collect();
        perm.shuffle(&mut child_rng(cfg.seed, STREAM_BINS, 0));
        let mut bins = vec![0; m_s];
        for (k, &m) in perm.iter().enumerate() {
            bins[m] = k % n_bins;
        }
        let len = cfg.code_length();
        let weights = code_weights(&forward, &inputs);
        let bin_code = (n_bins > 1).then(|| {
            TransmissionCode::random(n_bins, len, &inputs, &weights, &mut child_rng(cfg.seed, STREAM_BIN_CODE, 0))
        });
        if cfg.hash_range > 1 << 20 {
            return Err(Error::InvalidParameter("hash range above 2^20 is not simulated".into()));
        }
        let hash_code = TransmissionCode::random(
            cfg.hash_range as usize,
            len,
            &inputs,
            &weights,
            &mut child_rng(cfg.seed, STREAM_HASH_CODE, 0),
        );
        let mut hash = HashFamily::new(cfg.messages, cfg.hash_range, cfg.seed)?;
        if cfg.identical_maps {
            hash = hash.with_identical_maps();
        }
        let diagnostics = vec![
            format!(
                "satellite code: 2^(n(I(U;Z|x*)+gamma)) = {:.3} rounded to {m_s}",
                (cfg.n as f64 * (i_uz + cfg.gamma)).exp2()
            ),
            format!(
                "bins: 2^(n(I(U;Z|Y,x*)+gamma)) = {:.3} rounded to {n_bins}",
                (cfg.n as f64 * (i_uz_given_y + cfg.bin_slack())).exp2()
            ),
            format!("code blocks: length {len} over inputs {inputs:?} with weights {weights:?}"),
        ];
        Ok(Self {
            cfg: cfg.clone(),
            aux,
            inputs,
            i_uz,
            i_uz_given_y,
            spec,
            codebook,
            bins,
            n_bins,
            bin_code,
            hash_code,
            hash,
            diagnostics,
            ln_py_given_u: law.ln_py_given_u(),
            ny: law.ny,
            forward,
            avg,
            sampler: ChannelSampler::new(ch),
            est: est.clone(),
            distortion: d.clone(),
        })
    }

    pub fn bin_length(&self) -> usize {
        self.bin_code.as_ref().map_or(0, |c| c.length)
    }

    pub fn blocklength(&self) -> usize {
        self.cfg.n + self.bin_length() + self.hash_code.length
    }

    /// Index of the first satellite codeword typical with `z`.
    pub fn encode_common(&self, z: &[usize]) -> Option<usize> {
        self.codebook.iter().position(|u| self.spec.is_typical(z, u))
    }

    /// The encoder's common-randomness index for `z`: the first typical
    /// codeword, else the codeword of smallest cell excess. The flag is
    /// false in the second case.
    pub fn common_index(&self, z: &[usize]) -> (usize, bool) {
        if let Some(m) = self.encode_common(z) {
            return (m, true);
        }
        let mut best = (f64::INFINITY, 0);
        for (m, u) in self.codebook.iter().enumerate() {
            let e = self.spec.excess(z, u);
            if e < best.0 {
                best = (e, m);
            }
        }
        (best.1, false)
    }

    pub fn typical_count(&self, z: &[usize]) -> usize {
        self.codebook.iter().filter(|u| self.spec.is_typical(z, u)).count()
    }

    /// Maximum-likelihood codeword in `bin` given `y`, and whether the
    /// maximum was shared.
    pub fn decode_common(&self, y: &[usize], bin: usize) -> (usize, bool) {
        let mut best: Option<(f64, usize)> = None;
        let mut tie = false;
        for (m, u) in self.codebook.iter().enumerate() {
            if self.bins[m] != bin {
                continue;
            }
            let l: f64 = u.iter().zip(y).map(|(&ut, &yt)| self.ln_py_given_u[ut * self.ny + yt]).sum();
            match best {
                None => best = Some((l, m)),
                Some((b, _)) if l > b + 1e-12 => {
                    best = Some((l, m));
                    tie = false;
                }
                Some((b, w)) if (l - b).abs() <= 1e-12 => tie |= *u != self.codebook[w],
                _ => {}
            }
        }
        best.map_or((0, false), |(_, m)| (m, tie))
    }

    /// Hash key of codeword `m`: the letters of `u^n`.
    pub fn key(&self, m: usize) -> Vec<u64> {
        self.codebook[m].iter().map(|&u| u as u64).collect()
    }

    /// `f_i^t(z^{t-1})`: the input at use `t = feedback.len()`.
    pub fn encoder_symbol(&self, message: u64, feedback: &[usize]) -> usize {
        let t = feedback.len();
        let n = self.cfg.n;
        if t < n {
            return self.aux.x_star;
        }
        let (m, _) = self.common_index(&feedback[..n]);
        let lb = self.bin_length();
        if t < n + lb {
            let code = self.bin_code.as_ref().expect("bin block present");
            return code.word(self.bins[m])[t - n];
        }
        let w = self.hash.eval(message, &self.key(m)) as usize;
        self.hash_code.word(w)[t - n - lb]
    }

    fn trial(&self, t: usize, pairs: Option<&[(u64, u64)]>) -> Outcome {
        let mut rng = child_rng(self.cfg.seed, STREAM_TRIAL, t as u64);
        let n_msg = self.cfg.messages;
        let (sent, partner) = match pairs {
            Some(p) => {
                let (i, j) = p[t % p.len()];
                (i, Some(j))
            }
            None => (rng.gen_range(0..n_msg), None),
        };
        let total = self.blocklength();
        let mut ys = Vec::with_capacity(total);
        let mut zs = Vec::with_capacity(total);
        let mut dist = Vec::with_capacity(total);
        let mut target = Vec::with_capacity(total);
        let mut common = None;
        for step in 0..total {
            let x = if step >= self.cfg.n {
                let (m, _) = *common.get_or_insert_with(|| self.common_index(&zs[..self.cfg.n]));
                self.symbol_after(sent, m, step)
            } else {
                self.encoder_symbol(sent, &zs)
            };
            let (s, y, z) = self.sampler.sample(x, &mut rng);
            dist.push(self.distortion.get(s, self.est.estimate(x, z)));
            target.push(self.est.dstar(x));
            ys.push(y);
            zs.push(z);
        }
        let n = self.cfg.n;
        let (m, found) = common.unwrap_or_else(|| self.common_index(&zs[..n]));
        let lb = self.bin_length();
        let bin_hat = self.bin_code.as_ref().map_or(0, |c| c.decode(&ys[n..n + lb], &self.forward));
        let (m_hat, ambiguous) = self.decode_common(&ys[..n], bin_hat);
        let w_hat = self.hash_code.decode(&ys[n + lb..], &self.forward) as u64;
        let key_hat = self.key(m_hat);
        let accept = |j: u64| self.hash.eval(j, &key_hat) == w_hat;
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
        Outcome {
            sent,
            hit: accept(sent),
            mask,
            false_accepts,
            dist,
            target,
            typical: self.typical_count(&zs[..n]),
            failed: !found,
            cr_error: self.codebook[m_hat] != self.codebook[m],
            ambiguous,
        }
    }

    fn symbol_after(&self, message: u64, m: usize, step: usize) -> usize {
        let n = self.cfg.n;
        let lb = self.bin_length();
        if step < n + lb {
            return self.bin_code.as_ref().expect("bin block present").word(self.bins[m])[step - n];
        }
        let w = self.hash.eval(message, &self.key(m)) as usize;
        self.hash_code.word(w)[step - n - lb]
    }

    /// Runs every trial in parallel and aggregates in trial order.
    pub fn run(&self) -> Result<TrialStats> {
        let pairs = type2_pairs(self.cfg.messages, self.cfg.seed);
        let outcomes: Vec<Outcome> = (0..self.cfg.trials)
            .into_par_iter()
            .map(|t| self.trial(t, pairs.as_deref()))
            .collect();
        let stats = aggregate(
            "dif",
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
        Ok(stats)
    }
}

pub(crate) struct Outcome {
    pub sent: u64,
    pub hit: bool,
    pub mask: u64,
    pub false_accepts: u32,
    pub dist: Vec<f64>,
    pub target: Vec<f64>,
    pub typical: usize,
    pub failed: bool,
    pub cr_error: bool,
    pub ambiguous: bool,
}

pub(crate) fn aggregate(
    scheme: &str,
    cfg: &ProtocolConfig,
    blocklength: usize,
    outcomes: Vec<Outcome>,
    sampled_pairs: bool,
    diagnostics: Vec<String>,
) -> TrialStats {
    let trials = outcomes.len();
    let n_msg = cfg.messages;
    let small = n_msg <= 64;
    let mut sent_count = vec![0usize; if small { n_msg as usize } else { 0 }];
    let mut missed_count = sent_count.clone();
    let mut pair_hits = vec![0usize; if small { (n_msg * n_msg) as usize } else { 0 }];
    let mut dist = Moments::new(blocklength);
    let mut target = vec![0.0; blocklength];
    let mut per_trial_l2 = Vec::with_capacity(trials);
    let (mut missed, mut fa_total, mut failures, mut cr_errors, mut ambiguous) = (0, 0usize, 0, 0, 0);
    let mut typical_logs = Vec::new();
    let (mut tmin, mut tmax) = (usize::MAX, 0);
    for o in &outcomes {
        if !o.hit {
            missed += 1;
        }
        if small {
            sent_count[o.sent as usize] += 1;
            if !o.hit {
                missed_count[o.sent as usize] += 1;
            }
            for j in 0..n_msg {
                if o.mask >> j & 1 == 1 {
                    pair_hits[(o.sent * n_msg + j) as usize] += 1;
                }
            }
        }
        fa_total += o.false_accepts as usize;
        if n_msg > 1 && !sampled_pairs {
            per_trial_l2.push(o.false_accepts as f64 / (n_msg - 1) as f64);
        }
        dist.add(&o.dist);
        for (a, b) in target.iter_mut().zip(&o.target) {
            *a += b;
        }
        failures += o.failed as usize;
        cr_errors += o.cr_error as usize;
        ambiguous += o.ambiguous as usize;
        if o.typical > 0 {
            typical_logs.push((o.typical as f64).log2());
        }
        tmin = tmin.min(o.typical);
        tmax = tmax.max(o.typical);
    }
    let lambda2 = if n_msg == 1 {
        Estimate::proportion(0, 0)
    } else if sampled_pairs {
        Estimate::proportion(fa_total, trials)
    } else {
        Estimate::from_samples(&per_trial_l2)
    };
    let pairs_evaluated = if n_msg == 1 {
        0
    } else if sampled_pairs {
        trials
    } else {
        trials * (n_msg as usize - 1)
    };
    let lambda1_per_message: Option<Vec<f64>> = small.then(|| {
        sent_count
            .iter()
            .zip(&missed_count)
            .map(|(&s, &m)| if s > 0 { m as f64 / s as f64 } else { 0.0 })
            .collect()
    });
    let lambda1_max = lambda1_per_message
        .as_ref()
        .map_or(missed as f64 / trials as f64, |v| v.iter().copied().fold(0.0, f64::max));
    let lambda2_max = (small && n_msg > 1).then(|| {
        let mut best: f64 = 0.0;
        for i in 0..n_msg as usize {
            if sent_count[i] == 0 {
                continue;
            }
            for j in (0..n_msg as usize).filter(|&j| j != i) {
                best = best.max(pair_hits[i * n_msg as usize + j] as f64 / sent_count[i] as f64);
            }
        }
        best
    });
    TrialStats {
        scheme: scheme.into(),
        n: cfg.n,
        blocklength,
        trials,
        messages: n_msg,
        hash_range: cfg.hash_range,
        seed: cfg.seed,
        lambda1: Estimate::proportion(missed, trials),
        lambda1_max,
        lambda1_per_message,
        lambda2,
        lambda2_max,
        pairs_evaluated,
        distortion: dist.estimates(trials),
        distortion_target: target.iter().map(|v| v / trials as f64).collect(),
        budget: cfg.budget,
        typical_log2_sizes: Estimate::from_samples(&typical_logs),
        typical_min: if tmin == usize::MAX { 0 } else { tmin },
        typical_max: tmax,
        encoding_failures: failures,
        common_randomness_errors: cr_errors,
        ambiguity_rate: ambiguous as f64 / trials as f64,
        diagnostics,
    }
}

/// Builds the plan and runs it.
pub fn run_dif_scheme(
    ch: &StateChannel,
    d: &DistortionFn,
    est: &EstimatorTable,
    aux: DifAux,
    cfg: &ProtocolConfig,
) -> Result<TrialStats> {
    DifPlan::new(ch, d, est, aux, cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{build_binary_channel, example_context, BinaryExampleParams};
    use crate::sim::exact::exact_dif_errors;
    use crate::sim::fixtures::revealing_channel;

    fn copy_aux(x_star: usize, nz: usize) -> DifAux {
        let mut kernel = vec![0.0; nz * nz];
        for z in 0..nz {
            kernel[z * nz + z] = 1.0;
        }
        DifAux {
            x_star,
            nu: nz,
            kernel,
            source: AuxSource::Copy,
        }
    }

    #[test]
    fn noiseless_links_identify_without_misses() {
        let (ch, d, est) = revealing_channel();
        let cfg = ProtocolConfig {
            n: 8,
            messages: 2,
            hash_range: 4,
            gamma: 0.5,
            bin_gamma: Some(0.0),
            trials: 4000,
            ..Default::default()
        };
        let s = run_dif_scheme(&ch, &d, &est, copy_aux(1, 4), &cfg).unwrap();
        assert_eq!(s.lambda1.mean, 0.0);
        assert_eq!(s.common_randomness_errors, 0);
        assert!((s.lambda2.mean - 0.25).abs() <= s.lambda2.half_width + 0.01, "{:?}", s.lambda2);
    }

    #[test]
    fn monte_carlo_matches_exact_summation() {
        let p = BinaryExampleParams::new(0.2, 0.1).unwrap();
        let (ch, d) = build_binary_channel(&p).unwrap();
        let (ctx, est) = example_context(&p).unwrap();
        let cfg = ProtocolConfig {
            n: 6,
            trials: 4000,
            ..Default::default()
        };
        let aux = choose_dif_aux(&ctx, &cfg, &SolverConfig::default()).unwrap();
        let plan = DifPlan::new(&ch, &d, &est, aux, &cfg).unwrap();
        let exact = exact_dif_errors(&plan).unwrap();
        let mc = plan.run().unwrap();
        let hw = |p: f64| 3.0 * (p * (1.0 - p) / cfg.trials as f64).sqrt();
        assert!((mc.lambda1.mean - exact.lambda1).abs() <= hw(exact.lambda1));
        assert!((mc.lambda2.mean - exact.lambda2).abs() <= hw(exact.lambda2));
    }

    #[test]
    fn runs_are_reproducible_across_thread_counts() {
        let p = BinaryExampleParams::new(0.2, 0.1).unwrap();
        let (ch, d) = build_binary_channel(&p).unwrap();
        let (ctx, est) = example_context(&p).unwrap();
        let cfg = ProtocolConfig {
            trials: 500,
            ..Default::default()
        };
        let aux = choose_dif_aux(&ctx, &cfg, &SolverConfig::default()).unwrap();
        let plan = DifPlan::new(&ch, &d, &est, aux, &cfg).unwrap();
        let a = plan.run().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| plan.run().unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn single_message_has_no_type_two_pairs() {
        let (ch, d, est) = revealing_channel();
        let cfg = ProtocolConfig {
            n: 8,
            messages: 1,
            trials: 200,
            ..Default::default()
        };
        let s = run_dif_scheme(&ch, &d, &est, copy_aux(1, 4), &cfg).unwrap();
        assert_eq!(s.pairs_evaluated, 0);
        assert_eq!(s.lambda2.samples, 0);
    }

    #[test]
    fn refuses_blocklengths_beyond_enumeration() {
        let (ch, d, est) = revealing_channel();
        let cfg = ProtocolConfig {
            n: 40,
            ..Default::default()
        };
        let e = DifPlan::new(&ch, &d, &est, copy_aux(1, 4), &cfg).unwrap_err();
        assert!(matches!(e, Error::EnumerationBound { .. }), "{e}");
    }
}

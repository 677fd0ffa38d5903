//! Capacity-distortion bounds for deterministic (DIF) and randomized (RIF)
//! identification with noisy feedback, the zero-capacity gate and the
//! time-sharing baseline.
//!
//! Upper bounds are evaluated exactly: the DIF upper bound by enumeration
//! over `X_D`, the RIF upper bound by cost-constrained Blahut-Arimoto using
//! `I(X,Z;Y) = I(X;Y) + sum_x P(x) I(Y;Z|X=x)`. Lower bounds involve an
//! auxiliary kernel and are non-concave; they are solved by multi-restart
//! feasible-direction ascent.

mod ascent;
mod slice;
mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{averaged_channel, forward_marginal, AveragedChannel, StateChannel, VAR_U, VAR_X, VAR_Z};
use crate::error::{Error, Result};
use crate::info::{blahut_arimoto_capacity, blahut_arimoto_constrained, ConstrainedOptimum};
use crate::prob::{Alphabet, CondKernel, Pmf};
use crate::rng::child_rng;
use crate::sensing::{feasible_symbols, EstimatorTable};
use crate::simplex::project_polytope;

use ascent::{ascend, copy_rows, random_rows, simplex_grid, Ascent, JointProblem, SliceProblem};
pub(crate) use slice::Slice;
pub use sweep::{sweep_bounds, Sweep, SweepRow};

/// Right-hand side of the DIF lower-bound constraint `I(U;Z|X=x,Y) < RHS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsMode {
    /// `I(X;Y)` evaluated at the pinned input, which is zero: the slice
    /// constraint must vanish up to the margin.
    #[default]
    SliceZero,
    /// Capacity of `W̃` restricted to `X_D`.
    RestrictedCapacity,
}

impl std::str::FromStr for RhsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slice-zero" => Ok(Self::SliceZero),
            "restricted-capacity" => Ok(Self::RestrictedCapacity),
            other => Err(Error::InvalidParameter(format!(
                "unknown rhs mode `{other}` (expected slice-zero or restricted-capacity)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// `|U|`; `None` means `|Z| + 2`.
    pub u_alphabet_size: Option<usize>,
    pub restarts: usize,
    /// Denominator of the seeding grid used when `|U|·|Z| <= 6`.
    pub grid_resolution: usize,
    pub ascent_steps: usize,
    /// Initial step length; grows by 1.6 on success and shrinks by 0.35 on
    /// a rejected trial.
    pub initial_step: f64,
    pub seed: u64,
    pub constraint_margin: f64,
    pub rhs_mode: RhsMode,
    pub ba_tol: f64,
    pub ba_max_iter: usize,
    /// Capacities at or below this count as zero.
    pub gate_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            u_alphabet_size: None,
            restarts: 32,
            grid_resolution: 20,
            ascent_steps: 1500,
            initial_step: 0.1,
            seed: 0,
            constraint_margin: 1e-6,
            rhs_mode: RhsMode::SliceZero,
            ba_tol: 1e-9,
            ba_max_iter: 100_000,
            gate_tol: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.u_alphabet_size == Some(0) {
            return Err(Error::InvalidParameter("u_alphabet_size must be at least 1".into()));
        }
        if !(self.constraint_margin > 0.0) {
            return Err(Error::InvalidParameter("constraint_margin must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn u_size(&self, nz: usize) -> usize {
        self.u_alphabet_size.unwrap_or(nz + 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    DifLower,
    DifUpper,
    RifLower,
    RifUpper,
    TsBaseline,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::DifLower => "dif-lower",
            BoundKind::DifUpper => "dif-upper",
            BoundKind::RifLower => "rif-lower",
            BoundKind::RifUpper => "rif-upper",
            BoundKind::TsBaseline => "ts-baseline",
        }
    }

    fn is_dif(self) -> bool {
        matches!(self, BoundKind::DifLower | BoundKind::DifUpper)
    }
}

/// The information constraint of a lower bound at its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `I(U;Z|X,Y)`, in the slice `X = x` for DIF.
    pub lhs: f64,
    pub rhs: f64,
    /// Largest admissible `lhs`.
    pub threshold: f64,
    pub margin: f64,
    pub rhs_mode: Option<RhsMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub kind: BoundKind,
    pub budget: f64,
    pub value: f64,
    /// False when `X_D` (DIF) or `P_D` (RIF) is empty.
    pub feasible: bool,
    /// Capacity used to gate the bound.
    pub gate: f64,
    pub witness_px: Option<Pmf>,
    pub witness_aux: Option<CondKernel>,
    pub x_star: Option<usize>,
    pub constraint: Option<ConstraintReport>,
    /// Set when no restart improved on its start and the best value was
    /// reached only once.
    pub possibly_suboptimal: bool,
    /// Restarts that reached the best value within 1e-6.
    pub confirmations: usize,
    /// Frank-Wolfe gap of an exact solver, when one was used.
    pub certificate_gap: Option<f64>,
}

impl BoundResult {
    fn empty(kind: BoundKind, budget: f64, feasible: bool, gate: f64) -> Self {
        Self {
            kind,
            budget,
            value: 0.0,
            feasible,
            gate,
            witness_px: None,
            witness_aux: None,
            x_star: None,
            constraint: None,
            possibly_suboptimal: false,
            confirmations: 0,
            certificate_gap: None,
        }
    }
}

/// Optimum of one slice problem.
#[derive(Debug, Clone)]
pub(crate) struct SliceSolution {
    pub q: Vec<f64>,
    pub value: f64,
    pub lhs: f64,
    pub improved: bool,
    pub confirmations: usize,
}

/// Which feasible set a gate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateFamily {
    /// Inputs restricted to `X_D`.
    Symbols,
    /// Input distributions restricted to `P_D`.
    Distributions,
}

/// Precomputed channel quantities shared by every bound evaluation.
#[derive(Debug, Clone)]
pub struct BoundContext {
    ch: StateChannel,
    est: EstimatorTable,
    avg: AveragedChannel,
    forward: CondKernel,
    slices: Vec<Slice>,
    iyz: Vec<f64>,
    hz: Vec<f64>,
}

fn best_index(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

fn normalized_pmf(alphabet: &Alphabet, p: &[f64]) -> Result<Pmf> {
    let mut p: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    let drift = p.iter().sum::<f64>() - 1.0;
    if let Some(m) = p.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *m -= drift;
    }
    Pmf::new(alphabet.clone(), p)
}

fn normalized_rows(q: &[f64], width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(q.len());
    for row in q.chunks(width) {
        let mut r: Vec<f64> = row.iter().map(|v| v.max(0.0)).collect();
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|v| *v /= s);
        out.extend(r);
    }
    out
}

impl BoundContext {
    pub fn new(ch: &StateChannel, est: &EstimatorTable) -> Result<Self> {
        if est.n_inputs() != ch.x().size() {
            return Err(Error::AlphabetMismatch("estimator does not match the channel input".into()));
        }
        let avg = averaged_channel(ch);
        let forward = forward_marginal(&avg);
        let slices: Vec<Slice> = ch.x().symbols().map(|x| Slice::new(&avg, x)).collect();
        let iyz = slices.iter().map(Slice::iyz).collect();
        let hz = slices.iter().map(Slice::hz).collect();
        Ok(Self {
            ch: ch.clone(),
            est: est.clone(),
            avg,
            forward,
            slices,
            iyz,
            hz,
        })
    }

    pub fn channel(&self) -> &StateChannel {
        &self.ch
    }

    pub fn estimator(&self) -> &EstimatorTable {
        &self.est
    }

    pub fn averaged(&self) -> &AveragedChannel {
        &self.avg
    }

    pub fn forward(&self) -> &CondKernel {
        &self.forward
    }

    /// `I(Y;Z | X = x)` for every input.
    pub fn slice_information(&self) -> &[f64] {
        &self.iyz
    }

    /// `H(Z | X = x)` for every input.
    pub fn slice_feedback_entropy(&self) -> &[f64] {
        &self.hz
    }

    fn u_alphabet(&self, nu: usize) -> Alphabet {
        Alphabet::new(VAR_U, nu).expect("nonzero")
    }

    fn aux_kernel(&self, rows: &[f64], nu: usize) -> Result<CondKernel> {
        let x = Alphabet::new(VAR_X, self.ch.x().size())?;
        let z = Alphabet::new(VAR_Z, self.ch.z().size())?;
        CondKernel::new(vec![x, z], self.u_alphabet(nu), normalized_rows(rows, nu))
    }

    /// Capacity of `W̃` over the distortion-feasible inputs.
    pub fn capacity_gate(&self, budget: f64, family: GateFamily, cfg: &SolverConfig) -> Result<f64> {
        match family {
            GateFamily::Symbols => {
                let xs = feasible_symbols(&self.est, budget);
                if xs.is_empty() {
                    return Ok(0.0);
                }
                let k = self.forward.restrict_inputs(&xs)?;
                Ok(blahut_arimoto_capacity(&k, cfg.ba_tol, cfg.ba_max_iter)?.capacity)
            }
            GateFamily::Distributions => Ok(self.constrained_rate(&vec![0.0; self.slices.len()], budget, cfg)?
                .map_or(0.0, |o| o.value)),
        }
    }

    /// Capacity of `W̃` with no distortion constraint.
    pub fn unconstrained_capacity(&self, cfg: &SolverConfig) -> Result<f64> {
        Ok(blahut_arimoto_capacity(&self.forward, cfg.ba_tol, cfg.ba_max_iter)?.capacity)
    }

    fn constrained_rate(&self, reward: &[f64], budget: f64, cfg: &SolverConfig) -> Result<Option<ConstrainedOptimum>> {
        blahut_arimoto_constrained(
            &self.forward,
            reward,
            self.est.dstars(),
            budget,
            cfg.ba_tol,
            cfg.ba_max_iter,
        )
    }

    pub fn dif_upper(&self, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
        let xs = feasible_symbols(&self.est, budget);
        let gate = self.unconstrained_capacity(cfg)?;
        if xs.is_empty() {
            return Ok(BoundResult::empty(BoundKind::DifUpper, budget, false, gate));
        }
        if gate <= cfg.gate_tol {
            return Ok(BoundResult::empty(BoundKind::DifUpper, budget, true, gate));
        }
        let (i1, m1) = best_index(xs.iter().map(|&x| self.iyz[x])).expect("nonempty");
        let (i2, m2) = best_index(xs.iter().map(|&x| self.hz[x])).expect("nonempty");
        let (x_star, value) = if m1 <= m2 { (xs[i1], m1) } else { (xs[i2], m2) };
        let mut r = BoundResult::empty(BoundKind::DifUpper, budget, true, gate);
        r.value = value;
        r.x_star = Some(x_star);
        r.witness_px = Some(Pmf::point_mass(self.ch.x().clone(), x_star)?);
        Ok(r)
    }

    pub fn rif_upper(&self, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
        let gate = self.unconstrained_capacity(cfg)?;
        if budget < self.est.min_dstar() - crate::sensing::FEASIBILITY_SLACK {
            return Ok(BoundResult::empty(BoundKind::RifUpper, budget, false, gate));
        }
        if gate <= cfg.gate_tol {
            return Ok(BoundResult::empty(BoundKind::RifUpper, budget, true, gate));
        }
        let opt = self
            .constrained_rate(&self.iyz, budget, cfg)?
            .expect("feasibility checked above");
        let mut r = BoundResult::empty(BoundKind::RifUpper, budget, true, gate);
        r.value = opt.value;
        r.certificate_gap = Some(opt.certificate_gap);
        r.witness_px = Some(normalized_pmf(self.ch.x(), opt.argmax.probs())?);
        Ok(r)
    }

    /// Threshold on `I(U;Z|X=x,Y)` and the RHS it derives from.
    fn dif_threshold(&self, budget: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
        Ok(match cfg.rhs_mode {
            RhsMode::SliceZero => (0.0, cfg.constraint_margin),
            RhsMode::RestrictedCapacity => {
                let c = self.capacity_gate(budget, GateFamily::Symbols, cfg)?;
                (c, c - cfg.constraint_margin)
            }
        })
    }

    pub(crate) fn solve_slice(
        &self,
        x: usize,
        threshold: f64,
        cfg: &SolverConfig,
        warm: Option<&[f64]>,
    ) -> SliceSolution {
        let slice = &self.slices[x];
        let nz = slice.nz;
        let nu = cfg.u_size(nz);
        let prob = SliceProblem { slice, nu, threshold };
        let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / nu as f64; nz * nu], copy_rows(nz, nu)];
        if let Some(w) = warm {
            starts.push(w.to_vec());
        }
        if nu * nz <= 6 {
            if let Some(g) = grid_seed(&prob, nz, nu, cfg.grid_resolution) {
                starts.push(g);
            }
        }
        let fixed = starts.len();
        for k in fixed..cfg.restarts.max(fixed) {
            let mut rng = child_rng(cfg.seed, 1 + x as u64, k as u64);
            let q = random_rows(&mut rng, nz, nu);
            let anchor = slice.decouple(&q, nu);
            let t: f64 = rand::Rng::gen(&mut rng);
            starts.push(q.iter().zip(&anchor).map(|(a, b)| (1.0 - t) * a + t * b).collect());
        }
        let runs: Vec<Option<Ascent>> = starts
            .into_par_iter()
            .map(|s| ascend(&prob, s, cfg.ascent_steps, cfg.initial_step))
            .collect();
        summarize_slice(&prob, runs)
    }

    pub fn dif_lower(&self, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
        self.dif_lower_warm(budget, cfg, None)
    }

    pub(crate) fn dif_lower_warm(
        &self,
        budget: f64,
        cfg: &SolverConfig,
        warm: Option<&BoundResult>,
    ) -> Result<BoundResult> {
        cfg.validate()?;
        let xs = feasible_symbols(&self.est, budget);
        let gate = self.capacity_gate(budget, GateFamily::Symbols, cfg)?;
        if xs.is_empty() {
            return Ok(BoundResult::empty(BoundKind::DifLower, budget, false, gate));
        }
        if gate <= cfg.gate_tol {
            return Ok(BoundResult::empty(BoundKind::DifLower, budget, true, gate));
        }
        let (rhs, threshold) = self.dif_threshold(budget, cfg)?;
        let nu = cfg.u_size(self.ch.z().size());
        let block = self.ch.z().size() * nu;
        let warm_rows = warm.and_then(|w| Some((w.x_star?, w.witness_aux.as_ref()?)));
        let solutions: Vec<SliceSolution> = xs
            .iter()
            .map(|&x| {
                let w = warm_rows
                    .filter(|(wx, k)| *wx == x && k.output().size() == nu)
                    .map(|(_, k)| &k.table()[x * block..(x + 1) * block]);
                self.solve_slice(x, threshold, cfg, w)
            })
            .collect();
        let (i, value) = best_index(solutions.iter().map(|s| s.value)).expect("nonempty");
        let best = &solutions[i];
        let x_star = xs[i];
        let mut rows = vec![1.0 / nu as f64; self.ch.x().size() * block];
        rows[x_star * block..(x_star + 1) * block].copy_from_slice(&best.q);
        let mut r = BoundResult::empty(BoundKind::DifLower, budget, true, gate);
        r.value = value;
        r.x_star = Some(x_star);
        r.witness_px = Some(Pmf::point_mass(self.ch.x().clone(), x_star)?);
        r.witness_aux = Some(self.aux_kernel(&rows, nu)?);
        r.constraint = Some(ConstraintReport {
            lhs: best.lhs,
            rhs,
            threshold,
            margin: cfg.constraint_margin,
            rhs_mode: Some(cfg.rhs_mode),
        });
        r.possibly_suboptimal = !best.improved && best.confirmations < 2;
        r.confirmations = best.confirmations;
        Ok(r)
    }

    pub fn rif_lower(&self, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
        self.rif_lower_warm(budget, cfg, &[])
    }

    pub(crate) fn rif_lower_warm(
        &self,
        budget: f64,
        cfg: &SolverConfig,
        warm: &[&BoundResult],
    ) -> Result<BoundResult> {
        cfg.validate()?;
        let nx = self.ch.x().size();
        let floor = match self.constrained_rate(&vec![0.0; nx], budget, cfg)? {
            None => return Ok(BoundResult::empty(BoundKind::RifLower, budget, false, 0.0)),
            Some(o) => o,
        };
        let gate = floor.value;
        if gate <= cfg.gate_tol {
            return Ok(BoundResult::empty(BoundKind::RifLower, budget, true, gate));
        }
        let nz = self.ch.z().size();
        let nu = cfg.u_size(nz);
        let block = nz * nu;
        let prob = JointProblem {
            slices: &self.slices,
            forward: self.forward.table(),
            ny: self.ch.y().size(),
            cost: self.est.dstars(),
            budget,
            nu,
            margin: cfg.constraint_margin,
        };
        let assemble = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().chain(q).copied().collect() };
        let uniform_q = vec![1.0 / nu as f64; nx * block];
        let copy_q: Vec<f64> = (0..nx).flat_map(|_| copy_rows(nz, nu)).collect();
        let p_floor = floor.argmax.probs().to_vec();
        let mut starts = vec![assemble(&p_floor, &uniform_q), assemble(&p_floor, &copy_q)];
        if let Some(upper) = self.constrained_rate(&self.iyz, budget, cfg)? {
            let p_up = upper.argmax.probs().to_vec();
            starts.push(assemble(&p_up, &copy_q));
            // Slide the input toward the floor just far enough to satisfy
            // the constraint while keeping the copy kernel.
            let at = |t: f64| -> Vec<f64> {
                let p: Vec<f64> = p_up.iter().zip(&p_floor).map(|(a, b)| (1.0 - t) * a + t * b).collect();
                assemble(&p, &copy_q)
            };
            if ascent::Problem::eval(&prob, &at(1.0)).1 <= 0.0 {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if ascent::Problem::eval(&prob, &at(mid)).1 <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                starts.push(at(hi));
            }
        }
        for w in warm {
            if let (Some(px), Some(aux)) = (&w.witness_px, &w.witness_aux) {
                if aux.output().size() == nu {
                    if let Some(p) = project_polytope(px.probs(), self.est.dstars(), budget) {
                        starts.push(assemble(&p, aux.table()));
                    }
                }
            }
        }
        let fixed = starts.len();
        for k in fixed..cfg.restarts.max(fixed) {
            let mut rng = child_rng(cfg.seed, 0x5249_4600, k as u64);
            let raw = random_rows(&mut rng, 1, nx);
            let p = project_polytope(&raw, self.est.dstars(), budget).unwrap_or_else(|| p_floor.clone());
            let q = random_rows(&mut rng, nx * nz, nu);
            let mut v = assemble(&p, &q);
            let anchor = ascent::Problem::anchor(&prob, &v);
            let t: f64 = rand::Rng::gen(&mut rng);
            v.iter_mut().zip(&anchor).for_each(|(a, b)| *a = (1.0 - t) * *a + t * b);
            starts.push(v);
        }
        let runs: Vec<Option<Ascent>> = starts
            .into_par_iter()
            .map(|s| ascend(&prob, s, cfg.ascent_steps, cfg.initial_step))
            .collect();
        let mut improved = runs
            .iter()
            .flatten()
            .any(|r| r.objective > r.start_objective + 1e-12);
        let (bi, _) = best_index(runs.iter().map(|r| r.as_ref().map_or(f64::NEG_INFINITY, |r| r.objective)))
            .expect("at least one start");
        let mut best = match &runs[bi] {
            Some(r) => r.clone(),
            None => return Ok(BoundResult::empty(BoundKind::RifLower, budget, true, gate)),
        };
        let confirmations = runs
            .iter()
            .flatten()
            .filter(|r| r.objective >= best.objective - 1e-6)
            .count();
        // With the kernels fixed the input problem is concave; solve it
        // exactly and keep the result when the information constraint holds.
        for _ in 0..3 {
            let val = prob.value(&best.point);
            let reward: Vec<f64> = val.terms.iter().map(|t| t.a).collect();
            let Some(opt) = self.constrained_rate(&reward, budget, cfg)? else { break };
            let cand = assemble(opt.argmax.probs(), &best.point[nx..]);
            let (f, g) = ascent::Problem::eval(&prob, &cand);
            if g > 0.0 || f <= best.objective + 1e-13 {
                break;
            }
            improved = true;
            best = ascend(&prob, cand, cfg.ascent_steps / 4 + 1, cfg.initial_step).unwrap_or(best);
        }
        let val = prob.value(&best.point);
        let (p, q) = best.point.split_at(nx);
        let mut r = BoundResult::empty(BoundKind::RifLower, budget, true, gate);
        r.value = val.objective.max(gate);
        if val.objective < gate {
            // The decoupled kernel at the floor input is always admissible.
            r.witness_px = Some(normalized_pmf(self.ch.x(), &p_floor)?);
            r.witness_aux = Some(self.aux_kernel(&uniform_q, nu)?);
            r.constraint = Some(ConstraintReport {
                lhs: 0.0,
                rhs: gate,
                threshold: gate - cfg.constraint_margin,
                margin: cfg.constraint_margin,
                rhs_mode: None,
            });
        } else {
            r.witness_px = Some(normalized_pmf(self.ch.x(), p)?);
            r.witness_aux = Some(self.aux_kernel(q, nu)?);
            r.constraint = Some(ConstraintReport {
                lhs: val.lhs,
                rhs: val.ixy,
                threshold: val.ixy - cfg.constraint_margin,
                margin: cfg.constraint_margin,
                rhs_mode: None,
            });
        }
        r.possibly_suboptimal = !improved && confirmations < 2;
        r.confirmations = confirmations;
        Ok(r)
    }

    /// Evaluates one bound by kind.
    pub fn evaluate(&self, kind: BoundKind, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
        match kind {
            BoundKind::DifLower => self.dif_lower(budget, cfg),
            BoundKind::DifUpper => self.dif_upper(budget, cfg),
            BoundKind::RifLower => self.rif_lower(budget, cfg),
            BoundKind::RifUpper => self.rif_upper(budget, cfg),
            BoundKind::TsBaseline => Err(Error::InvalidParameter(
                "the time-sharing baseline is a curve; use time_sharing_baseline".into(),
            )),
        }
    }

    /// Time sharing between the pure-sensing symbol and the unconstrained
    /// optimizer of `source`.
    pub fn time_sharing(&self, source: BoundKind, grid: &[f64], cfg: &SolverConfig) -> Result<TsCurve> {
        let full = self.est.max_dstar();
        let ident = self.evaluate(source, full, cfg)?;
        Ok(self.time_sharing_from(source, &ident, grid))
    }

    pub(crate) fn time_sharing_from(&self, source: BoundKind, ident: &BoundResult, grid: &[f64]) -> TsCurve {
        let sense = self.est.min_dstar();
        let d_id = ident
            .witness_px
            .as_ref()
            .map_or(sense, |p| crate::sensing::dstar_dist(&self.est, p));
        let curve = TsCurve {
            source,
            sensing_point: (sense, 0.0),
            identification_point: (d_id, ident.value),
            points: Vec::new(),
        };
        let points = grid.iter().map(|&d| curve.at(d)).collect();
        TsCurve { points, ..curve }
    }
}

fn summarize_slice(prob: &SliceProblem<'_>, runs: Vec<Option<Ascent>>) -> SliceSolution {
    let improved = runs.iter().flatten().any(|r| r.objective > r.start_objective + 1e-12);
    let (bi, _) = best_index(runs.iter().map(|r| r.as_ref().map_or(f64::NEG_INFINITY, |r| r.objective)))
        .expect("at least one start");
    match &runs[bi] {
        Some(best) => {
            let t = prob.slice.terms(&best.point, prob.nu);
            SliceSolution {
                q: best.point.clone(),
                value: t.iuz(),
                lhs: t.b,
                improved,
                confirmations: runs
                    .iter()
                    .flatten()
                    .filter(|r| r.objective >= best.objective - 1e-6)
                    .count(),
            }
        }
        None => SliceSolution {
            q: vec![1.0 / prob.nu as f64; prob.slice.nz * prob.nu],
            value: 0.0,
            lhs: 0.0,
            improved: false,
            confirmations: 0,
        },
    }
}

/// Best feasible point of the product grid over kernel rows.
fn grid_seed(prob: &SliceProblem<'_>, nz: usize, nu: usize, res: usize) -> Option<Vec<f64>> {
    let rows = simplex_grid(nu, res.max(1));
    let sizes = vec![rows.len(); nz];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut q = vec![0.0; nz * nu];
    for idx in crate::prob::MixedRadix::new(&sizes) {
        for (z, &r) in idx.iter().enumerate() {
            q[z * nu..(z + 1) * nu].copy_from_slice(&rows[r]);
        }
        let (f, g) = ascent::Problem::eval(prob, &q);
        if g <= 0.0 && best.as_ref().is_none_or(|(b, _)| f > *b) {
            best = Some((f, q.clone()));
        }
    }
    best.map(|(_, q)| q)
}

/// A time-sharing curve sampled on a distortion grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsCurve {
    pub source: BoundKind,
    /// `(min_x d*(x), 0)`.
    pub sensing_point: (f64, f64),
    /// `(d*(P_id), R(P_id))`.
    pub identification_point: (f64, f64),
    pub points: Vec<TsPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsPoint {
    pub budget: f64,
    pub rate: f64,
    pub feasible: bool,
}

impl TsCurve {
    /// `(α d*(P_id) + (1-α) d_sense, α R)` for `α` in `[0, 1]`.
    pub fn mixture(&self, alpha: f64) -> (f64, f64) {
        let (ds, _) = self.sensing_point;
        let (di, r) = self.identification_point;
        (alpha * di + (1.0 - alpha) * ds, alpha * r)
    }

    /// Best time-sharing rate at distortion budget `d`.
    pub fn at(&self, d: f64) -> TsPoint {
        let (ds, _) = self.sensing_point;
        let (di, r) = self.identification_point;
        if d < ds - crate::sensing::FEASIBILITY_SLACK {
            return TsPoint {
                budget: d,
                rate: 0.0,
                feasible: false,
            };
        }
        let alpha = if di <= ds { 1.0 } else { ((d - ds) / (di - ds)).clamp(0.0, 1.0) };
        TsPoint {
            budget: d,
            rate: alpha * r,
            feasible: true,
        }
    }
}

pub fn dif_upper_bound(ch: &StateChannel, est: &EstimatorTable, budget: f64) -> Result<BoundResult> {
    BoundContext::new(ch, est)?.dif_upper(budget, &SolverConfig::default())
}

pub fn dif_lower_bound(ch: &StateChannel, est: &EstimatorTable, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
    BoundContext::new(ch, est)?.dif_lower(budget, cfg)
}

pub fn rif_upper_bound(ch: &StateChannel, est: &EstimatorTable, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
    BoundContext::new(ch, est)?.rif_upper(budget, cfg)
}

pub fn rif_lower_bound(ch: &StateChannel, est: &EstimatorTable, budget: f64, cfg: &SolverConfig) -> Result<BoundResult> {
    BoundContext::new(ch, est)?.rif_lower(budget, cfg)
}

/// Capacity gate for the family of `kind`: `X_D` for DIF, `P_D` for RIF.
pub fn capacity_gate(ch: &StateChannel, est: &EstimatorTable, budget: f64, kind: BoundKind) -> Result<f64> {
    let family = if kind.is_dif() {
        GateFamily::Symbols
    } else {
        GateFamily::Distributions
    };
    BoundContext::new(ch, est)?.capacity_gate(budget, family, &SolverConfig::default())
}

pub fn time_sharing_baseline(
    ch: &StateChannel,
    est: &EstimatorTable,
    source: BoundKind,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Result<TsCurve> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("distortion grid must be sorted ascending".into()));
    }
    BoundContext::new(ch, est)?.time_sharing(source, grid, cfg)
}

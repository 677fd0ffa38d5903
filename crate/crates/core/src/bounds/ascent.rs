//! Feasible-direction projected ascent for one smooth inequality constraint.
//!
//! Each iterate stays feasible. A trial step that violates the constraint is
//! pulled back toward a problem-specific anchor on which the constraint is
//! slack (the auxiliary kernel with `U` decoupled from `Z`).

use rand::Rng;

use super::slice::{Slice, Terms};
use crate::info::input_output_information;
use crate::simplex::{project_polytope, project_rows};

pub(crate) trait Problem: Sync {
    fn dim(&self) -> usize;
    fn project(&self, v: &mut [f64]);
    /// Projects `g` onto the tangent cone of the domain at `v`.
    fn tangent(&self, v: &[f64], g: &mut [f64]);
    /// `(objective, constraint)`; feasible iff `constraint <= 0`.
    fn eval(&self, v: &[f64]) -> (f64, f64);
    fn gradients(&self, v: &[f64], gf: &mut [f64], gg: &mut [f64]);
    fn anchor(&self, v: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone)]
pub(crate) struct Ascent {
    pub point: Vec<f64>,
    pub objective: f64,
    pub start_objective: f64,
}

fn mix(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restores feasibility of `v`: first by Newton steps on the constraint
/// along its gradient, then by moving toward the anchor just far enough.
pub(crate) fn repair<P: Problem>(prob: &P, v: Vec<f64>) -> Option<(Vec<f64>, f64, f64)> {
    let (f, g) = prob.eval(&v);
    if g <= 0.0 {
        return Some((v, f, g));
    }
    let n = prob.dim();
    let mut gf = vec![0.0; n];
    let mut gg = vec![0.0; n];
    let mut w = v.clone();
    let mut gw = g;
    for _ in 0..4 {
        prob.gradients(&w, &mut gf, &mut gg);
        // The step runs along -gg, so the cone is taken for that direction.
        gg.iter_mut().for_each(|gi| *gi = -*gi);
        prob.tangent(&w, &mut gg);
        gg.iter_mut().for_each(|gi| *gi = -*gi);
        let norm = dot(&gg, &gg);
        if !(norm > 0.0) {
            break;
        }
        let step = (gw + 1e-12) / norm;
        for (wi, gi) in w.iter_mut().zip(&gg) {
            *wi -= step * gi;
        }
        prob.project(&mut w);
        let (fw, gnew) = prob.eval(&w);
        if gnew <= 0.0 {
            return Some((w, fw, gnew));
        }
        if !(gnew < gw) {
            break;
        }
        gw = gnew;
    }
    let anchor = prob.anchor(&v);
    let (fa, ga) = prob.eval(&anchor);
    if ga > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (anchor.clone(), fa, ga);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let trial = mix(&v, &anchor, mid);
        let (ft, gt) = prob.eval(&trial);
        if gt <= 0.0 {
            hi = mid;
            best = (trial, ft, gt);
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Some(best)
}

pub(crate) fn ascend<P: Problem>(prob: &P, start: Vec<f64>, steps: usize, initial_step: f64) -> Option<Ascent> {
    let mut start = start;
    prob.project(&mut start);
    let (mut v, mut f, mut g) = repair(prob, start)?;
    let start_objective = f;
    let n = prob.dim();
    let mut gf = vec![0.0; n];
    let mut gg = vec![0.0; n];
    let mut t = initial_step;
    let mut stalled = 0;
    for _ in 0..steps {
        prob.gradients(&v, &mut gf, &mut gg);
        prob.tangent(&v, &mut gf);
        prob.tangent(&v, &mut gg);
        let mut d = gf.clone();
        let gg_norm = dot(&gg, &gg);
        if g > -1e-7 && gg_norm > 0.0 {
            let k = dot(&gf, &gg) / gg_norm;
            if k > 0.0 {
                for (di, gi) in d.iter_mut().zip(&gg) {
                    *di -= 1.001 * k * gi;
                }
            }
        }
        prob.tangent(&v, &mut d);
        let norm = dot(&d, &d).sqrt();
        if !(norm > 1e-13) {
            break;
        }
        d.iter_mut().for_each(|x| *x /= norm);
        let mut accepted = false;
        while t > 1e-13 {
            let mut cand: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            prob.project(&mut cand);
            if let Some((c, fc, gc)) = repair(prob, cand) {
                if fc > f {
                    stalled = if fc - f < 1e-13 { stalled + 1 } else { 0 };
                    v = c;
                    f = fc;
                    g = gc;
                    accepted = true;
                    t = (t * 1.6).min(1.0);
                    break;
                }
            }
            t *= 0.35;
        }
        if !accepted || stalled > 25 {
            break;
        }
    }
    Some(Ascent {
        point: v,
        objective: f,
        start_objective,
    })
}

/// A row-stochastic matrix with Dirichlet(1) rows.
pub(crate) fn random_rows<R: Rng>(rng: &mut R, rows: usize, width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * width);
    for _ in 0..rows {
        let e: Vec<f64> = (0..width).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = e.iter().sum();
        out.extend(e.iter().map(|v| v / s));
    }
    out
}

/// Kernel `u = z mod |U|`.
pub(crate) fn copy_rows(nz: usize, nu: usize) -> Vec<f64> {
    let mut q = vec![0.0; nz * nu];
    for z in 0..nz {
        q[z * nu + z % nu] = 1.0;
    }
    q
}

/// Every point of the simplex in `width` coordinates with denominators `res`.
pub(crate) fn simplex_grid(width: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(width: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == width {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(width, left - k, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if width == 0 {
        return out;
    }
    rec(width, res, res, &mut Vec::new(), &mut out);
    out
}

/// Projects each row of `g` onto the tangent cone of the simplex at the
/// matching row of `v`: zero-sum, and no decrease of entries already at 0.
fn cone_rows(v: &[f64], g: &mut [f64], width: usize) {
    for (row, grow) in v.chunks(width).zip(g.chunks_mut(width)) {
        let mut free: Vec<bool> = vec![true; width];
        loop {
            let k = free.iter().filter(|&&f| f).count();
            let mean = grow.iter().zip(&free).filter(|(_, &f)| f).map(|(g, _)| *g).sum::<f64>() / k.max(1) as f64;
            let mut changed = false;
            for i in 0..width {
                if free[i] && row[i] <= 1e-14 && grow[i] - mean < 0.0 && k > 1 {
                    free[i] = false;
                    changed = true;
                }
            }
            if !changed {
                for i in 0..width {
                    grow[i] = if free[i] { grow[i] - mean } else { 0.0 };
                }
                break;
            }
        }
    }
}

/// `max I(U;Z|X=x)` subject to `I(U;Z|X=x,Y) <= threshold`.
pub(crate) struct SliceProblem<'a> {
    pub slice: &'a Slice,
    pub nu: usize,
    pub threshold: f64,
}

impl Problem for SliceProblem<'_> {
    fn dim(&self) -> usize {
        self.slice.nz * self.nu
    }

    fn project(&self, v: &mut [f64]) {
        project_rows(v, self.nu);
    }

    fn tangent(&self, v: &[f64], g: &mut [f64]) {
        cone_rows(v, g, self.nu);
    }

    fn eval(&self, v: &[f64]) -> (f64, f64) {
        let t = self.slice.terms(v, self.nu);
        (t.iuz(), t.b - self.threshold)
    }

    fn gradients(&self, v: &[f64], gf: &mut [f64], gg: &mut [f64]) {
        self.slice.gradients(v, self.nu, gf, gg);
        for (f, g) in gf.iter_mut().zip(gg.iter()) {
            *f += g;
        }
    }

    fn anchor(&self, v: &[f64]) -> Vec<f64> {
        self.slice.decouple(v, self.nu)
    }
}

/// `max I(X;Y) + sum_x p(x) I(U;Y|X=x)` over `p` in the distortion polytope
/// and kernels `Q_x`, subject to `sum_x p(x) I(U;Z|Y,X=x) <= I(X;Y) - margin`.
///
/// The point is laid out as `[p, Q_0, Q_1, ...]`.
pub(crate) struct JointProblem<'a> {
    pub slices: &'a [Slice],
    /// Forward marginal `W̃(y|x)`, row-major.
    pub forward: &'a [f64],
    pub ny: usize,
    pub cost: &'a [f64],
    pub budget: f64,
    pub nu: usize,
    pub margin: f64,
}

/// Decomposed value of a joint-problem point.
#[derive(Debug, Clone)]
pub(crate) struct JointValue {
    pub ixy: f64,
    pub terms: Vec<Terms>,
    pub objective: f64,
    pub lhs: f64,
}

impl JointProblem<'_> {
    pub fn nx(&self) -> usize {
        self.slices.len()
    }

    pub fn block(&self) -> usize {
        self.slices[0].nz * self.nu
    }

    pub fn split<'v>(&self, v: &'v [f64]) -> (&'v [f64], &'v [f64]) {
        v.split_at(self.nx())
    }

    pub fn value(&self, v: &[f64]) -> JointValue {
        let (p, q) = self.split(v);
        let block = self.block();
        let ixy = input_output_information(self.forward, self.ny, p);
        let terms: Vec<Terms> = self
            .slices
            .iter()
            .enumerate()
            .map(|(x, s)| s.terms(&q[x * block..(x + 1) * block], self.nu))
            .collect();
        let gain: f64 = p.iter().zip(&terms).map(|(px, t)| px * t.a).sum();
        let lhs: f64 = p.iter().zip(&terms).map(|(px, t)| px * t.b).sum();
        JointValue {
            ixy,
            objective: ixy + gain,
            lhs,
            terms,
        }
    }

    /// `D(W̃_x || q_Y)` in bits for every input.
    fn divergences(&self, p: &[f64]) -> Vec<f64> {
        let mut qy = vec![0.0; self.ny];
        for (x, &px) in p.iter().enumerate() {
            for y in 0..self.ny {
                qy[y] += px * self.forward[x * self.ny + y];
            }
        }
        (0..p.len())
            .map(|x| {
                let row = &self.forward[x * self.ny..(x + 1) * self.ny];
                row.iter()
                    .zip(&qy)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, q)| w * (w / q).log2())
                    .sum()
            })
            .collect()
    }
}

impl Problem for JointProblem<'_> {
    fn dim(&self) -> usize {
        self.nx() * (1 + self.block())
    }

    fn project(&self, v: &mut [f64]) {
        let nx = self.nx();
        let (p, q) = v.split_at_mut(nx);
        if let Some(pp) = project_polytope(p, self.cost, self.budget) {
            p.copy_from_slice(&pp);
        }
        project_rows(q, self.nu);
    }

    fn tangent(&self, v: &[f64], g: &mut [f64]) {
        let nx = self.nx();
        let (gp, gq) = g.split_at_mut(nx);
        let (vp, vq) = v.split_at(nx);
        cone_rows(vp, gp, nx);
        // On the distortion face, keep only moves that do not raise the cost.
        let spend: f64 = vp.iter().zip(self.cost).map(|(a, b)| a * b).sum();
        if spend >= self.budget - 1e-12 {
            let rise: f64 = gp.iter().zip(self.cost).map(|(a, b)| a * b).sum();
            if rise > 0.0 {
                let mut c = self.cost.to_vec();
                cone_rows(vp, &mut c, nx);
                let cc = dot(&c, &c);
                if cc > 0.0 {
                    let k = dot(gp, &c) / cc;
                    gp.iter_mut().zip(&c).for_each(|(a, b)| *a -= k * b);
                }
                cone_rows(vp, gp, nx);
            }
        }
        cone_rows(vq, gq, self.nu);
    }

    fn eval(&self, v: &[f64]) -> (f64, f64) {
        let val = self.value(v);
        (val.objective, val.lhs - val.ixy + self.margin)
    }

    fn gradients(&self, v: &[f64], gf: &mut [f64], gg: &mut [f64]) {
        let nx = self.nx();
        let block = self.block();
        let (p, q) = self.split(v);
        let div = self.divergences(p);
        let mut ga = vec![0.0; block];
        let mut gb = vec![0.0; block];
        for (x, slice) in self.slices.iter().enumerate() {
            let qx = &q[x * block..(x + 1) * block];
            let t = slice.terms(qx, self.nu);
            gf[x] = div[x] + t.a;
            gg[x] = t.b - div[x];
            slice.gradients(qx, self.nu, &mut ga, &mut gb);
            for k in 0..block {
                gf[nx + x * block + k] = p[x] * ga[k];
                gg[nx + x * block + k] = p[x] * gb[k];
            }
        }
    }

    fn anchor(&self, v: &[f64]) -> Vec<f64> {
        let nx = self.nx();
        let block = self.block();
        let mut out = v.to_vec();
        for (x, slice) in self.slices.iter().enumerate() {
            let d = slice.decouple(&v[nx + x * block..nx + (x + 1) * block], self.nu);
            out[nx + x * block..nx + (x + 1) * block].copy_from_slice(&d);
        }
        out
    }
}

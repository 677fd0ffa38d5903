//! Independent reference computations for the integration tests. Nothing
//! here calls the library's information, sensing or bound code; channels are
//! plain tables.

#![allow(dead_code)]

use jidas::channel::{compose_channel, StateChannel};
use jidas::prob::{Alphabet, CondKernel, Pmf};
use jidas::sensing::DistortionFn;
use rand::Rng;

pub const FEASIBLE_SLACK: f64 = 1e-12;

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

pub fn hb(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// A state channel `W(y|x,s) P(z|y)` with prior `P(s)` and distortion `d(s, s_hat)`.
#[derive(Debug, Clone)]
pub struct RawChannel {
    pub nx: usize,
    pub ns: usize,
    pub ny: usize,
    pub nz: usize,
    pub prior: Vec<f64>,
    /// `[x][s][y]`.
    pub w: Vec<f64>,
    /// `[y][z]`.
    pub f: Vec<f64>,
    /// `[s][s_hat]`.
    pub d: Vec<f64>,
}

fn random_row<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut r: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = r.iter().sum();
    r.iter_mut().for_each(|v| *v /= s);
    r
}

impl RawChannel {
    pub fn random<R: Rng>(rng: &mut R, nx: usize, ns: usize, ny: usize, nz: usize) -> Self {
        let prior = random_row(rng, ns);
        let w = (0..nx * ns).flat_map(|_| random_row(rng, ny)).collect();
        let f = (0..ny).flat_map(|_| random_row(rng, nz)).collect();
        let d = (0..ns * ns).map(|k| if k / ns == k % ns { 0.0 } else { 1.0 }).collect();
        Self { nx, ns, ny, nz, prior, w, f, d }
    }

    /// Same forward channel, feedback `Z = Y`.
    pub fn noiseless<R: Rng>(rng: &mut R, nx: usize, ns: usize, ny: usize) -> Self {
        let mut c = Self::random(rng, nx, ns, ny, ny);
        c.f = (0..ny * ny).map(|k| if k / ny == k % ny { 1.0 } else { 0.0 }).collect();
        c
    }

    pub fn build(&self) -> (StateChannel, DistortionFn) {
        let a = |n: &str, k| Alphabet::new(n, k).unwrap();
        let fwd = CondKernel::new(vec![a("X", self.nx), a("S", self.ns)], a("Y", self.ny), self.w.clone()).unwrap();
        let fb = CondKernel::new(vec![a("Y", self.ny)], a("Z", self.nz), self.f.clone()).unwrap();
        let prior = Pmf::new(a("S", self.ns), self.prior.clone()).unwrap();
        (
            compose_channel(&fwd, &fb, &prior).unwrap(),
            DistortionFn::new(self.ns, self.d.clone()).unwrap(),
        )
    }

    /// `P(y, z | x)`, row-major in `y`.
    pub fn pyz(&self, x: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ny * self.nz];
        for s in 0..self.ns {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    out[y * self.nz + z] += self.prior[s] * self.w[(x * self.ns + s) * self.ny + y] * self.f[y * self.nz + z];
                }
            }
        }
        out
    }

    /// `P(y | x)`.
    pub fn py(&self, x: usize) -> Vec<f64> {
        (0..self.ny)
            .map(|y| (0..self.ns).map(|s| self.prior[s] * self.w[(x * self.ns + s) * self.ny + y]).sum())
            .collect()
    }

    /// Bayes risk of estimating `S` from `(x, Z)`.
    pub fn dstar(&self, x: usize) -> f64 {
        let mut total = 0.0;
        for z in 0..self.nz {
            let joint: Vec<f64> = (0..self.ns)
                .map(|s| {
                    self.prior[s]
                        * (0..self.ny)
                            .map(|y| self.w[(x * self.ns + s) * self.ny + y] * self.f[y * self.nz + z])
                            .sum::<f64>()
                })
                .collect();
            total += (0..self.ns)
                .map(|sh| (0..self.ns).map(|s| joint[s] * self.d[s * self.ns + sh]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
        }
        total
    }

    pub fn feasible(&self, budget: f64) -> Vec<usize> {
        (0..self.nx).filter(|&x| self.dstar(x) <= budget + FEASIBLE_SLACK).collect()
    }

    /// `I(X;Y)` for binary `X` with `P(X=1) = p` over the inputs `pair`.
    pub fn ixy(&self, pair: [usize; 2], p: f64) -> f64 {
        let (r0, r1) = (self.py(pair[0]), self.py(pair[1]));
        let mix: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| (1.0 - p) * a + p * b).collect();
        entropy(&mix) - (1.0 - p) * entropy(&r0) - p * entropy(&r1)
    }

    /// `H(Y)` under the same mixture.
    pub fn hy(&self, pair: [usize; 2], p: f64) -> f64 {
        let (r0, r1) = (self.py(pair[0]), self.py(pair[1]));
        let mix: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| (1.0 - p) * a + p * b).collect();
        entropy(&mix)
    }

    /// Feasible interval of `P(X=1)` for binary `X`.
    pub fn p_interval(&self, budget: f64) -> Option<(f64, f64)> {
        let (d0, d1) = (self.dstar(0), self.dstar(1));
        let b = budget + FEASIBLE_SLACK;
        match (d0 <= b, d1 <= b) {
            (true, true) => Some((0.0, 1.0)),
            (false, false) => None,
            (true, false) => Some((0.0, ((budget - d0) / (d1 - d0)).clamp(0.0, 1.0))),
            (false, true) => Some((((d0 - budget) / (d0 - d1)).clamp(0.0, 1.0), 1.0)),
        }
    }
}

/// Maximum of a concave function on `[lo, hi]`.
pub fn ternary_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    let x = 0.5 * (a + b);
    [(lo, f(lo)), (hi, f(hi)), (x, f(x))]
        .into_iter()
        .fold((x, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

/// BSC capacity.
pub fn bsc_capacity(p: f64) -> f64 {
    1.0 - hb(p)
}

/// Capacity of the forward marginal restricted to the inputs in `xs`
/// (at most two).
pub fn restricted_capacity(ch: &RawChannel, xs: &[usize]) -> f64 {
    match xs {
        [] | [_] => 0.0,
        [a, b] => ternary_max(|p| ch.ixy([*a, *b], p), 0.0, 1.0).1,
        _ => panic!("reference capacity handles at most two inputs"),
    }
}

/// Points of the probability simplex in `k` coordinates with denominator `r`.
pub fn simplex_grid(k: usize, r: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / r as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k - 1, left - c, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, r, r, &mut Vec::new(), &mut out);
    out
}

/// `(I(U;Y|x), I(U;Z|Y,x))` for the kernel `q[z][u]` in slice `pyz`.
pub fn slice_terms(pyz: &[f64], ny: usize, nz: usize, q: &[f64], nu: usize) -> (f64, f64) {
    let mut py = vec![0.0; ny];
    let mut pu = vec![0.0; nu];
    let mut pyu = vec![0.0; ny * nu];
    let mut pyzu = vec![0.0; ny * nz * nu];
    for y in 0..ny {
        for z in 0..nz {
            for u in 0..nu {
                let v = pyz[y * nz + z] * q[z * nu + u];
                pyzu[(y * nz + z) * nu + u] = v;
                py[y] += v;
                pu[u] += v;
                pyu[y * nu + u] += v;
            }
        }
    }
    let (hy, hu, hyu, hyz, hyzu) = (entropy(&py), entropy(&pu), entropy(&pyu), entropy(pyz), entropy(&pyzu));
    (hy + hu - hyu, hyz + hyu - hy - hyzu)
}

/// For one slice, `(b, a)` pairs on the kernel grid reduced to the frontier
/// of largest `a` for each admissible `b`.
pub fn slice_frontier(ch: &RawChannel, x: usize, nu: usize, res: usize) -> Vec<(f64, f64)> {
    assert_eq!(ch.nz, 2, "grid reference handles binary feedback");
    let rows = simplex_grid(nu, res);
    let pyz = ch.pyz(x);
    let mut pts = Vec::with_capacity(rows.len() * rows.len());
    let mut q = vec![0.0; 2 * nu];
    for r0 in &rows {
        for r1 in &rows {
            q[..nu].copy_from_slice(r0);
            q[nu..].copy_from_slice(r1);
            let (a, b) = slice_terms(&pyz, ch.ny, ch.nz, &q, nu);
            pts.push((b.max(0.0), a));
        }
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (b, a) in pts {
        if out.last().is_none_or(|l| a > l.1) {
            out.push((b, a));
        }
    }
    out
}

fn best_below(front: &[(f64, f64)], cap: f64) -> Option<f64> {
    let k = front.partition_point(|p| p.0 <= cap);
    (k > 0).then(|| front[k - 1].1)
}

/// Grid value of `max I(U;Z|X=x)` subject to `I(U;Z|X=x,Y) <= threshold`
/// over `x` in `xs`.
pub fn dif_lower_grid(fronts: &[Vec<(f64, f64)>], xs: &[usize], threshold: f64) -> f64 {
    xs.iter()
        .filter_map(|&x| {
            fronts[x]
                .iter()
                .filter(|p| p.0 <= threshold)
                .map(|p| p.0 + p.1)
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        })
        .fold(0.0, f64::max)
}

/// Grid value of `max I(X;Y) + sum_x p(x) I(U;Y|x)` subject to
/// `sum_x p(x) I(U;Z|Y,x) <= I(X;Y) - margin`, floored at the best `I(X;Y)`;
/// binary `X`.
pub fn rif_lower_grid(ch: &RawChannel, fronts: &[Vec<(f64, f64)>], budget: f64, margin: f64, p_points: usize) -> f64 {
    let Some((lo, hi)) = ch.p_interval(budget) else { return 0.0 };
    let floor = ternary_max(|p| ch.ixy([0, 1], p), lo, hi).1;
    let mut best = floor;
    for k in 0..=p_points {
        let p = lo + (hi - lo) * k as f64 / p_points as f64;
        let cap = ch.ixy([0, 1], p) - margin;
        if cap < 0.0 {
            continue;
        }
        let ixy = cap + margin;
        for &(b0, a0) in &fronts[0] {
            let used = (1.0 - p) * b0;
            if used > cap {
                break;
            }
            let a1 = if p > 0.0 {
                match best_below(&fronts[1], (cap - used) / p) {
                    Some(a) => a,
                    None => continue,
                }
            } else {
                0.0
            };
            best = best.max(ixy + (1.0 - p) * a0 + p * a1);
        }
    }
    best
}

/// Standard normal quantile.
pub fn normal_quantile(prob: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(prob)
}

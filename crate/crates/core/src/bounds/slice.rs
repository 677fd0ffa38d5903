//! Information terms of one input slice `X = x` as functions of the
//! auxiliary kernel `Q(u|z)`, with their gradients.
//!
//! Within a slice `U - Z - Y`, so
//! `I(U;Z) = I(U;Y) + I(U;Z|Y)` and `H(U|Y,Z) = H(U|Z)`.

use crate::channel::AveragedChannel;
use crate::info::entropy_of;

/// Gradient entries are evaluated with probabilities floored here.
const LOG_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone)]
pub(crate) struct Slice {
    pub ny: usize,
    pub nz: usize,
    /// `P(y, z | x)`, indexed `[y][z]`.
    pub pyz: Vec<f64>,
    pub pz: Vec<f64>,
    pub hy: f64,
}

/// `(I(U;Y), I(U;Z|Y))` at one kernel; their sum is `I(U;Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Terms {
    pub a: f64,
    pub b: f64,
}

impl Terms {
    pub fn iuz(self) -> f64 {
        self.a + self.b
    }
}

impl Slice {
    pub fn new(avg: &AveragedChannel, x: usize) -> Self {
        let (ny, nz) = (avg.y().size(), avg.z().size());
        let mut pyz = vec![0.0; ny * nz];
        let mut py = vec![0.0; ny];
        let mut pz = vec![0.0; nz];
        for y in 0..ny {
            for z in 0..nz {
                let p = avg.prob(x, y, z);
                pyz[y * nz + z] = p;
                py[y] += p;
                pz[z] += p;
            }
        }
        let hy = entropy_of(&py);
        Self { ny, nz, pyz, pz, hy }
    }

    /// `I(Y;Z | X = x)`.
    pub fn iyz(&self) -> f64 {
        (self.hy + entropy_of(&self.pz) - entropy_of(&self.pyz)).max(0.0)
    }

    /// `H(Z | X = x)`.
    pub fn hz(&self) -> f64 {
        entropy_of(&self.pz)
    }

    fn marginals(&self, q: &[f64], nu: usize) -> (Vec<f64>, Vec<f64>) {
        let mut pu = vec![0.0; nu];
        let mut pyu = vec![0.0; self.ny * nu];
        for z in 0..self.nz {
            let row = &q[z * nu..(z + 1) * nu];
            for (u, &quz) in row.iter().enumerate() {
                pu[u] += self.pz[z] * quz;
                for y in 0..self.ny {
                    pyu[y * nu + u] += self.pyz[y * self.nz + z] * quz;
                }
            }
        }
        (pu, pyu)
    }

    fn hu_given_z(&self, q: &[f64], nu: usize) -> f64 {
        (0..self.nz)
            .map(|z| self.pz[z] * entropy_of(&q[z * nu..(z + 1) * nu]))
            .sum()
    }

    pub fn terms(&self, q: &[f64], nu: usize) -> Terms {
        let (pu, pyu) = self.marginals(q, nu);
        let hu = entropy_of(&pu);
        let hyu = entropy_of(&pyu);
        let huz = self.hu_given_z(q, nu);
        Terms {
            a: (hu + self.hy - hyu).max(0.0),
            b: (hyu - self.hy - huz).max(0.0),
        }
    }

    /// Gradients of `a` and `b` with respect to `q[z][u]`.
    pub fn gradients(&self, q: &[f64], nu: usize, ga: &mut [f64], gb: &mut [f64]) {
        let (pu, pyu) = self.marginals(q, nu);
        for z in 0..self.nz {
            for u in 0..nu {
                let k = z * nu + u;
                let cross: f64 = (0..self.ny)
                    .map(|y| {
                        let w = self.pyz[y * self.nz + z];
                        if w > 0.0 {
                            w * pyu[y * nu + u].max(LOG_FLOOR).log2()
                        } else {
                            0.0
                        }
                    })
                    .sum();
                ga[k] = -self.pz[z] * pu[u].max(LOG_FLOOR).log2() + cross;
                gb[k] = -cross + self.pz[z] * q[k].max(LOG_FLOOR).log2();
            }
        }
    }

    /// Kernel with every row replaced by the `U` marginal, so that `U` is
    /// independent of `Z`.
    pub fn decouple(&self, q: &[f64], nu: usize) -> Vec<f64> {
        let mut pu = vec![0.0; nu];
        for z in 0..self.nz {
            for u in 0..nu {
                pu[u] += self.pz[z] * q[z * nu + u];
            }
        }
        let total: f64 = pu.iter().sum();
        if total <= 0.0 {
            return vec![1.0 / nu as f64; nu * self.nz];
        }
        pu.iter_mut().for_each(|p| *p /= total);
        (0..self.nz).flat_map(|_| pu.iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::averaged_channel;
    use crate::prob::{Alphabet, CondKernel, Pmf};

    fn slice(ps: f64, pn: f64) -> Slice {
        let bit = |n: &str| Alphabet::new(n, 2).unwrap();
        let forward = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0] * i[1]).unwrap();
        let feedback =
            CondKernel::from_fn(vec![bit("Y")], bit("Z"), |i, z| if i[0] == z { 1.0 - pn } else { pn }).unwrap();
        let ch = crate::channel::compose_channel(&forward, &feedback, &Pmf::bernoulli(bit("S"), ps).unwrap()).unwrap();
        Slice::new(&averaged_channel(&ch), 1)
    }

    #[test]
    fn copy_kernel_reaches_iyz() {
        let s = slice(0.2, 0.1);
        let t = s.terms(&[1.0, 0.0, 0.0, 1.0], 2);
        assert!((t.iuz() - s.hz()).abs() < 1e-12);
        assert!((t.a - s.iyz()).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_central_differences() {
        let s = slice(0.3, 0.15);
        let nu = 3;
        let q = vec![0.5, 0.3, 0.2, 0.1, 0.6, 0.3];
        let mut ga = vec![0.0; 6];
        let mut gb = vec![0.0; 6];
        s.gradients(&q, nu, &mut ga, &mut gb);
        // Directional derivatives along tangent moves within a row.
        for k in 0..6 {
            let j = if k % nu == 0 { k + 1 } else { k - 1 };
            let h = 1e-6;
            let mut plus = q.clone();
            let mut minus = q.clone();
            plus[k] += h;
            plus[j] -= h;
            minus[k] -= h;
            minus[j] += h;
            let (tp, tm) = (s.terms(&plus, nu), s.terms(&minus, nu));
            let da = (tp.a - tm.a) / (2.0 * h);
            let db = (tp.b - tm.b) / (2.0 * h);
            assert!((da - (ga[k] - ga[j])).abs() < 1e-6, "a at {k}");
            assert!((db - (gb[k] - gb[j])).abs() < 1e-6, "b at {k}");
        }
    }

    #[test]
    fn decoupled_kernel_has_no_information() {
        let s = slice(0.4, 0.1);
        let q = s.decouple(&[0.9, 0.1, 0.2, 0.8], 2);
        let t = s.terms(&q, 2);
        assert!(t.a < 1e-15 && t.b < 1e-15);
    }
}

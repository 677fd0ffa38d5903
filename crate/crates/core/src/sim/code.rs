//! Channel sampling and small explicit transmission codes with maximum
//! likelihood decoding.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::StateChannel;
use crate::info::blahut_arimoto_capacity;
use crate::prob::{CondKernel, MixedRadix};

/// Draws `(s, y, z)` for a given input.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    ny: usize,
    nz: usize,
    prior: Vec<f64>,
    /// Cumulative `W(y,z|x,s)` over `y * nz + z`, one row per `(x, s)`.
    law: Vec<Vec<f64>>,
    ns: usize,
}

fn cumulative(p: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    p.map(|v| {
        acc += v;
        acc
    })
    .collect()
}

fn draw(cdf: &[f64], r: f64) -> usize {
    let total = *cdf.last().expect("nonempty");
    let target = r * total;
    cdf.iter().position(|&c| target < c).unwrap_or(cdf.len() - 1)
}

impl ChannelSampler {
    pub fn new(ch: &StateChannel) -> Self {
        let (nx, ns, ny, nz) = (ch.x().size(), ch.s().size(), ch.y().size(), ch.z().size());
        let prior = cumulative(ch.prior().probs().iter().copied());
        let mut law = Vec::with_capacity(nx * ns);
        for x in 0..nx {
            for s in 0..ns {
                law.push(cumulative((0..ny * nz).map(|k| ch.w(k / nz, k % nz, x, s))));
            }
        }
        Self { ny, nz, prior, law, ns }
    }

    pub fn sample<R: Rng>(&self, x: usize, rng: &mut R) -> (usize, usize, usize) {
        let s = draw(&self.prior, rng.gen());
        let k = draw(&self.law[x * self.ns + s], rng.gen());
        (s, k / self.nz, k % self.nz)
    }

    pub fn ny(&self) -> usize {
        self.ny
    }
}

/// Samples an index from unnormalized weights.
pub fn draw_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    draw(&cumulative(weights.iter().copied()), rng.gen())
}

/// `size` codewords of `length` letters over `inputs`, each letter i.i.d.
/// from `weights`, decoded by maximum likelihood on the forward marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionCode {
    pub length: usize,
    pub words: Vec<Vec<usize>>,
}

impl TransmissionCode {
    /// Redraws repeated codewords while distinct ones remain available.
    pub fn random<R: Rng>(size: usize, length: usize, inputs: &[usize], weights: &[f64], rng: &mut R) -> Self {
        let cdf = cumulative(weights.iter().copied());
        let support = weights.iter().filter(|&&w| w > 0.0).count() as f64;
        let distinct = support.powi(length as i32) >= size as f64;
        let mut seen = std::collections::HashSet::new();
        let mut words = Vec::with_capacity(size);
        let mut redraws = 0;
        while words.len() < size {
            let w: Vec<usize> = (0..length).map(|_| inputs[draw(&cdf, rng.gen())]).collect();
            if distinct && redraws < 64 * size && !seen.insert(w.clone()) {
                redraws += 1;
                continue;
            }
            words.push(w);
        }
        Self { length, words }
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, w: usize) -> &[usize] {
        &self.words[w]
    }

    /// Maximum-likelihood index for outputs `y`; ties go to the smallest index.
    pub fn decode(&self, y: &[usize], forward: &CondKernel) -> usize {
        let ny = forward.output().size();
        let table = forward.table();
        let mut best = (f64::NEG_INFINITY, 0);
        for (w, word) in self.words.iter().enumerate() {
            let mut l = 0.0;
            for (&x, &yt) in word.iter().zip(y) {
                let p = table[x * ny + yt];
                if p <= 0.0 {
                    l = f64::NEG_INFINITY;
                    break;
                }
                l += p.ln();
            }
            if l > best.0 {
                best = (l, w);
            }
        }
        best.1
    }

    /// Exact `P(decoded = v | sent = w)`, row-major in `w`.
    pub fn transition(&self, forward: &CondKernel) -> Vec<f64> {
        let m = self.size();
        let ny = forward.output().size();
        let table = forward.table();
        let mut out = vec![0.0; m * m];
        for y in MixedRadix::new(&vec![ny; self.length]) {
            let v = self.decode(&y, forward);
            for (w, word) in self.words.iter().enumerate() {
                let p: f64 = word.iter().zip(&y).map(|(&x, &yt)| table[x * ny + yt]).product();
                out[w * m + v] += p;
            }
        }
        out
    }
}

/// Capacity-achieving input weights of the forward marginal restricted to
/// `inputs`, or uniform weights when the iteration does not settle.
pub fn code_weights(forward: &CondKernel, inputs: &[usize]) -> Vec<f64> {
    let uniform = vec![1.0 / inputs.len() as f64; inputs.len()];
    match forward.restrict_inputs(inputs) {
        Ok(k) => match blahut_arimoto_capacity(&k, 1e-9, 100_000) {
            Ok(c) => c.argmax.probs().to_vec(),
            Err(_) => uniform,
        },
        Err(_) => uniform,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{build_binary_channel, BinaryExampleParams};
    use crate::channel::{averaged_channel, forward_marginal};
    use crate::rng::child_rng;

    #[test]
    fn transition_rows_are_stochastic() {
        let (ch, _) = build_binary_channel(&BinaryExampleParams::new(0.2, 0.1).unwrap()).unwrap();
        let fwd = forward_marginal(&averaged_channel(&ch));
        let mut rng = child_rng(1, 0, 0);
        let code = TransmissionCode::random(4, 5, &[0, 1], &[0.5, 0.5], &mut rng);
        let t = code.transition(&fwd);
        for row in t.chunks(4) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_frequencies() {
        let (ch, _) = build_binary_channel(&BinaryExampleParams::new(0.2, 0.1).unwrap()).unwrap();
        let s = ChannelSampler::new(&ch);
        let mut rng = child_rng(2, 0, 0);
        let n = 100_000;
        let ones = (0..n).filter(|_| s.sample(1, &mut rng).1 == 1).count();
        assert!((ones as f64 / n as f64 - 0.2).abs() < 0.01);
    }
}

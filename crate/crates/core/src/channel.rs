//! State-dependent channel with noisy feedback.
//!
//! `W(y,z|x,s) = W(y|x,s) P(z|y)`: the decoder observes `y`, the encoder
//! observes the noisy copy `z` one step later, and the state `s` is drawn
//! i.i.d. from `P_S` and never seen by either side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{Alphabet, CondKernel, JointTable, Pmf, ROW_TOL};

pub const VAR_X: &str = "X";
pub const VAR_S: &str = "S";
pub const VAR_Y: &str = "Y";
pub const VAR_Z: &str = "Z";
pub const VAR_U: &str = "U";

/// Transition law `W(y,z|x,s)` together with the state prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateChannel {
    x: Alphabet,
    s: Alphabet,
    y: Alphabet,
    z: Alphabet,
    prior: Pmf,
    /// Indexed `[x][s][y][z]`.
    law: Vec<f64>,
}

impl StateChannel {
    /// Builds a channel from a joint law `law(x, s, y, z)`.
    pub fn from_law(
        x: Alphabet,
        s: Alphabet,
        y: Alphabet,
        z: Alphabet,
        prior: Pmf,
        mut law: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        if prior.support().size() != s.size() {
            return Err(Error::AlphabetMismatch("state prior does not match state alphabet".into()));
        }
        let yz = Alphabet::new(format!("{}{}", y.name(), z.name()), y.size() * z.size())?;
        let kernel = CondKernel::from_fn(vec![x.clone(), s.clone()], yz, |idx, o| {
            law(idx[0], idx[1], o / z.size(), o % z.size())
        })?;
        Ok(Self {
            x,
            s,
            y,
            z,
            prior,
            law: kernel.table().to_vec(),
        })
    }

    pub fn x(&self) -> &Alphabet {
        &self.x
    }

    pub fn s(&self) -> &Alphabet {
        &self.s
    }

    pub fn y(&self) -> &Alphabet {
        &self.y
    }

    pub fn z(&self) -> &Alphabet {
        &self.z
    }

    pub fn prior(&self) -> &Pmf {
        &self.prior
    }

    #[inline]
    pub fn w(&self, y: usize, z: usize, x: usize, s: usize) -> f64 {
        let (ns, ny, nz) = (self.s.size(), self.y.size(), self.z.size());
        self.law[((x * ns + s) * ny + y) * nz + z]
    }

    /// `P(z | x, s) = sum_y W(y,z|x,s)`.
    pub fn feedback_given_state(&self, z: usize, x: usize, s: usize) -> f64 {
        self.y.symbols().map(|y| self.w(y, z, x, s)).sum()
    }

    /// Joint over (X, S, Y, Z) for an input pmf.
    pub fn full_joint(&self, px: &Pmf) -> Result<JointTable> {
        if px.support().size() != self.x.size() {
            return Err(Error::AlphabetMismatch("input pmf does not match X".into()));
        }
        let mut data = Vec::with_capacity(self.law.len());
        for x in self.x.symbols() {
            for s in self.s.symbols() {
                for y in self.y.symbols() {
                    for z in self.z.symbols() {
                        data.push(px.prob(x) * self.prior.prob(s) * self.w(y, z, x, s));
                    }
                }
            }
        }
        JointTable::new(
            vec![VAR_X.into(), VAR_S.into(), VAR_Y.into(), VAR_Z.into()],
            vec![self.x.size(), self.s.size(), self.y.size(), self.z.size()],
            data,
        )
    }
}

/// Composes `W(y|x,s)` with the feedback link `P(z|y)`.
pub fn compose_channel(forward: &CondKernel, feedback: &CondKernel, prior: &Pmf) -> Result<StateChannel> {
    if forward.inputs().len() != 2 {
        return Err(Error::AlphabetMismatch("forward kernel must have inputs (X, S)".into()));
    }
    if feedback.inputs().len() != 1 || feedback.inputs()[0].size() != forward.output().size() {
        return Err(Error::AlphabetMismatch(format!(
            "feedback kernel input must be Y of size {}",
            forward.output().size()
        )));
    }
    let s = forward.inputs()[1].clone();
    if prior.support().size() != s.size() {
        return Err(Error::AlphabetMismatch(format!(
            "state prior has {} symbols, forward kernel expects {}",
            prior.support().size(),
            s.size()
        )));
    }
    StateChannel::from_law(
        forward.inputs()[0].clone(),
        s,
        forward.output().clone(),
        feedback.output().clone(),
        prior.clone(),
        |x, s, y, z| forward.prob(&[x, s], y) * feedback.prob(&[y], z),
    )
}

/// `Ŵ(y,z|x) = sum_s P_S(s) W(y,z|x,s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedChannel {
    x: Alphabet,
    y: Alphabet,
    z: Alphabet,
    /// Indexed `[x][y][z]`.
    law: Vec<f64>,
}

impl AveragedChannel {
    /// Builds an averaged channel directly from `law(x, y, z)`.
    pub fn from_law(
        x: Alphabet,
        y: Alphabet,
        z: Alphabet,
        mut law: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let yz = Alphabet::new(format!("{}{}", y.name(), z.name()), y.size() * z.size())?;
        let kernel = CondKernel::from_fn(vec![x.clone()], yz, |idx, o| {
            law(idx[0], o / z.size(), o % z.size())
        })?;
        Ok(Self {
            x,
            y,
            z,
            law: kernel.table().to_vec(),
        })
    }

    pub fn x(&self) -> &Alphabet {
        &self.x
    }

    pub fn y(&self) -> &Alphabet {
        &self.y
    }

    pub fn z(&self) -> &Alphabet {
        &self.z
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize, z: usize) -> f64 {
        self.law[(x * self.y.size() + y) * self.z.size() + z]
    }

    /// The kernel `x -> (y, z)` with output index `y * |Z| + z`.
    pub fn as_kernel(&self) -> CondKernel {
        let yz = Alphabet::new(
            format!("{}{}", self.y.name(), self.z.name()),
            self.y.size() * self.z.size(),
        )
        .expect("nonempty");
        CondKernel::new(vec![self.x.clone()], yz, self.law.clone()).expect("validated at construction")
    }

    /// Feedback marginal `P(z | x)`.
    pub fn feedback_marginal(&self, x: usize, z: usize) -> f64 {
        self.y.symbols().map(|y| self.prob(x, y, z)).sum()
    }
}

pub fn averaged_channel(ch: &StateChannel) -> AveragedChannel {
    AveragedChannel::from_law(ch.x.clone(), ch.y.clone(), ch.z.clone(), |x, y, z| {
        ch.s.symbols().map(|s| ch.prior.prob(s) * ch.w(y, z, x, s)).sum()
    })
    .expect("a convex combination of stochastic rows is stochastic")
}

/// `W̃(y|x) = sum_z Ŵ(y,z|x)`.
pub fn forward_marginal(avg: &AveragedChannel) -> CondKernel {
    CondKernel::from_fn(vec![avg.x.clone()], avg.y.clone(), |idx, y| {
        avg.z.symbols().map(|z| avg.prob(idx[0], y, z)).sum()
    })
    .expect("marginal of a stochastic row is stochastic")
}

/// Bayes posterior `P(s | x, z)`.
pub fn posterior_state(ch: &StateChannel, x: usize, z: usize) -> Result<Pmf> {
    if x >= ch.x.size() || z >= ch.z.size() {
        return Err(Error::AlphabetMismatch(format!("(x={x}, z={z}) outside the channel alphabets")));
    }
    let weights: Vec<f64> = ch
        .s
        .symbols()
        .map(|s| ch.prior.prob(s) * ch.feedback_given_state(z, x, s))
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::UnreachableObservation { x, z });
    }
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    // Division can leave the sum a few ulps away from one.
    let drift: f64 = probs.iter().sum::<f64>() - 1.0;
    if drift.abs() > ROW_TOL {
        let k = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        probs[k] -= drift;
    }
    Pmf::new(ch.s.clone(), probs)
}

/// Joint over (X, Y, Z) or (X, Y, Z, U) with `P_X · Ŵ · P(u|x,z)`.
///
/// The auxiliary kernel only sees `(x, z)`, so `U - (X,Z) - Y` holds by
/// construction.
pub fn build_joint(px: &Pmf, avg: &AveragedChannel, aux: Option<&CondKernel>) -> Result<JointTable> {
    if px.support().size() != avg.x.size() {
        return Err(Error::AlphabetMismatch(format!(
            "input pmf has {} symbols, channel input has {}",
            px.support().size(),
            avg.x.size()
        )));
    }
    let mut data = Vec::with_capacity(avg.law.len());
    for x in avg.x.symbols() {
        for y in avg.y.symbols() {
            for z in avg.z.symbols() {
                data.push(px.prob(x) * avg.prob(x, y, z));
            }
        }
    }
    let base = JointTable::new(
        vec![VAR_X.into(), VAR_Y.into(), VAR_Z.into()],
        vec![avg.x.size(), avg.y.size(), avg.z.size()],
        data,
    )?;
    match aux {
        None => Ok(base),
        Some(kernel) => {
            if kernel.inputs().len() != 2
                || kernel.inputs()[0].size() != avg.x.size()
                || kernel.inputs()[1].size() != avg.z.size()
            {
                return Err(Error::AlphabetMismatch(
                    "auxiliary kernel must have inputs (X, Z)".into(),
                ));
            }
            base.extend(VAR_U, &[VAR_X, VAR_Z], kernel)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit(name: &str) -> Alphabet {
        Alphabet::new(name, 2).unwrap()
    }

    /// Y = X·S, Z = Y xor N.
    fn binary(ps: f64, pn: f64) -> StateChannel {
        let forward = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0] * i[1]).unwrap();
        let feedback = CondKernel::from_fn(vec![bit("Y")], bit("Z"), |i, z| {
            if i[0] == z {
                1.0 - pn
            } else {
                pn
            }
        })
        .unwrap();
        compose_channel(&forward, &feedback, &Pmf::bernoulli(bit("S"), ps).unwrap()).unwrap()
    }

    #[test]
    fn identity_composition() {
        let fwd = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0]).unwrap();
        let fb = CondKernel::deterministic(vec![bit("Y")], bit("Z"), |i| i[0]).unwrap();
        let ch = compose_channel(&fwd, &fb, &Pmf::uniform(bit("S"))).unwrap();
        for x in 0..2 {
            for s in 0..2 {
                for y in 0..2 {
                    for z in 0..2 {
                        let expect = if y == x && z == y { 1.0 } else { 0.0 };
                        assert_eq!(ch.w(y, z, x, s), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn binary_entries() {
        let ch = binary(0.2, 0.1);
        assert_eq!(ch.w(1, 0, 1, 1), 1.0 * 0.1);
        assert_eq!(ch.w(0, 1, 1, 0), 0.1);
        let avg = averaged_channel(&ch);
        assert!((avg.prob(1, 1, 1) - 0.18).abs() < 1e-15);
        let fm = forward_marginal(&avg);
        assert!((fm.prob(&[1], 1) - 0.2).abs() < 1e-15);
        assert_eq!(fm.prob(&[0], 1), 0.0);
    }

    #[test]
    fn point_mass_prior_selects_state() {
        let fwd = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0] ^ i[1]).unwrap();
        let fb = CondKernel::deterministic(vec![bit("Y")], bit("Z"), |i| i[0]).unwrap();
        let ch = compose_channel(&fwd, &fb, &Pmf::point_mass(bit("S"), 1).unwrap()).unwrap();
        let avg = averaged_channel(&ch);
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    assert_eq!(avg.prob(x, y, z), ch.w(y, z, x, 1));
                }
            }
        }
    }

    #[test]
    fn posterior_examples() {
        let ch = binary(0.2, 0.1);
        let post = posterior_state(&ch, 1, 1).unwrap();
        assert!((post.prob(1) - 0.18 / 0.26).abs() < 1e-12);
        for z in 0..2 {
            let p = posterior_state(&ch, 0, z).unwrap();
            assert!((p.prob(1) - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn unreachable_observation_is_named() {
        let fwd = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0]).unwrap();
        let fb = CondKernel::deterministic(vec![bit("Y")], bit("Z"), |i| i[0]).unwrap();
        let ch = compose_channel(&fwd, &fb, &Pmf::uniform(bit("S"))).unwrap();
        match posterior_state(&ch, 0, 1) {
            Err(Error::UnreachableObservation { x: 0, z: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alphabet_mismatch_in_composition() {
        let fwd = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0]).unwrap();
        let fb = CondKernel::deterministic(vec![Alphabet::new("Y", 3).unwrap()], bit("Z"), |_| 0).unwrap();
        assert!(matches!(
            compose_channel(&fwd, &fb, &Pmf::uniform(bit("S"))),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn joint_entry_is_product_of_factors() {
        let ch = binary(0.2, 0.1);
        let avg = averaged_channel(&ch);
        let jt = build_joint(&Pmf::bernoulli(bit("X"), 0.5).unwrap(), &avg, None).unwrap();
        assert!((jt.get(&[1, 1, 0]) - 0.5 * 0.2 * 0.1).abs() < 1e-15);
        let pm = build_joint(&Pmf::point_mass(bit("X"), 0).unwrap(), &avg, None).unwrap();
        let mx = pm.marginal(&[VAR_X]).unwrap();
        assert!((mx.data()[0] - 1.0).abs() < 1e-15);
        assert_eq!(mx.data()[1], 0.0);
    }
}

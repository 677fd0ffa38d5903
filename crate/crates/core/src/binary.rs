//! The multiplicative Bernoulli channel `Y = X·S`, `Z = Y xor N` with
//! Hamming distortion on the state.

use serde::{Deserialize, Serialize};

use crate::bounds::{sweep_bounds, BoundContext, SolverConfig, Sweep};
use crate::channel::{averaged_channel, build_joint, compose_channel, StateChannel, VAR_Y, VAR_Z, VAR_X};
use crate::error::{Error, Result};
use crate::info::{binary_convolution, binary_entropy, cond_mutual_info_at, entropy};
use crate::prob::{Alphabet, CondKernel, Pmf};
use crate::sensing::{optimal_estimator, DistortionFn, EstimatorTable};

/// Agreement required between closed forms and the generic pipeline.
pub const CLOSED_FORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryExampleParams {
    pub p_s: f64,
    pub p_n: f64,
    /// Permits parameters outside `0 <= p_N <= p_S <= 1/2`.
    pub allow_out_of_regime: bool,
}

impl BinaryExampleParams {
    pub fn new(p_s: f64, p_n: f64) -> Result<Self> {
        let p = Self {
            p_s,
            p_n,
            allow_out_of_regime: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_override(p_s: f64, p_n: f64) -> Result<Self> {
        let p = Self {
            p_s,
            p_n,
            allow_out_of_regime: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn in_regime(&self) -> bool {
        0.0 <= self.p_n && self.p_n <= self.p_s && self.p_s <= 0.5
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_S", self.p_s), ("p_N", self.p_n)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not a probability")));
            }
        }
        if !self.allow_out_of_regime && !self.in_regime() {
            return Err(Error::InvalidParameter(format!(
                "(p_S, p_N) = ({}, {}) is outside 0 <= p_N <= p_S <= 1/2; pass the override to explore it",
                self.p_s, self.p_n
            )));
        }
        Ok(())
    }
}

fn bit(name: &str) -> Alphabet {
    Alphabet::new(name, 2).expect("nonempty")
}

/// The channel and its Hamming distortion.
pub fn build_binary_channel(params: &BinaryExampleParams) -> Result<(StateChannel, DistortionFn)> {
    params.validate()?;
    let forward = CondKernel::deterministic(vec![bit("X"), bit("S")], bit("Y"), |i| i[0] * i[1])?;
    let pn = params.p_n;
    let feedback = CondKernel::from_fn(vec![bit("Y")], bit("Z"), |i, z| if i[0] == z { 1.0 - pn } else { pn })?;
    let prior = Pmf::bernoulli(bit("S"), params.p_s)?;
    Ok((compose_channel(&forward, &feedback, &prior)?, DistortionFn::hamming(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms {
    pub dstar0: f64,
    pub dstar1: f64,
    /// `h(p_S * p_N) - h(p_N)`.
    pub i_yz_given_x1: f64,
    /// `h(p_S * p_N)`.
    pub h_z_given_x1: f64,
}

/// Closed forms, each checked against the generic channel, sensing and
/// information pipeline.
pub fn closed_form_quantities(params: &BinaryExampleParams) -> Result<ClosedForms> {
    let conv = binary_convolution(params.p_s, params.p_n);
    let cf = ClosedForms {
        dstar0: params.p_s,
        dstar1: params.p_n,
        i_yz_given_x1: binary_entropy(conv) - binary_entropy(params.p_n),
        h_z_given_x1: binary_entropy(conv),
    };
    let generic = generic_quantities(params)?;
    let pairs = [
        ("d*(0)", cf.dstar0, generic.dstar0),
        ("d*(1)", cf.dstar1, generic.dstar1),
        ("I(Y;Z|X=1)", cf.i_yz_given_x1, generic.i_yz_given_x1),
        ("H(Z|X=1)", cf.h_z_given_x1, generic.h_z_given_x1),
    ];
    for (name, a, b) in pairs {
        if (a - b).abs() > CLOSED_FORM_TOL {
            return Err(Error::Construction(format!(
                "closed form {name} = {a} disagrees with the generic value {b}"
            )));
        }
    }
    Ok(cf)
}

/// The same four quantities from the generic modules.
pub fn generic_quantities(params: &BinaryExampleParams) -> Result<ClosedForms> {
    let (ch, d) = build_binary_channel(params)?;
    let est = optimal_estimator(&ch, &d)?;
    let avg = averaged_channel(&ch);
    let jt = build_joint(&Pmf::uniform(bit(VAR_X)), &avg, None)?;
    let slice = jt.slice(VAR_X, 1)?;
    Ok(ClosedForms {
        dstar0: est.dstar(0),
        dstar1: est.dstar(1),
        i_yz_given_x1: cond_mutual_info_at(&jt, &[VAR_Y], &[VAR_Z], VAR_X, 1)?,
        h_z_given_x1: entropy(&slice, &[VAR_Z])?,
    })
}

/// 101 evenly spaced budgets on `[0, 0.5]`.
pub fn default_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 200.0).collect()
}

/// Channel, estimator and bound context for the example.
pub fn example_context(params: &BinaryExampleParams) -> Result<(BoundContext, EstimatorTable)> {
    let (ch, d) = build_binary_channel(params)?;
    let est = optimal_estimator(&ch, &d)?;
    Ok((BoundContext::new(&ch, &est)?, est))
}

pub fn sweep_curves(params: &BinaryExampleParams, grid: &[f64], cfg: &SolverConfig) -> Result<Sweep> {
    let (ctx, _) = example_context(params)?;
    sweep_bounds(&ctx, grid, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_is_enforced() {
        assert!(BinaryExampleParams::new(0.2, 0.3).is_err());
        assert!(BinaryExampleParams::new(0.6, 0.1).is_err());
        assert!(BinaryExampleParams::with_override(0.2, 0.3).is_ok());
        assert!(BinaryExampleParams::with_override(1.2, 0.3).is_err());
    }

    #[test]
    fn channel_entries() {
        let (ch, _) = build_binary_channel(&BinaryExampleParams::new(0.2, 0.1).unwrap()).unwrap();
        assert!((ch.w(0, 1, 1, 0) - 0.1).abs() < 1e-15);
        let (noiseless, _) = build_binary_channel(&BinaryExampleParams::new(0.3, 0.0).unwrap()).unwrap();
        for y in 0..2 {
            for z in 0..2 {
                assert_eq!(noiseless.w(y, z, 1, 1) > 0.0, y == 1 && z == 1);
            }
        }
    }

    #[test]
    fn closed_forms_reference_point() {
        let cf = closed_form_quantities(&BinaryExampleParams::new(0.2, 0.1).unwrap()).unwrap();
        assert_eq!(cf.dstar0, 0.2);
        assert_eq!(cf.dstar1, 0.1);
        assert!((cf.i_yz_given_x1 - 0.357_751).abs() < 5e-7);
        let noiseless = closed_form_quantities(&BinaryExampleParams::new(0.3, 0.0).unwrap()).unwrap();
        assert!((noiseless.i_yz_given_x1 - binary_entropy(0.3)).abs() < 1e-15);
    }

    #[test]
    fn grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[20], 0.1);
        assert_eq!(g[100], 0.5);
    }
}

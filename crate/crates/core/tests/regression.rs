mod common;

use jidas::binary::{build_binary_channel, example_context, BinaryExampleParams};
use jidas::bounds::SolverConfig;

use common::*;

/// Grid value at p_S = 0.2, p_N = 0.1, D = 0.15, |U| = 3 with P_X(1) in
/// steps of 1/200 and kernel rows in steps of 1/32.
const PINNED_RIF_LOWER: f64 = 0.213_876_203;

/// The binary example as raw arrays for the reference code.
fn raw_binary(p_s: f64, p_n: f64) -> RawChannel {
    let (ch, d) = build_binary_channel(&BinaryExampleParams::new(p_s, p_n).unwrap()).unwrap();
    let (nx, ns, ny, nz) = (ch.x().size(), ch.s().size(), ch.y().size(), ch.z().size());
    let mut w = vec![0.0; nx * ns * ny];
    let mut f = vec![0.0; ny * nz];
    for x in 0..nx {
        for s in 0..ns {
            for y in 0..ny {
                let wy: f64 = (0..nz).map(|z| ch.w(y, z, x, s)).sum();
                w[(x * ns + s) * ny + y] = wy;
                if wy > 0.0 {
                    for z in 0..nz {
                        f[y * nz + z] = ch.w(y, z, x, s) / wy;
                    }
                }
            }
        }
    }
    RawChannel { nx, ns, ny, nz, prior: ch.prior().probs().to_vec(), w, f, d: d.table().to_vec() }
}

#[test]
fn rif_lower_matches_the_pinned_grid_value() {
    let raw = raw_binary(0.2, 0.1);
    let fronts: Vec<_> = (0..2).map(|x| slice_frontier(&raw, x, 3, 32)).collect();
    let cfg = SolverConfig { u_alphabet_size: Some(3), ..SolverConfig::default() };
    let oracle = rif_lower_grid(&raw, &fronts, 0.15, cfg.constraint_margin, 200);
    let (ctx, _) = example_context(&BinaryExampleParams::new(0.2, 0.1).unwrap()).unwrap();
    let solver = ctx.rif_lower(0.15, &cfg).unwrap().value;
    assert!((oracle - PINNED_RIF_LOWER).abs() < 1e-8, "{oracle}");
    assert!(solver >= oracle - 1e-6 && solver <= oracle + 0.01, "solver {solver} oracle {oracle}");
}

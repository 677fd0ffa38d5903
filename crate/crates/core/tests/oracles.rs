//! Self-checks of the reference implementations in `common` against values
//! known in closed form.

mod common;

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn scalar_helpers() {
    assert_abs_diff_eq!(hb(0.5), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(hb(0.0), 0.0);
    assert_abs_diff_eq!(entropy(&[0.25; 4]), 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(bsc_capacity(0.11), 0.500_084_041_835, epsilon = 1e-11);
    let (arg, val) = ternary_max(|p| -(p - 0.3) * (p - 0.3), 0.0, 1.0);
    assert_abs_diff_eq!(arg, 0.3, epsilon = 1e-7);
    assert_abs_diff_eq!(val, 0.0, epsilon = 1e-14);
    assert_abs_diff_eq!(normal_quantile(0.975), 1.959_963_984_540_054, epsilon = 1e-9);
    assert_eq!(simplex_grid(3, 4).len(), 15);
}

#[test]
fn slice_terms_at_extreme_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ch = RawChannel::noiseless(&mut rng, 2, 2, 2);
    for x in 0..2 {
        let pyz = ch.pyz(x);
        let (a, b) = slice_terms(&pyz, 2, 2, &[1.0, 0.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(a, entropy(&ch.py(x)), epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);
        let (a, b) = slice_terms(&pyz, 2, 2, &[0.5, 0.5, 0.5, 0.5], 2);
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn grid_oracle_recovers_noiseless_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let ch = RawChannel::noiseless(&mut rng, 2, 2, 2);
        let fronts: Vec<_> = (0..2).map(|x| slice_frontier(&ch, x, 3, 12)).collect();
        let best = (0..2).map(|x| entropy(&ch.py(x))).fold(0.0, f64::max);
        assert_abs_diff_eq!(dif_lower_grid(&fronts, &[0, 1], 1e-9), best, epsilon = 1e-12);
    }
}

#[test]
fn grid_oracle_is_bounded_by_the_threshold_without_feedback_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ch = RawChannel::random(&mut rng, 2, 2, 2, 2);
    ch.f = vec![0.3, 0.7, 0.3, 0.7];
    let fronts: Vec<_> = (0..2).map(|x| slice_frontier(&ch, x, 3, 12)).collect();
    for thr in [0.0, 0.01, 0.1] {
        assert!(dif_lower_grid(&fronts, &[0, 1], thr) <= thr + 1e-12);
    }
}

#[test]
fn grid_rif_value_lies_between_floor_and_upper_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let ch = RawChannel::random(&mut rng, 2, 2, 2, 2);
        let budget = ch.dstar(0).max(ch.dstar(1));
        let fronts: Vec<_> = (0..2).map(|x| slice_frontier(&ch, x, 3, 12)).collect();
        let v = rif_lower_grid(&ch, &fronts, budget, 1e-6, 100);
        let floor = ternary_max(|p| ch.ixy([0, 1], p), 0.0, 1.0).1;
        let iyz = |x: usize| entropy(&ch.py(x)) + entropy(&[ch.pyz(x)[0] + ch.pyz(x)[2], ch.pyz(x)[1] + ch.pyz(x)[3]]) - entropy(&ch.pyz(x));
        let upper = ternary_max(|p| ch.ixy([0, 1], p) + (1.0 - p) * iyz(0) + p * iyz(1), 0.0, 1.0).1;
        assert!(v >= floor - 1e-12 && v <= upper + 1e-9, "{floor} {v} {upper}");
    }
}

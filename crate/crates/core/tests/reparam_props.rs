mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varboot::reparam::{self, MonotoneMap, SampledPath, ScalarDensity, BUILTIN_DENSITIES};
use varboot::verify;
use varboot::Error;

fn quadratic() -> ScalarDensity {
    ScalarDensity::builtin("quadratic").unwrap()
}

#[test]
fn quadratic_density_minimizer_and_cost() {
    let m = quadratic();
    let map = reparam::solve_reparam(&m, 200).unwrap();
    let worst = map
        .x()
        .iter()
        .zip(map.y())
        .map(|(&x, &y)| ((1.0 + 3.0 * x).sqrt() - 1.0 - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    assert!((reparam::optimal_cost(&m).unwrap() - 2.25).abs() < 1e-12);
    assert!((reparam::path_cost(&m, &map) - 2.25).abs() < 1e-4);
}

#[test]
fn path_cost_of_square_map_converges() {
    let one = ScalarDensity::constant(1.0);
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&k| (reparam::path_cost(&one, &MonotoneMap::from_fn(k, |x| x * x).unwrap()) - 4.0 / 3.0).abs())
        .collect();
    // 4x^2 is inside what the slope stencil and Simpson reproduce exactly.
    assert!(errs.iter().all(|&e| e < 1e-10), "{errs:?}");
    // A map with a transcendental integrand still converges under refinement.
    let sin_errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&k| {
            let y = MonotoneMap::from_fn(k, |x| x + 0.1 * (std::f64::consts::PI * x).sin()).unwrap();
            // int (1 + 0.1 pi cos(pi x))^2 = 1 + 0.005 pi^2
            (reparam::path_cost(&one, &y) - (1.0 + 0.005 * std::f64::consts::PI.powi(2))).abs()
        })
        .collect();
    assert!(sin_errs[1] <= sin_errs[0] / 3.5 && sin_errs[2] <= sin_errs[1] / 3.5, "{sin_errs:?}");
}

#[test]
fn non_positive_density_is_rejected() {
    let bad = ScalarDensity::closed("dip", |y| y - 0.5);
    assert!(matches!(reparam::solve_reparam(&bad, 10), Err(Error::InvalidDensity { .. })));
    assert!(matches!(
        ScalarDensity::tabulated(vec![0.0, 0.5, 1.0], vec![1.0, 0.0, 1.0]),
        Err(Error::InvalidDensity { .. })
    ));
    assert!(reparam::solve_reparam(&ScalarDensity::constant(1.0), 1).is_err());
}

#[test]
fn first_integral_is_constant_for_builtins() {
    for name in BUILTIN_DENSITIES {
        let m = ScalarDensity::builtin(name).unwrap();
        let map = reparam::solve_reparam(&m, 400).unwrap();
        let c = reparam::first_integral(&m, &map);
        let spread = c.iter().map(|v| (v - c[0]).abs()).fold(0.0, f64::max) / c[0];
        assert!(spread < 1e-3, "{name}: {spread}");
        let opt = reparam::optimal_cost(&m).unwrap();
        assert!((reparam::path_cost(&m, &map) - opt).abs() <= 1e-6 * opt, "{name}");
    }
}

#[test]
fn no_random_map_beats_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in BUILTIN_DENSITIES {
        let m = ScalarDensity::builtin(name).unwrap();
        let opt = reparam::optimal_cost(&m).unwrap();
        for _ in 0..200 {
            let y = verify::random_monotone_map(&mut rng, 256).unwrap();
            assert!(reparam::path_cost(&m, &y) >= opt - 1e-8, "{name}");
        }
    }
}

#[test]
fn random_spline_densities_respect_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let s: Vec<f64> = (0..=6).map(|i| i as f64 / 6.0).collect();
        let v: Vec<f64> = s.iter().map(|_| common::uniform(&mut rng, 0.2, 3.0)).collect();
        let m = ScalarDensity::tabulated(s, v).unwrap();
        let opt = reparam::optimal_cost(&m).unwrap();
        for _ in 0..100 {
            let y = verify::random_monotone_map(&mut rng, 256).unwrap();
            assert!(reparam::path_cost(&m, &y) >= opt - 1e-8);
        }
    }
}

#[test]
fn dp_oracle_brackets_the_optimum() {
    let m = |y: f64| (1.0 + y) * (1.0 + y);
    let m_min = 1.0;
    let m2_max = 2.0;
    let opt = reparam::optimal_cost(&quadratic()).unwrap();
    let mut gaps = Vec::new();
    for k in [16, 32, 64] {
        let (dp, max_dy) = common::dp_reparam_wide(&m, k, 8);
        // Per-edge trapezoid error is at most dy^2/dx * dy^2 |m''| / 12; summed
        // and compared against the path's own cost this gives the slack below.
        let slack = max_dy * max_dy * m2_max / 12.0 * dp / m_min;
        assert!(dp >= opt - slack, "K={k}: dp {dp} below {opt} - {slack}");
        gaps.push(dp - opt);
    }
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
    assert!(gaps[2] < 1e-2, "{gaps:?}");
    // Unit-step staircases can only realise integer slopes, so that lattice
    // stays strictly above the optimum while still bounding it from below.
    let (stair, max_dy) = common::dp_reparam(&m, 64);
    assert!(stair >= opt - max_dy * max_dy * m2_max / 12.0 * stair / m_min);
}

#[test]
fn constant_speed_path_is_left_alone() {
    let t: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let pts = t.iter().map(|&s| DVector::from_vec(vec![3.0 * s, -s])).collect();
    let (map, out) = reparam::warp_trajectory(&SampledPath::new(t, pts).unwrap()).unwrap();
    assert!(map.max_deviation_from_identity() < 1e-9);
    assert!(out.points.iter().zip(out.t.iter()).all(|(p, &s)| (p[0] - 3.0 * s).abs() < 1e-9));
}

fn speed_spread(path: &SampledPath) -> f64 {
    let v = path.speeds();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max) / mean
}

#[test]
fn accelerating_path_warps_to_constant_speed() {
    let t: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let pts = t.iter().map(|&s| DVector::from_vec(vec![s * s, 0.0])).collect();
    let (_, out) = reparam::warp_trajectory(&SampledPath::new(t, pts).unwrap()).unwrap();
    assert!(speed_spread(&out) < 0.02, "{}", speed_spread(&out));
}

#[test]
fn two_timings_of_one_gesture_align() {
    let shape = |u: f64| DVector::from_vec(vec![(3.0 * u).cos() * (1.0 + u), (2.0 * u).sin(), u]);
    let t: Vec<f64> = (0..=300).map(|i| i as f64 / 300.0).collect();
    let slow = |s: f64| s + 0.25 * (std::f64::consts::PI * s).sin() / std::f64::consts::PI * 2.0 * (1.0 - s);
    let a = SampledPath::new(t.clone(), t.iter().map(|&s| shape(s)).collect()).unwrap();
    let b = SampledPath::new(t.clone(), t.iter().map(|&s| shape(slow(s))).collect()).unwrap();
    let (_, wa) = reparam::warp_trajectory(&a).unwrap();
    let (_, wb) = reparam::warp_trajectory(&b).unwrap();
    let worst = wa.points.iter().zip(&wb.points).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(worst < 0.02 * a.length(), "{worst} vs length {}", a.length());
}

#[test]
fn stationary_path_is_rejected() {
    let t: Vec<f64> = (0..=10).map(|i| i as f64).collect();
    let pts = t.iter().map(|_| DVector::from_vec(vec![1.0, 2.0])).collect();
    assert!(matches!(
        reparam::warp_trajectory(&SampledPath::new(t, pts).unwrap()),
        Err(Error::DegeneratePath(_))
    ));
}

fn random_map() -> impl Strategy<Value = MonotoneMap> {
    (any::<u64>(), 8usize..80).prop_map(|(seed, k)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        verify::random_monotone_map(&mut rng, k).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_and_inverse_stay_monotone(a in random_map(), b in random_map()) {
        let c = a.compose(&b).unwrap();
        prop_assert!(c.y().windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(c.y()[0], 0.0);
        prop_assert!((c.y()[c.len() - 1] - 1.0).abs() < 1e-12);
        let inv = a.inverse().unwrap();
        prop_assert!(inv.y().windows(2).all(|w| w[1] > w[0]));
        // Round trip through the inverse on the original samples.
        for (&x, &y) in a.x().iter().zip(a.y()) {
            prop_assert!((inv.eval(y) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn optimum_never_loses(a in 0.2..3.0f64, b in -0.9..2.0f64, map in random_map()) {
        let m = ScalarDensity::closed("affine", move |y| a + b * a * y);
        let opt = reparam::optimal_cost(&m).unwrap();
        prop_assert!(reparam::path_cost(&m, &map) >= opt - 1e-8 || map.len() < 40);
    }
}

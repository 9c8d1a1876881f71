//! Invariants checked on random inputs.

use std::f64::consts::PI;

use proptest::prelude::*;

use gkdv_core::continuation::{solve_parameters, S_CRITICAL};
use gkdv_core::estimates::{bilinear_smoothing, classify_region, resonance, Lab, Region, TrialEnsemble};
use gkdv_core::imethod::{i_operator, loglog_slope, rescale_data, rough_data, unscale_data, MultiplierSpec};
use gkdv_core::norms::{lebesgue_norm, sobolev_norm};
use gkdv_core::solver::{advance, decode_spectral_dump, encode_spectral_dump, evolve, SolverConfig};
use gkdv_core::spectral::{Field, Grid1D};

fn grid64() -> Grid1D {
    Grid1D::new(64, 2.0 * PI).unwrap()
}

fn tuple() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn multiplier_limits(s in -0.9f64..0.0, n in 1.0f64..1e3, x in 0.0f64..1e5) {
        let spec = MultiplierSpec::new(s, n).unwrap();
        let m = spec.symbol(x);
        if x <= n {
            prop_assert_eq!(m, 1.0);
        } else if x >= 2.0 * n {
            prop_assert!((m - (x / n).powf(s)).abs() <= 1e-12);
        }
        prop_assert!(m > 0.0 && m <= 1.0);
        prop_assert_eq!(spec.symbol(-x), m);
    }

    #[test]
    fn multiplier_is_monotone(s in -0.9f64..0.0, n in 1.0f64..100.0, a in 0.0f64..1e3, b in 0.0f64..1e3) {
        let spec = MultiplierSpec::new(s, n).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(spec.symbol(hi) <= spec.symbol(lo) + 1e-15);
    }

    #[test]
    fn multiplier_scales_with_cutoff(s in -0.9f64..0.0, n in 1.0f64..100.0, lambda in 1.0f64..50.0, x in 0.0f64..1e3) {
        let a = MultiplierSpec::new(s, n).unwrap().symbol(x);
        let b = MultiplierSpec::new(s, lambda * n).unwrap().symbol(lambda * x);
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn sobolev_norm_increases_with_s(seed in 0u64..1000, s1 in -2.0f64..2.0, ds in 0.0f64..2.0) {
        let u = rough_data(&grid64(), -1.0, 20, 1.0, seed).unwrap();
        prop_assert!(sobolev_norm(&u, s1) <= sobolev_norm(&u, s1 + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn i_operator_bounds(seed in 0u64..1000, s in -0.5f64..0.0, n in 1.0f64..64.0) {
        let u = rough_data(&grid64(), -1.0, 30, 1.0, seed).unwrap();
        let spec = MultiplierSpec::new(s, n).unwrap();
        let iu = lebesgue_norm(&i_operator(&u, &spec), 2.0);
        // |m| <= 1 and m >= <xi>^s up to the N^{-s} factor
        prop_assert!(iu <= lebesgue_norm(&u, 2.0) * (1.0 + 1e-12));
        prop_assert!(sobolev_norm(&u, s) <= iu * (1.0 + 1e-12) * n.powf(-s).max(1.0) * 2f64.powf(-s));
    }

    #[test]
    fn regions_partition(xi in tuple()) {
        let r = classify_region(xi);
        let max = xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert_eq!(r == Region::A, max <= 1.0);
        if r == Region::C {
            prop_assert!(xi.iter().filter(|&&x| x > 0.0).count() != 2);
        }
    }

    #[test]
    fn resonance_symmetries(xi in tuple(), perm in Just([2usize, 0, 3, 1])) {
        let q = resonance(xi);
        let permuted = [xi[perm[0]], xi[perm[1]], xi[perm[2]], xi[perm[3]]];
        let scale = xi.iter().map(|x| x.abs()).sum::<f64>().powi(3);
        prop_assert!((resonance(permuted) - q).abs() <= 1e-12 * scale);
        prop_assert!((resonance(xi.map(|x| -x)) - q).abs() <= 1e-12 * scale);
    }

    #[test]
    fn rescale_round_trip(lambda in 1.0f64..16.0, w in 1.0f64..3.0) {
        let g = Grid1D::new(128, 40.0).unwrap();
        let u = Field::from_fn(g, |x| (-(x / w).powi(2)).exp());
        let back = unscale_data(&rescale_data(&u, lambda).unwrap(), lambda, &g).unwrap();
        prop_assert!(lebesgue_norm(&back.sub(&u).unwrap(), 2.0) <= 1e-10 * lebesgue_norm(&u, 2.0));
        let v = rescale_data(&u, lambda).unwrap();
        let expect = lambda.powf(-1.0 / 6.0) * lebesgue_norm(&u, 2.0);
        prop_assert!((lebesgue_norm(&v, 2.0) - expect).abs() <= 1e-10 * expect);
    }

    #[test]
    fn parameter_identities(frac in 0.02f64..0.8, h in 0.1f64..10.0, t in 1.0f64..1e3, ratio in 1.0f64..4.0) {
        let s = S_CRITICAL * frac;
        let p = solve_parameters(s, h, t, 2.0 * h / ratio).unwrap();
        prop_assert!(p.defects().iter().all(|&d| d <= 1e-8), "{:?}", p.defects());
        prop_assert!(p.c1 >= 1.0 && p.lambda >= 1.0);
        let q = solve_parameters(s, h, 2.0 * t, 2.0 * h / ratio).unwrap();
        prop_assert!(q.n_cut > p.n_cut && q.lambda > p.lambda);
    }

    #[test]
    fn loglog_slope_recovers_powers(a in 0.1f64..10.0, k in -3.0f64..3.0) {
        let xs = [1.0, 2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| a * x.powf(k)).collect();
        prop_assert!((loglog_slope(&xs, &ys).unwrap() - k).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bilinear_smoothing_is_symmetric(seed in 0u64..500) {
        let lab = Lab { n: 32, n_t: 32, ..Lab::default() };
        let ens = TrialEnsemble::gaussian(1, seed);
        let u = ens.inputs(0, 2, &lab).unwrap();
        let a = bilinear_smoothing(&u[0], &u[1]).unwrap();
        let b = bilinear_smoothing(&u[1], &u[0]).unwrap();
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= 1e-10 * scale));
    }

    #[test]
    fn small_data_conserves_mass(seed in 0u64..500, amp in 0.05f64..0.5) {
        let g = grid64();
        let u = rough_data(&g, -2.0, 8, amp, seed).unwrap();
        let traj = evolve(&u, 0.5, &SolverConfig::new(g, 1e-3).unwrap(), 100).unwrap();
        prop_assert!(traj.mass_drift() <= 1e-8, "{}", traj.mass_drift());
    }

    #[test]
    fn forward_then_backward_returns(seed in 0u64..500) {
        let g = grid64();
        let cfg = SolverConfig::new(g, 1e-3).unwrap();
        let u = rough_data(&g, -2.0, 8, 0.3, seed).unwrap();
        let back = advance(&advance(&u, 0.25, &cfg).unwrap(), -0.25, &cfg).unwrap();
        prop_assert!(lebesgue_norm(&back.sub(&u).unwrap(), 2.0) <= 1e-9);
    }

    #[test]
    fn dump_round_trip(seed in 0u64..500, stride in 1usize..5) {
        let g = Grid1D::new(32, 10.0).unwrap();
        let u = rough_data(&g, -1.0, 6, 0.2, seed).unwrap();
        let traj = evolve(&u, 0.01, &SolverConfig::new(g, 1e-3).unwrap(), stride).unwrap();
        let dump = decode_spectral_dump(&encode_spectral_dump(&traj)).unwrap();
        prop_assert_eq!(dump.grid, g);
        prop_assert_eq!(dump.times.len(), traj.snapshots.len());
        for (f, s) in dump.fields().unwrap().iter().zip(&traj.snapshots) {
            prop_assert_eq!(f.coeffs(), s.field.coeffs());
        }
    }
}

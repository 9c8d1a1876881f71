//! Transform, multiplier and norm invariants.

use std::f64::consts::PI;

use proptest::prelude::*;

use gkdv_core::imethod::rough_data;
use gkdv_core::norms::{
    lebesgue_norm, mixed_norm, sobolev_norm, st_lebesgue_norm, xsb_norm, xsb_restriction_norm, WindowProfile,
};
use gkdv_core::spectral::{
    apply_multiplier, apply_multiplier_complex, bilinear_minus, inverse_transform_complex, transform, Field, Grid1D,
    SpaceTimeField, SymbolSpec,
};

fn field(seed: u64) -> Field {
    rough_data(&Grid1D::new(64, 10.0).unwrap(), -1.0, 25, 1.0, seed).unwrap()
}

fn st_field(seed: u64) -> SpaceTimeField {
    let u = field(seed);
    let g = *u.grid();
    let slices: Vec<Field> = (0..16).map(|l| u.translate(0.3 * l as f64).scale(1.0 + 0.1 * l as f64)).collect();
    let _ = g;
    SpaceTimeField::from_slices(0.0, 1.0, &slices).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(values in prop::collection::vec(-10.0f64..10.0, 64)) {
        let g = Grid1D::new(64, 7.0).unwrap();
        let back = inverse_transform_complex(&g, &transform(&g, &values).unwrap()).unwrap();
        let scale = values.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b.re).abs() <= 1e-12 * scale && b.im.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval(seed in 0u64..1000) {
        let u = field(seed);
        let g = u.grid();
        let physical: f64 = u.samples().iter().map(|v| v * v).sum::<f64>() * g.dx();
        let spectral: f64 = u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() / g.box_length();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical);
        prop_assert!((sobolev_norm(&u, 0.0) - physical.sqrt()).abs() <= 1e-12 * physical.sqrt());
    }

    #[test]
    fn bessel_composition(seed in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let u = field(seed);
        let two = apply_multiplier(&apply_multiplier(&u, &SymbolSpec::Bessel(a)).unwrap(), &SymbolSpec::Bessel(b)).unwrap();
        let one = apply_multiplier(&u, &SymbolSpec::Bessel(a + b)).unwrap();
        let scale = one.max_abs().max(1e-300);
        prop_assert!(two.sub(&one).unwrap().max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn even_real_symbols_keep_fields_real(seed in 0u64..1000, s in -2.0f64..2.0) {
        let u = field(seed);
        for sym in [SymbolSpec::Bessel(s), SymbolSpec::Riesz(s.abs())] {
            let z = apply_multiplier_complex(&u, &sym).unwrap();
            let norm = z.iter().map(|c| c.norm()).fold(1e-300, f64::max);
            prop_assert!(z.iter().all(|c| c.im.abs() <= 1e-10 * norm));
        }
    }

    #[test]
    fn bilinear_minus_is_symmetric(a in 0u64..1000, b in 0u64..1000, s in 0.0f64..1.0) {
        let (f, g) = (field(a), field(b));
        let fg = bilinear_minus(&f, &g, s).unwrap();
        let gf = bilinear_minus(&g, &f, s).unwrap();
        prop_assert!(fg.sub(&gf).unwrap().max_abs() <= 1e-12 * fg.max_abs().max(1e-300));
    }

    #[test]
    fn norms_are_homogeneous(seed in 0u64..1000, alpha in -5.0f64..5.0, s in -1.0f64..1.0, p in 1.0f64..8.0) {
        let u = field(seed);
        let v = u.scale(alpha);
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1e-300);
        prop_assert!(rel(sobolev_norm(&v, s), alpha.abs() * sobolev_norm(&u, s)));
        prop_assert!(rel(lebesgue_norm(&v, p), alpha.abs() * lebesgue_norm(&u, p)));
        let f = st_field(seed);
        prop_assert!(rel(xsb_norm(&f.scale(alpha), s, 0.5), alpha.abs() * xsb_norm(&f, s, 0.5)));
    }

    #[test]
    fn xsb_monotone_in_both_indices(seed in 0u64..200, s in -1.0f64..1.0, ds in 0.0f64..1.0, b in -1.0f64..1.0, db in 0.0f64..1.0) {
        let f = st_field(seed);
        prop_assert!(xsb_norm(&f, s, b) <= xsb_norm(&f, s + ds, b + db) * (1.0 + 1e-12));
    }

    #[test]
    fn mixed_norm_with_equal_exponents(seed in 0u64..200, p in 1.0f64..10.0) {
        let f = st_field(seed);
        let a = mixed_norm(&f, p, p).unwrap();
        let b = st_lebesgue_norm(&f, p);
        prop_assert!((a - b).abs() <= 1e-10 * b);
    }
}

#[test]
fn mixed_norm_of_gaussian_bump_is_resolution_stable() {
    let bump = |n: usize, n_t: usize| {
        let g = Grid1D::new(n, 20.0).unwrap();
        let f = SpaceTimeField::from_fn(g, 0.0, 1.0, n_t, |x, t| {
            (-((x - 2.0 * t) / 1.5).powi(2)).exp() * (2.0 * PI * t).cos()
        })
        .unwrap();
        mixed_norm(&f, 5.0, 10.0).unwrap()
    };
    let coarse = bump(128, 64);
    let fine = bump(256, 128);
    assert!((coarse - fine).abs() <= 1e-3 * fine, "{coarse} {fine}");
}

#[test]
fn restriction_norm_never_grows_when_delta_halves() {
    let g = Grid1D::new(32, 2.0 * PI).unwrap();
    let f = SpaceTimeField::from_fn(g, -1.0, 4.0, 64, |x, t| (x + t).cos() + 0.3 * (2.0 * x - 8.0 * t).sin()).unwrap();
    let mut last = f64::INFINITY;
    for delta in [2.0, 1.0, 0.5, 0.25, 0.125] {
        let v = xsb_restriction_norm(&f, 0.0, 0.6, delta, WindowProfile::Smoothstep).unwrap();
        assert!(v <= last * (1.0 + 1e-12), "delta {delta}: {v} > {last}");
        last = v;
    }
}

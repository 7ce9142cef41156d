mod common;

use mswave::potentials::{apply_im, apply_im_direct, ScalarSeries, TimeKernelQuadrature};
use mswave::timegrid::{
    gauss_legendre, gauss_on, interpolant_integral_weights, lagrange_stencil, GeometricGrid,
};
use proptest::prelude::*;

#[test]
fn geometric_grid_hits_end_exactly() {
    let g = GeometricGrid::new(20.0, 640.0, 1.05).unwrap();
    assert_eq!(g.times[0], 20.0);
    assert_eq!(g.last(), 640.0);
    for w in g.times.windows(2) {
        assert!((w[1] / w[0] - g.rho).abs() < 1e-12);
    }
    assert!((g.rho - 1.05).abs() < 0.01);
    assert!(GeometricGrid::new(10.0, 5.0, 1.1).is_err());
    assert!(GeometricGrid::new(1.0, 5.0, 1.0).is_err());
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    for points in 1..=10 {
        let rule = gauss_legendre(points);
        let total: f64 = rule.1.iter().sum();
        assert!((total - 2.0).abs() < 1e-13, "{points}");
        for deg in 0..(2 * points) {
            let q: f64 = gauss_on(0.0, 1.0, &rule)
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            assert!(
                (q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13,
                "points {points} degree {deg}"
            );
        }
    }
}

#[test]
fn lagrange_is_exact_for_cubics_in_log_time() {
    let g = GeometricGrid::new(2.0, 50.0, 1.3).unwrap();
    let f = |t: f64| {
        let s = t.ln();
        1.0 - 2.0 * s + 0.5 * s * s - 0.25 * s * s * s
    };
    for &t in &[2.0, 2.1, 3.3, 10.0, 49.0, 50.0, 1.5, 60.0] {
        let (first, w) = lagrange_stencil(&g.times, t);
        let v: f64 = w
            .iter()
            .enumerate()
            .map(|(k, wk)| wk * f(g.times[first + k]))
            .sum();
        assert!((v - f(t)).abs() < 1e-11, "t = {t}: {v} vs {}", f(t));
    }
    let (first, w) = lagrange_stencil(&g.times, g.times[5]);
    assert_eq!(w[5 - first], 1.0);
}

#[test]
fn interpolant_integral_weights_match_closed_form() {
    let g = GeometricGrid::new(1.0, 100.0, 1.2).unwrap();
    let mut w = vec![0.0; g.len()];
    interpolant_integral_weights(&g.times, 3.0, 70.0, &mut w);
    let q: f64 = w
        .iter()
        .zip(&g.times)
        .map(|(wk, t)| wk * t.ln().powi(3))
        .sum();
    let anti = |t: f64| {
        let s = t.ln();
        t * (s.powi(3) - 3.0 * s * s + 6.0 * s - 6.0)
    };
    let exact = anti(70.0) - anti(3.0);
    assert!((q - exact).abs() < 1e-9 * exact.abs(), "{q} vs {exact}");
}

fn series(f: impl Fn(f64) -> f64, hi: f64) -> ScalarSeries {
    let g = GeometricGrid::new(1.0, hi, 1.05).unwrap();
    let v = g.times.iter().map(|&t| f(t)).collect();
    ScalarSeries::new(g.times, v).unwrap()
}

#[test]
fn im_of_constant() {
    let s = series(|_| 1.0, 1e3);
    let q = TimeKernelQuadrature::default();
    let v = apply_im(&s, 1.0, 4.0, &q).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-12, "{v}");
}

#[test]
fn im_of_power_law() {
    let s = series(|t| 1.0 / t, 1e3);
    let q = TimeKernelQuadrature {
        tail_exponent: 1.0,
        ..Default::default()
    };
    let v = apply_im(&s, 0.0, 10.0, &q).unwrap();
    assert!((v - 1.0 / 15.0).abs() < 1e-6, "{v}");
}

#[test]
fn im_of_log_decay_matches_closed_form() {
    // I_1 [t^{-1} ln t](t) = t^{-1} (ln t / 2.5 + 1 / 2.5^2)
    let s = series(|t| t.ln() / t, 1e6);
    let q = TimeKernelQuadrature {
        tail_exponent: 1.0,
        ..Default::default()
    };
    let t = 10.0;
    let v = apply_im(&s, 1.0, t, &q).unwrap();
    let exact = (t.ln() / 2.5 + 1.0 / 6.25) / t;
    assert!((v - exact).abs() < 1e-4 * exact, "{v} vs {exact}");
}

#[test]
fn im_rejects_times_outside_the_series() {
    let s = series(|_| 1.0, 10.0);
    let q = TimeKernelQuadrature::default();
    assert!(apply_im(&s, 0.0, 20.0, &q).is_err());
    assert!(apply_im(&s, 0.0, 0.5, &q).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn im_forms_agree(m in 0.0f64..2.0, p in 0.5f64..2.0, t in 1.0f64..50.0, a in -1.0f64..1.0) {
        let s = series(|x| x.powf(-p) * (1.0 + a * (x.ln()).sin()), 200.0);
        let q = TimeKernelQuadrature { tail_exponent: p, ..Default::default() };
        let u = apply_im(&s, m, t, &q).unwrap();
        let v = apply_im_direct(&s, m, t, &q).unwrap();
        prop_assert!((u - v).abs() < 1e-8 * (1.0 + u.abs()), "{} vs {}", u, v);
    }
}

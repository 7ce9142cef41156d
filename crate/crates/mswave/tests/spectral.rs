mod common;

use std::f64::consts::PI;

use common::*;
use mswave::spectral::ops::{for_each_mode, norm_spectrum};
use mswave::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn plane_wave(grid: SpectralGrid, k: [f64; 3]) -> ScalarField {
    ScalarField::from_fn(grid, |x, y, z| {
        Complex64::from_polar(1.0, k[0] * x + k[1] * y + k[2] * z)
    })
}

#[test]
fn round_trip_is_identity() {
    let g = SpectralGrid::new(16, 7.3).unwrap();
    let f = random_band_limited(g, 3, 8);
    let back = ScalarField::from_spectrum(g, f.spectrum());
    assert!(rel_diff(&back.values, &f.values) < 1e-12);
}

#[test]
fn forward_is_unnormalized() {
    let g = SpectralGrid::new(8, 1.0).unwrap();
    let f = ScalarField::from_real(g, &vec![1.0; g.len()]);
    let s = f.spectrum();
    assert!((s[0].re - 512.0).abs() < 1e-9);
    assert!(s[1..].iter().all(|v| v.norm() < 1e-9));
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(SpectralGrid::new(12, 1.0).is_err());
    assert!(SpectralGrid::new(16, -1.0).is_err());
    let g = SpectralGrid::new(16, 2.0).unwrap();
    assert!(g.compatible(&SpectralGrid::new(16, 2.0).unwrap()));
    assert!(!g.compatible(&SpectralGrid::new(16, 2.5).unwrap()));
    assert_eq!(g.mode(8), -8);
    assert_eq!(g.mode(7), 7);
}

#[test]
fn omega_on_a_mode() {
    let g = SpectralGrid::new(16, 2.0 * PI).unwrap();
    let f = plane_wave(g, [2.0, 0.0, 0.0]);
    let out = omega_pow(&f, 1.0).unwrap();
    assert!(rel_diff(&out.values, &f.scale(Complex64::new(2.0, 0.0)).values) < 1e-12);
}

#[test]
fn omega_zero_is_identity_and_keeps_mean() {
    let g = SpectralGrid::new(8, 3.0).unwrap();
    let f = random_band_limited(g, 1, 4);
    let out = omega_pow(&f, 0.0).unwrap();
    assert_eq!(out, f);
    let c = ScalarField::from_real(g, &vec![2.0; g.len()]);
    assert!(omega_pow(&c, 1.5).unwrap().max_abs() < 1e-14);
}

#[test]
fn omega_squared_matches_minus_laplacian() {
    let g = SpectralGrid::new(16, 5.0).unwrap();
    let f = random_band_limited(g, 11, 6);
    let a = omega_pow(&f, 2.0).unwrap();
    // second derivatives by repeated spectral first derivatives (band avoids Nyquist)
    let mut lap = ScalarField::zeros(g);
    for (d, gd) in gradient_complex(&f).iter().enumerate() {
        let dd = &gradient_complex(gd)[d];
        lap.axpy(Complex64::new(-1.0, 0.0), dd);
    }
    assert!(rel_diff(&a.values, &lap.values) < 1e-10);
}

#[test]
fn omega_rejects_non_finite() {
    let g = SpectralGrid::new(4, 1.0).unwrap();
    let mut f = ScalarField::zeros(g);
    f.values[3] = Complex64::new(f64::NAN, 0.0);
    assert!(omega_pow(&f, 1.0).is_err());
}

#[test]
fn inverse_laplacian_cases() {
    let g = SpectralGrid::new(16, 2.0 * PI).unwrap();
    let f = plane_wave(g, [0.0, 1.0, 0.0]);
    let out = inverse_laplacian(&f).unwrap();
    assert!(rel_diff(&out.values, &f.scale(Complex64::new(-1.0, 0.0)).values) < 1e-12);
    let c = ScalarField::from_real(g, &vec![3.0; g.len()]);
    assert!(inverse_laplacian(&c).unwrap().max_abs() < 1e-14);
    let r = random_band_limited(g, 5, 8);
    let back = laplacian(&inverse_laplacian(&r).unwrap());
    let mean = r.mean();
    let expect: Vec<Complex64> = r.values.iter().map(|v| v - mean).collect();
    assert!(rel_diff(&back.values, &expect) < 1e-10);
}

#[test]
fn leray_annihilates_gradients() {
    let g = SpectralGrid::new(16, 6.0).unwrap();
    let h = random_real_band_limited(g, 2, 8);
    let v = gradient_of_real(g, &h);
    let p = leray_project(&v);
    assert!(p.max_abs() < 1e-12 * v.max_abs());
    assert!(p.div_free);
}

#[test]
fn leray_keeps_solenoidal_fields() {
    let g = SpectralGrid::new(16, 6.0).unwrap();
    let v = curl(&random_vector(g, 4, 8));
    let p = leray_project(&v);
    assert!(rel_diff_vec(&p, &v) < 1e-12);
}

#[test]
fn leray_passes_the_mean() {
    let g = SpectralGrid::new(8, 1.0).unwrap();
    let v = VectorField::new(
        g,
        [vec![1.0; g.len()], vec![-2.0; g.len()], vec![0.5; g.len()]],
    )
    .unwrap();
    let p = leray_project(&v);
    assert!(rel_diff_vec(&p, &v) < 1e-14);
}

#[test]
fn propagator_cases() {
    let g = SpectralGrid::new(16, 2.0 * PI).unwrap();
    let f = random_band_limited(g, 9, 8);
    assert_eq!(free_propagator(&f, 0.0), f);
    let k = [1.0, 2.0, -1.0];
    let wave = plane_wave(g, k);
    let t = 0.7;
    let out = free_propagator(&wave, t);
    let phase = Complex64::from_polar(1.0, -0.5 * t * 6.0);
    assert!(rel_diff(&out.values, &wave.scale(phase).values) < 1e-12);
    let u = free_propagator(&f, 3.7);
    assert!((u.l2() / f.l2() - 1.0).abs() < 1e-12);
    let two = free_propagator(&free_propagator(&f, 1.1), 0.4);
    assert!(rel_diff(&two.values, &free_propagator(&f, 1.5).values) < 1e-12);
}

#[test]
fn dilation_by_one_is_identity() {
    let g = SpectralGrid::new(16, 12.0).unwrap();
    let f = gaussian(g, 1.0, [0.0; 3]);
    let out = mdfm_apply(&f, 1.0, Piece::D0).unwrap();
    assert!(rel_diff(&out.values, &f.values) < 1e-13);
}

#[test]
fn dilation_identity_at_two() {
    // support inside L/4 and band inside half the Nyquist radius
    let g = SpectralGrid::new(64, 28.0).unwrap();
    let f = gaussian(g, 1.2, [0.0; 3]);
    let out = mdfm_apply(&f, 2.0, Piece::D0).unwrap();
    let lhs = norm(&omega_pow(&out, 1.0).unwrap(), NormSpec::L(2.0));
    let rhs = 2f64.powf(0.5) * norm(&omega_pow(&f, 1.0).unwrap(), NormSpec::L(2.0));
    assert!((lhs / rhs - 1.0).abs() < 1e-8, "{lhs} {rhs}");
    // and pointwise against the analytic stretched Gaussian
    let exact = gaussian(g, 2.4, [0.0; 3]);
    assert!(rel_diff(&out.values, &exact.values) < 1e-6);
}

#[test]
fn dilation_that_wraps_is_rejected() {
    let g = SpectralGrid::new(16, 8.0).unwrap();
    let f = gaussian(g, 1.0, [0.0; 3]);
    assert!(matches!(
        mdfm_apply(&f, 3.0, Piece::D0),
        Err(mswave::Error::Aliasing { .. })
    ));
}

#[test]
fn mdfm_matches_propagator() {
    let n = 64;
    let g = SpectralGrid::new(n, (2.0 * PI * n as f64).sqrt()).unwrap();
    let f = gaussian(g, 1.0, [0.0; 3]);
    let a = mdfm_apply(&f, 1.0, Piece::Mdfm).unwrap();
    let b = free_propagator(&f, 1.0);
    assert!(rel_diff(&a.values, &b.values) < 1e-6);
}

#[test]
fn mdfm_pieces_compose() {
    let g = SpectralGrid::new(16, 10.0).unwrap();
    let f = gaussian(g, 1.0, [0.0; 3]);
    let d = mdfm_apply(&f, 1.0, Piece::D).unwrap();
    // (i t)^{-3/2} at t = 1 is exp(-3 i pi / 4)
    let c = Complex64::from_polar(1.0, -0.75 * PI);
    assert!(rel_diff(&d.values, &f.scale(c).values) < 1e-13);
    let m = mdfm_apply(&f, 2.0, Piece::M).unwrap();
    assert!((m.l2() - f.l2()).abs() < 1e-12);
    assert!(mdfm_apply(&f, 0.0, Piece::M).is_err());
}

#[test]
fn sobolev_norms_of_a_mode() {
    let g = SpectralGrid::new(16, 2.0 * PI).unwrap();
    let f = plane_wave(g, [0.0, 2.0, 0.0]);
    let vol = g.volume().sqrt();
    for s in [0.0, 1.0, 2.5] {
        let v = norm(&f, NormSpec::HDot(s));
        assert!((v / (2f64.powf(s) * vol) - 1.0).abs() < 1e-12);
    }
    assert!((norm(&f, NormSpec::H(1.0)) / (5f64.sqrt() * vol) - 1.0).abs() < 1e-12);
    assert!((norm(&f, NormSpec::K(2.0)) / (4.0 * vol) - 1.0).abs() < 1e-12);
    assert!((norm(&f, NormSpec::L(2.0)) / vol - 1.0).abs() < 1e-12);
    assert!((norm(&f, NormSpec::L(f64::INFINITY)) - 1.0).abs() < 1e-12);
}

#[test]
fn k_norm_is_max_of_homogeneous_norms() {
    let g = SpectralGrid::new(16, 3.0).unwrap();
    let f = random_band_limited(g, 8, 7);
    let k = norm(&f, NormSpec::K(2.0));
    assert_eq!(
        k,
        norm(&f, NormSpec::HDot(1.0)).max(norm(&f, NormSpec::HDot(2.0)))
    );
}

#[test]
fn galilei_order_zero_is_l2() {
    let g = SpectralGrid::new(16, 10.0).unwrap();
    let f = gaussian(g, 1.0, [0.5, 0.0, 0.0]);
    let a = galilei_norm(&f, 1.0, NormSpec::H(0.0)).unwrap();
    assert!((a / f.l2() - 1.0).abs() < 1e-12);
}

#[test]
fn galilei_norm_matches_direct_operator() {
    let g = SpectralGrid::new(32, 14.0).unwrap();
    let f = gaussian(g, 1.0, [0.0; 3]);
    let t = 1.0;
    let via = galilei_norm(&f, t, NormSpec::HDot(1.0)).unwrap();
    let grads = gradient_complex(&f);
    let mut acc = 0.0;
    for (d, gd) in grads.iter().enumerate() {
        let x = g.coordinate(d);
        for p in 0..g.len() {
            let j = f.values[p] * x[p] + Complex64::new(0.0, t) * gd.values[p];
            acc += j.norm_sqr();
        }
    }
    let direct = (acc * g.cell_volume()).sqrt();
    assert!((via / direct - 1.0).abs() < 1e-6, "{via} {direct}");
}

#[test]
fn split_reconstructs() {
    let g = SpectralGrid::new(16, 4.0).unwrap();
    let f = random_band_limited(g, 21, 8);
    let (s, l) = split_at(&f, 3.0);
    let err = s.add(&l).sub(&f).max_abs();
    assert!(err <= 1e-14 * f.max_abs().max(1.0));
    let (s, l) = split_at(&f, 1e3);
    assert!(s.max_abs() < 1e-15);
    assert_eq!(l.values.len(), f.values.len());
}

#[test]
fn commutator_with_projector() {
    // sum_j (x_j (P v)_j - P(x_j v)_j) = 2 Delta^{-1} div v for localized data;
    // the data have vanishing first moments so that no x^{-3} tails wrap around
    let g = SpectralGrid::new(64, 24.0).unwrap();
    let h = ScalarField::from_fn(g, |x, y, z| {
        Complex64::new((x - 0.5 * y) * (-0.5 * (x * x + y * y + z * z)).exp(), 0.0)
    });
    let a = VectorField::from_fn(g, |x, y, z| {
        let e = (-0.5 * (x * x + y * y + z * z)).exp();
        [y * e, 0.5 * z * e, -x * e]
    });
    let v = gradient_real(&h).add(&curl(&a));
    let pv = leray_project(&v);
    let mut lhs = vec![0.0; g.len()];
    for j in 0..3 {
        let xj = g.coordinate(j);
        let mut xv = v.clone();
        for c in 0..3 {
            for p in 0..g.len() {
                xv.comps[c][p] *= xj[p];
            }
        }
        let pxv = leray_project(&xv);
        for p in 0..g.len() {
            lhs[p] += xj[p] * pv.comps[j][p] - pxv.comps[j][p];
        }
    }
    let div = ScalarField::from_real(g, &divergence(&v));
    let rhs = inverse_laplacian(&div)
        .unwrap()
        .scale(Complex64::new(2.0, 0.0))
        .re();
    // compare in the central half of the box
    let x = g.coords();
    let n = g.n();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if x[i].abs() < 6.0 && x[j].abs() < 6.0 && x[k].abs() < 6.0 {
                    let p = g.index(i, j, k);
                    num += (lhs[p] - rhs[p]).powi(2);
                    den += rhs[p].powi(2);
                }
            }
        }
    }
    assert!((num / den).sqrt() < 1e-4, "{}", (num / den).sqrt());
}

#[test]
fn parseval_for_vectors() {
    let g = SpectralGrid::new(8, 2.0).unwrap();
    let v = random_vector(g, 3, 4);
    let s = v.spectra();
    let total: f64 = s
        .iter()
        .map(|c| norm_spectrum(&g, c, NormSpec::H(0.0)).powi(2))
        .sum();
    assert!((total.sqrt() / v.l2() - 1.0).abs() < 1e-12);
    let mut count = 0;
    for_each_mode(&g, |_, _| count += 1);
    assert_eq!(count, g.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn leray_is_idempotent_and_div_free(seed in 0u64..10_000) {
        let g = SpectralGrid::new(8, 3.0).unwrap();
        let v = random_vector(g, seed, 4);
        let p = leray_project(&v);
        let pp = leray_project(&p);
        prop_assert!(rel_diff_vec(&pp, &p) < 1e-12);
        prop_assert!(max_divergence(&p) <= 1e-10 * p.max_abs());
    }

    #[test]
    fn propagator_is_unitary_group(seed in 0u64..10_000, t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let g = SpectralGrid::new(8, 4.0).unwrap();
        let f = random_band_limited(g, seed, 4);
        let a = free_propagator(&free_propagator(&f, t1), t2);
        let b = free_propagator(&f, t1 + t2);
        prop_assert!(rel_diff(&a.values, &b.values) < 1e-12);
        prop_assert!((a.l2() / f.l2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_parts_are_disjoint(seed in 0u64..10_000, cut in 0.0f64..8.0) {
        let g = SpectralGrid::new(8, 2.0).unwrap();
        let f = random_band_limited(g, seed, 4);
        let (s, l) = split_at(&f, cut);
        let ss = s.spectrum();
        let ls = l.spectrum();
        let overlap = ss.iter().zip(&ls).map(|(a, b)| a.norm() * b.norm()).fold(0.0, f64::max);
        prop_assert!(overlap < 1e-16 * f.max_abs().powi(2) * (g.len() as f64).powi(2));
        prop_assert!(s.add(&l).sub(&f).max_abs() <= 1e-14 * f.max_abs().max(1.0));
    }
}

mod common;

use common::{log_slope, rel_diff, rel_diff_vec, wave_packet};
use mswave::potentials::{split_short_long, SplitSpec, TimeKernelQuadrature};
use mswave::profiles::{
    build_s_closed_form, build_s_simplified, build_w, check_parameters, closed_form_multiplier,
    compute_bstar, compute_remainders, frozen_ba, profile_r1, profile_r2, table_times,
    AsymptoticState, ProfileTable,
};
use mswave::spectral::{
    free_propagator, gradient_complex, gradient_of_real, max_curl, max_divergence, norm,
    norm_vector, NormSpec, ScalarField, SpectralGrid, VectorField,
};
use mswave::timegrid::GeometricGrid;
use num_complex::Complex64;
use proptest::prelude::*;

// anisotropic, so that x |w_+|^2 is not a pure gradient and B_* stays nonzero
fn state(n: usize, l: f64) -> AsymptoticState {
    let grid = SpectralGrid::new(n, l).unwrap();
    AsymptoticState::new(
        wave_packet(grid, [1.0, 0.8, 1.25], [0.5, 0.0, 0.0], 0.1),
        1.5,
        0.4,
        2.0,
    )
    .unwrap()
}

fn cheap_quad() -> TimeKernelQuadrature {
    TimeKernelQuadrature {
        points_per_panel: 4,
        panel_ratio: 1.2,
        ..Default::default()
    }
}

#[test]
fn parameter_checks() {
    assert!(check_parameters(1.5, 0.4).is_ok());
    assert!(check_parameters(1.0, 0.4).is_err());
    assert!(check_parameters(1.5, 0.5).is_err());
    assert!(check_parameters(1.2, 0.4).is_err());
}

#[test]
fn w_is_unitary_and_tends_to_w_plus() {
    let st = state(32, 16.0);
    let k = st.k;
    for t in [1.0, 10.0, 100.0] {
        let w = build_w(&st, t).unwrap();
        assert!((w.l2() / st.w_plus.l2() - 1.0).abs() < 1e-12);
    }
    let w = build_w(&st, 100.0).unwrap();
    let diff = norm(&w.sub(&st.w_plus), NormSpec::H(k));
    let bound = 100f64.powf(-0.5) * norm(&st.w_plus, NormSpec::H(k + 1.0));
    assert!(diff <= bound, "{diff} > {bound}");
    assert!(build_w(&st, 0.5).is_err());
}

#[test]
fn moment_of_w_follows_the_commutation_relation() {
    let st = state(64, 20.0);
    let t = 10.0;
    let w = build_w(&st, t).unwrap();
    let grad = gradient_complex(&st.w_plus);
    for d in 0..3 {
        let x = st.grid().coordinate(d);
        let lhs = free_propagator(&w.mul_real(&x), 1.0 / t);
        let mut rhs = st.w_plus.mul_real(&x);
        rhs.axpy(Complex64::new(0.0, 1.0 / t), &grad[d]);
        let err = rel_diff(&lhs.values, &rhs.values);
        assert!(err < 1e-8, "axis {d}: {err}");
    }
}

#[test]
fn closed_form_multiplier_shape() {
    assert_eq!(closed_form_multiplier(7.0, 0.5, 0.4), 7f64.ln());
    assert_eq!(closed_form_multiplier(7.0, 1.0, 0.4), 7f64.ln());
    assert_eq!(closed_form_multiplier(7.0, 100.0, 0.4), 0.0);
    assert_eq!(closed_form_multiplier(1.0, 0.3, 0.4), 0.0);
}

proptest! {
    #[test]
    fn closed_form_multiplier_is_monotone(t in 1.0f64..1e4, a in 0.0f64..20.0, b in 0.0f64..20.0, beta in 0.05f64..0.49) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let m_lo = closed_form_multiplier(t, lo, beta);
        let m_hi = closed_form_multiplier(t, hi, beta);
        prop_assert!(m_hi <= m_lo);
        prop_assert!(m_hi >= 0.0);
    }
}

#[test]
fn closed_form_matches_direct_quadrature() {
    let st = state(16, 10.0);
    let frozen = frozen_ba(&st, &cheap_quad()).unwrap();
    let t = 50.0;
    let closed = build_s_closed_form(&st, &frozen, t).unwrap();
    // 200 log-spaced cells in ln t'; the cell holding a mode's cutoff
    // crossing contributes only its long-range fraction
    let grid = st.grid();
    let g = mswave::potentials::hartree_g(&st.w_plus, &st.w_plus)
        .unwrap()
        .re();
    let gs = mswave::spectral::fft::forward_real(&g, grid.n());
    let xs = mswave::spectral::fft::forward_real(&frozen.x_dot(), grid.n());
    let cells = 200;
    let h = t.ln() / cells as f64;
    let mut phi = vec![Complex64::default(); grid.len()];
    for (p, &r2) in grid.xi_squared().iter().enumerate().skip(1) {
        let mut long = 0.0;
        for i in 0..cells {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let (ca, cb) = ((st.beta * a).exp(), (st.beta * b).exp());
            let r = r2.sqrt();
            long += if r <= ca {
                h
            } else if r <= cb {
                b - r.ln() / st.beta
            } else {
                0.0
            };
        }
        phi[p] = t.ln() * gs[p] - long * xs[p];
    }
    let s = gradient_of_real(grid, &mswave::spectral::fft::inverse_real(&phi, grid.n()));
    let err = rel_diff_vec(&closed, &s);
    println!("closed form vs 200-cell quadrature: {err:.2e}");
    assert!(err <= 1e-4, "{err}");
    // plain midpoint sampling of the sharp cutoff, for reference
    let grad_g = gradient_of_real(grid, &g);
    let xb = ScalarField::from_real(grid, &frozen.x_dot());
    let mut mid = VectorField::zeros(grid);
    for i in 0..cells {
        let tau = (i as f64 + 0.5) * h;
        let (_, long) = split_short_long(
            &xb,
            SplitSpec {
                beta: st.beta,
                t: tau.exp(),
            },
        );
        mid.axpy(h, &grad_g.sub(&gradient_of_real(grid, &long.re())));
    }
    println!(
        "closed form vs 200-node midpoint sampling: {:.2e}",
        rel_diff_vec(&closed, &mid)
    );
    let simplified = build_s_simplified(&st, &frozen, t, 40).unwrap();
    assert!(rel_diff_vec(&simplified, &closed) < 1e-4);
    assert!(max_curl(&closed) <= 1e-10 * closed.max_abs());
    let zero = build_s_closed_form(&st, &frozen, 1.0).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
}

#[test]
fn bstar_is_divergence_free_and_bounded() {
    let st = state(16, 10.0);
    let q = cheap_quad();
    let mut norms = Vec::new();
    let times = [1.0, 3.0, 10.0, 20.0, 50.0, 100.0];
    for t in times {
        let b = compute_bstar(&st, t, &q).unwrap();
        assert!(b.div_free);
        assert!(max_divergence(&b) <= 1e-10 * b.max_abs());
        norms.push(norm_vector(&b, NormSpec::K(st.k + 1.0)));
    }
    println!("|B_*| at {times:?}: {norms:?}");
    // no growth trend over [1, 100], and flat over the last decade
    let last = norms[norms.len() - 1];
    assert!(norms.iter().all(|&v| v <= 2.0 * last), "{norms:?}");
    let decade = &norms[2..];
    let max = decade.iter().cloned().fold(0.0, f64::max);
    let min = decade.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 0.0 && max / min <= 2.0, "{norms:?}");
}

#[test]
fn zero_state_has_zero_profiles() {
    let grid = SpectralGrid::new(8, 8.0).unwrap();
    let st = AsymptoticState::new(ScalarField::zeros(grid), 1.5, 0.4, 2.0).unwrap();
    let q = cheap_quad();
    let times = table_times(&[4.0, 8.0, 16.0], 1.5, 64.0, 16.0 * 256.0, 4.0).unwrap();
    let table = ProfileTable::build(&st, times, &q).unwrap();
    let (r1, r2, r3) = compute_remainders(&st, &table, 8.0, &q).unwrap();
    assert_eq!(r1.max_abs(), 0.0);
    assert_eq!(r2.max_abs(), 0.0);
    assert_eq!(r3.max_abs(), 0.0);
    assert!(table.phi.iter().all(|p| p.iter().all(|v| *v == 0.0)));
}

fn profile_table(st: &AsymptoticState, hi: f64, rho: f64) -> ProfileTable {
    let g = GeometricGrid::new(2.0, hi, rho).unwrap();
    let times = table_times(&g.times, rho, hi, hi, 2.0).unwrap();
    ProfileTable::build(st, times, &cheap_quad()).unwrap()
}

#[test]
fn phi_starts_at_zero_and_matches_its_rate() {
    let st = state(16, 10.0);
    let table = profile_table(&st, 200.0, 1.05);
    assert!(table.phi[0].iter().all(|v| *v == 0.0));
    let i = table
        .node(50.0)
        .unwrap_or_else(|| table.times.partition_point(|&t| t < 50.0));
    let t = table.times[i];
    // five-point derivative in ln t on the geometric grid
    let h = table.times[i + 1].ln() - t.ln();
    let d: Vec<f64> = (0..table.phi[i].len())
        .map(|p| {
            (table.phi[i - 2][p] - 8.0 * table.phi[i - 1][p] + 8.0 * table.phi[i + 1][p]
                - table.phi[i + 2][p])
                / (12.0 * h)
        })
        .collect();
    let rate: Vec<f64> = table
        .phi_rate(&st, t)
        .unwrap()
        .iter()
        .map(|r| r * t)
        .collect();
    let err = common::rel_diff_real(&d, &rate);
    println!("phi rate consistency at t = {t:.1}: {err:.2e}");
    assert!(err < 1e-2, "{err}");
    let s = table.s_at(t).unwrap();
    assert!(max_curl(&s) <= 1e-10 * s.max_abs());
}

#[test]
fn remainder_decay_rates() {
    let st = state(16, 10.0);
    let table = profile_table(&st, 1000.0, 1.1);
    let mut ts = Vec::new();
    let (mut r1s, mut r2s) = (Vec::new(), Vec::new());
    for &t in table
        .times
        .iter()
        .filter(|&&t| (10.0..=1000.0).contains(&t))
    {
        let r1 = profile_r1(&st, &table, t).unwrap();
        let r2 = profile_r2(&table, t).unwrap();
        ts.push(t);
        r1s.push(norm(&r1, NormSpec::H(st.k)));
        r2s.push(norm_vector(&r2, NormSpec::H(st.k)));
    }
    // dominant envelope here: t^{-2} ln t, since beta (alpha + 1) = 1
    let s1 = log_slope(&ts, &r1s, 1);
    let s2 = log_slope(&ts, &r2s, 2);
    println!("R1 slope {s1:.3}, R2 slope {s2:.3}");
    assert!((s1 + 2.0).abs() <= 0.25, "{s1}");
    assert!((s2 + 2.0).abs() <= 0.25, "{s2}");
}

#[test]
fn remainders_agree_with_the_library() {
    let st = state(16, 10.0);
    let q = cheap_quad();
    let g = GeometricGrid::new(4.0, 16.0, 1.2).unwrap();
    let times = table_times(&g.times, 1.2, 16.0 * 8.0, 16.0 * 256.0, 2.0).unwrap();
    let table = ProfileTable::build(&st, times, &q).unwrap();
    let (r1, r2, r3) = compute_remainders(&st, &table, 8.0, &q).unwrap();
    assert!(r1.max_abs() > 0.0 && r2.max_abs() > 0.0 && r3.max_abs() > 0.0);
    assert!(max_divergence(&r3) <= 1e-10 * r3.max_abs());
}

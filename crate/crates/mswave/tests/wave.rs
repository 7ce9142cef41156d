mod common;

use common::wave_packet;
use mswave::cauchy::{solve_at_infinity, Problem, SolverConfig};
use mswave::profiles::AsymptoticState;
use mswave::spectral::{gradient_of_real, max_divergence, ScalarField, SpectralGrid, VectorField};
use mswave::wave::{
    assemble_solution, compute_energy, decay_series, fd_weights, field_energy, fit_decay,
    ms_residual, stencil, verify_asymptotics, FrameSolution,
};
use mswave::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn problem(l2: f64) -> Problem {
    let grid = SpectralGrid::new(8, 8.0).unwrap();
    let st = AsymptoticState::new(
        wave_packet(grid, [1.0, 0.8, 1.25], [0.5, 0.0, 0.0], l2),
        1.5,
        0.4,
        2.0,
    )
    .unwrap();
    Problem::new(
        st,
        SolverConfig {
            t_start: 10.0,
            t_max: 150.0,
            rho: 1.1,
            ..Default::default()
        },
    )
    .unwrap()
}

fn converged() -> &'static (Problem, FrameSolution) {
    static RUN: OnceLock<(Problem, FrameSolution)> = OnceLock::new();
    RUN.get_or_init(|| {
        let pb = problem(0.1);
        let (traj, _) = solve_at_infinity(&pb).unwrap();
        let fs = FrameSolution::new(&pb, &traj).unwrap();
        (pb, fs)
    })
}

#[test]
fn zero_state_gives_zero_everything() {
    let pb = problem(0.0);
    let (traj, _) = solve_at_infinity(&pb).unwrap();
    let fs = FrameSolution::new(&pb, &traj).unwrap();
    for i in 0..fs.len() {
        assert!(fs.psi[i].iter().all(|&v| v == 0.0));
        assert_eq!(ms_residual(&pb, &fs, i).unwrap(), (0.0, 0.0));
        assert_eq!(compute_energy(&fs, i).unwrap().total(), 0.0);
    }
    let phys = assemble_solution(&fs);
    assert!(phys.u.iter().all(|u| u.max_abs() == 0.0) && phys.a.iter().all(|a| a.max_abs() == 0.0));
    let series = decay_series(&pb, &fs).unwrap();
    let fits = verify_asymptotics(&pb, &series, (10.0, 150.0)).unwrap();
    assert!(fits
        .iter()
        .all(|f| f.is_zero_series() && f.r_squared.is_none()));
}

#[test]
fn physical_pair_keeps_norm_and_gauge() {
    let (_, fs) = converged();
    let phys = assemble_solution(fs);
    let n0 = fs.w[0].l2();
    for (i, (u, a)) in phys.u.iter().zip(&phys.a).enumerate() {
        // the box grows with t, the cell volume too
        assert!((phys.grids[i].length() / fs.grid.length() - fs.times[i]).abs() < 1e-12);
        assert!(
            (u.l2() / n0 - 1.0).abs() < 1e-8,
            "node {i}: {}",
            u.l2() / n0
        );
        assert!(max_divergence(a) <= 1e-10 * a.max_abs());
    }
}

#[test]
fn grad_psi_differs_from_sigma_by_the_terminal_offset() {
    // sigma is pinned to zero at T_max while psi carries the profile tail; in
    // between their time derivatives agree
    let (_, fs) = converged();
    let tail = gradient_of_real(fs.grid, &fs.psi_tail);
    let i = fs.times.iter().position(|&t| t >= 20.0 - 1e-9).unwrap();
    let gap = gradient_of_real(fs.grid, &fs.psi[i]).sub(&fs.sigma[i]);
    let err = gap.sub(&tail).l2();
    assert!(
        err <= 1e-6 * fs.sigma[i].l2(),
        "{err:e} vs {:e}",
        fs.sigma[i].l2()
    );
    let last = fs.len() - 1;
    assert_eq!(fs.sigma[last].max_abs(), 0.0);
    assert!(tail.l2() > 0.0);
}

#[test]
fn residuals_are_small_on_a_converged_run() {
    let (pb, fs) = converged();
    let scale = fs.w[0].l2();
    for i in 2..fs.len() - 2 {
        let (rs, rm) = ms_residual(pb, fs, i).unwrap();
        assert!(rs <= 1e-6 * scale, "node {i}: {rs:e}");
        assert!(rm <= 10.0 * pb.cfg.tol, "node {i}: {rm:e}");
    }
}

#[test]
fn stencils_need_five_nodes() {
    assert!(matches!(
        stencil(4, 0),
        Err(Error::Stencil {
            needed: 5,
            available: 4,
            ..
        })
    ));
    assert_eq!(stencil(10, 0).unwrap(), 0);
    assert_eq!(stencil(10, 5).unwrap(), 3);
    assert_eq!(stencil(10, 9).unwrap(), 5);
}

#[test]
fn energy_of_a_plane_wave_pair() {
    // u = a + b e^{i k.x}: |u|^2 has Fourier coefficient conj(a) b at k, so
    // the Hartree energy is V |a b|^2 / |k|^2 and the kinetic one V |b|^2 |k|^2 / 2
    let grid = SpectralGrid::new(8, 6.0).unwrap();
    let kx = 2.0 * std::f64::consts::PI / 6.0 * 2.0;
    let (a, b) = (Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4));
    let u = ScalarField::from_fn(grid, |x, _, _| a + b * Complex64::from_polar(1.0, kx * x));
    let zero = VectorField::zeros(grid);
    let e = field_energy(&u, &zero, &zero).unwrap();
    let vol = grid.volume();
    assert!((e.kinetic / (0.5 * vol * b.norm_sqr() * kx * kx) - 1.0).abs() < 1e-12);
    assert!((e.coulomb / (vol * (a * b).norm_sqr() / (kx * kx)) - 1.0).abs() < 1e-12);
    assert_eq!(e.magnetic + e.electric, 0.0);
    let single = ScalarField::from_fn(grid, |x, _, _| b * Complex64::from_polar(1.0, kx * x));
    assert!(field_energy(&single, &zero, &zero).unwrap().coulomb.abs() < 1e-20);
}

#[test]
fn energy_drift_is_small_relative_to_the_energy() {
    let (_, fs) = converged();
    let e0 = compute_energy(fs, 0).unwrap().total();
    let e1 = compute_energy(fs, fs.len() - 1).unwrap().total();
    assert!(e0 > 0.0);
    assert!(((e1 - e0) / e0).abs() < 1e-3, "{e0} -> {e1}");
}

#[test]
fn fit_recovers_a_known_envelope() {
    let times: Vec<f64> = (0..40).map(|i| 10.0 * 1.1f64.powi(i)).collect();
    let y: Vec<f64> = times
        .iter()
        .map(|t| 3.0 * t.powf(-1.25) * t.ln().powi(2))
        .collect();
    let f = fit_decay("x", &times, &y, 2, (10.0, 1e4)).unwrap();
    assert!((f.exponent.unwrap() + 1.25).abs() < 1e-12);
    assert!((f.r_squared.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(f.nodes, 40);
    assert!(matches!(
        fit_decay("x", &times, &y, 2, (10.0, 50.0)),
        Err(Error::FitWindow(_))
    ));
    assert!(matches!(
        fit_decay("x", &times[..7], &y[..7], 2, (1.0, 1e6)),
        Err(Error::FitWindow(_))
    ));
    let zeros = vec![0.0; times.len()];
    assert!(fit_decay("x", &times, &zeros, 1, (10.0, 1e4))
        .unwrap()
        .is_zero_series());
    let mut holes = y.clone();
    holes[3] = 0.0;
    assert!(matches!(
        fit_decay("x", &times, &holes, 2, (10.0, 1e4)),
        Err(Error::FitWindow(_))
    ));
}

#[test]
fn decay_series_have_fits_on_the_converged_run() {
    let (pb, fs) = converged();
    let series = decay_series(pb, fs).unwrap();
    assert_eq!(series.values.len(), series.names.len());
    let fits = verify_asymptotics(pb, &series, (10.0, 150.0)).unwrap_or_else(|e| panic!("{e}"));
    assert!(matches!(
        verify_asymptotics(pb, &series, (10.0, 90.0)),
        Err(Error::FitWindow(_))
    ));
    let q = fits.iter().find(|f| f.series_name == "q_Hk").unwrap();
    assert!(q.window.1 < 150.0 && q.nodes >= 8);
    for f in &fits {
        let r2 = f.r_squared;
        assert!(f.is_zero_series() || r2.unwrap() > 0.0, "{f:?}");
    }
}

proptest! {
    #[test]
    fn fd_weights_differentiate_quartics(c in proptest::array::uniform5(-2.0f64..2.0), r in 1.01f64..1.3, at in 0usize..5) {
        let xs: Vec<f64> = (0..5).map(|i| 10.0 * r.powi(i)).collect();
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x.powi(3) + c[4] * x.powi(4);
        let df = |x: f64| c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x + 4.0 * c[4] * x.powi(3);
        let w = fd_weights(xs[at], &xs);
        let got: f64 = w.iter().zip(&xs).map(|(w, &x)| w * f(x)).sum();
        let scale = (0..5).map(|k| c[k].abs() * xs[4].powi(k as i32)).sum::<f64>() / xs[4];
        prop_assert!((got - df(xs[at])).abs() <= 1e-9 * scale.max(1.0), "{got} vs {}", df(xs[at]));
    }

    #[test]
    fn fits_recover_power_laws(p in -3.0f64..-0.2, lp in 0i32..3, c in 0.1f64..10.0) {
        let times: Vec<f64> = (0..30).map(|i| 20.0 * 1.1f64.powi(i)).collect();
        let y: Vec<f64> = times.iter().map(|t| c * t.powf(p) * t.ln().powi(lp)).collect();
        let f = fit_decay("p", &times, &y, lp, (20.0, 1e5)).unwrap();
        prop_assert!((f.exponent.unwrap() - p).abs() < 1e-10);
    }
}

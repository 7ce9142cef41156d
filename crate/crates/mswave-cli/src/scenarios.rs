//! The five scenarios. Each returns a finished report and its time series.

use crate::config::{RunConfig, Scenario};
use crate::families::build_w_plus;
use crate::identities::run_identities;
use crate::report::{
    Check, FitRecord, IterationRecord, NodeRecord, Report, RunMeta, Series, Status,
};
use mswave::cauchy::{
    difference, iterate, nearest_node, node_norms, solve_finite_t0, weighted_distance,
    weighted_norms, GammaMode, Problem, Trajectory,
};
use mswave::profiles::AsymptoticState;
use mswave::spectral::{gradient_of_real, max_curl, max_divergence, SpectralGrid, VectorField};
use mswave::wave::{
    assemble_solution, compute_energy, decay_series, fit_passes, ms_residual, series_specs,
    verify_asymptotics, FrameSolution,
};
use mswave::Error;

pub const MIN_R2: f64 = 0.95;
pub const DIV_TOL: f64 = 1e-10;
pub const CURL_TOL: f64 = 1e-8;
pub const NORM_DRIFT_TOL: f64 = 1e-8;
pub const GRAD_PSI_TOL: f64 = 1e-4;

pub struct Outcome {
    pub report: Report,
    pub series: Series,
    /// Converged trajectory, for checkpoints.
    pub trajectory: Option<Trajectory>,
}

/// Run status for a library error.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::NonContraction { .. } => Status::NonContraction,
        Error::InvalidParameter(_)
        | Error::InvalidGrid(_)
        | Error::IncompatibleGrids(..)
        | Error::Coverage { .. } => Status::ConfigError,
        _ => Status::ToleranceFailure,
    }
}

/// Picard iteration with the history recorded; `None` after a failure,
/// which is then recorded on the report.
pub fn solve(pb: &Problem, report: &mut Report, verbose: bool) -> Option<Trajectory> {
    let mut records = Vec::new();
    let res = iterate(pb, &GammaMode::Infinity, None, |r| {
        if verbose {
            eprintln!(
                "iterate {:>2}: distance {:.3e} ratio {}",
                r.iterate_index,
                r.distance,
                r.contraction_ratio
                    .map_or("-".into(), |x| format!("{x:.3e}"))
            );
        }
        records.push(IterationRecord::from(r));
    });
    report.iterations = records;
    match res {
        Ok((traj, _)) => Some(traj),
        Err(e) => {
            report.fail(status_of(&e), e.to_string());
            None
        }
    }
}

pub fn picard_checks(pb: &Problem, report: &Report) -> Vec<Check> {
    let last = report.iterations.last().expect("at least one iterate");
    let ratios: Vec<f64> = report
        .iterations
        .iter()
        .filter(|r| r.iterate > 2)
        .filter_map(|r| r.contraction_ratio)
        .collect();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let div = report
        .iterations
        .iter()
        .map(|r| r.max_div_bb)
        .fold(0.0, f64::max);
    let curl = report
        .iterations
        .iter()
        .map(|r| r.max_curl_sigma)
        .fold(0.0, f64::max);
    vec![
        Check::at_most("picard_distance", last.distance, pb.cfg.tol),
        Check {
            name: "contraction_ratio_after_2".into(),
            value: Some(worst),
            tolerance: Some(1.0),
            passed: worst < 1.0,
            detail: None,
        },
        Check::at_most("div_bb_relative", div, DIV_TOL),
        Check::at_most("curl_sigma_relative", curl, CURL_TOL),
    ]
}

pub fn meta(cfg: &RunConfig, st: &AsymptoticState, nodes: usize) -> RunMeta {
    RunMeta {
        version: env!("CARGO_PKG_VERSION").into(),
        n: cfg.grid.n,
        length: cfg.grid.length,
        t_start: cfg.time.t_start,
        t_max: cfg.time.t_max,
        rho: cfg.time.rho,
        nodes,
        seed: cfg.seed,
        w_plus_l2: st.w_plus.l2(),
        zero_state: st.is_zero(),
    }
}

fn rel(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        x
    }
}

pub fn asymptotic_state(cfg: &RunConfig) -> Result<AsymptoticState, Error> {
    let w_plus = build_w_plus(cfg).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    AsymptoticState::new(w_plus, cfg.physics.alpha, cfg.physics.beta, cfg.physics.k)
}

/// Report with run metadata and one empty record per node.
pub fn empty_report(cfg: &RunConfig, pb: &Problem) -> Report {
    let mut report = Report::new(
        cfg.scenario.expect("validated config has a scenario"),
        meta(cfg, &pb.st, pb.times.len()),
    );
    report.nodes = pb
        .times
        .iter()
        .map(|&t| NodeRecord {
            t,
            ..Default::default()
        })
        .collect();
    report
}

/// Worst `err` over the nodes relative to the largest field of the run.
fn run_relative(fields: &[VectorField], err: fn(&VectorField) -> f64) -> f64 {
    let scale = fields.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    rel(fields.iter().map(err).fold(0.0, f64::max), scale)
}

/// Runs a validated configuration.
pub fn run_scenario(cfg: &RunConfig, verbose: bool) -> Result<Outcome, Error> {
    let scenario = cfg.scenario.expect("validated config has a scenario");
    let st = asymptotic_state(cfg)?;
    if scenario == Scenario::Identities {
        let grid = SpectralGrid::new(cfg.grid.n, cfg.grid.length)?;
        let mut report = Report::new(scenario, meta(cfg, &st, 0));
        report.checks = run_identities(grid, cfg.seed, &cfg.solver_config().quad)?;
        report.finish();
        return Ok(Outcome {
            report,
            series: Series::new(&["t"]),
            trajectory: None,
        });
    }
    let pb = Problem::new(st, cfg.solver_config())?;
    let mut report = empty_report(cfg, &pb);
    let Some(traj) = solve(&pb, &mut report, verbose) else {
        return Ok(Outcome {
            report,
            series: Series::new(&["t"]),
            trajectory: None,
        });
    };
    report.checks = picard_checks(&pb, &report);
    let series = match scenario {
        Scenario::FixedPoint => fixed_point(&pb, &traj),
        Scenario::DecaySuite => decay_suite(&pb, &traj, &mut report)?,
        Scenario::FiniteT0Crosscheck => crosscheck(&pb, &traj, &mut report)?,
        Scenario::EnergyDrift => energy_drift(&pb, &traj, &mut report)?,
        Scenario::Identities => unreachable!(),
    };
    report.finish();
    Ok(Outcome {
        report,
        series,
        trajectory: Some(traj),
    })
}

pub fn fixed_point(pb: &Problem, traj: &Trajectory) -> Series {
    let mut s = Series::new(&["t", "y", "y1", "z0", "z1", "z2", "n"]);
    for st in &traj.states {
        let w = node_norms(&pb.st, st);
        s.rows
            .push(vec![st.t, w.y, w.y1, w.z[0], w.z[1], w.z[2], w.n]);
    }
    s
}

/// Fit window `[2T, T_max]`.
pub fn fit_window(pb: &Problem) -> (f64, f64) {
    (2.0 * pb.cfg.t_start, pb.cfg.t_max)
}

pub fn decay_suite(pb: &Problem, traj: &Trajectory, report: &mut Report) -> Result<Series, Error> {
    let fs = FrameSolution::new(pb, traj)?;
    let phys = assemble_solution(&fs);
    let n0 = phys.u[0].l2();
    let norm_drift = phys
        .u
        .iter()
        .map(|u| rel((u.l2() - n0).abs(), n0))
        .fold(0.0, f64::max);
    let div_a = run_relative(&phys.a, max_divergence);
    let div_b = run_relative(&fs.b, max_divergence);
    let curl_s = run_relative(&fs.sigma, max_curl);
    let i2 = nearest_node(&fs.times, 2.0 * pb.cfg.t_start)?;
    let gap = gradient_of_real(fs.grid, &fs.psi[i2]).sub(&fs.sigma[i2]);
    let grad_psi = rel(gap.l2(), fs.sigma[i2].l2());
    let tail = fs
        .psi
        .last()
        .unwrap()
        .iter()
        .zip(&fs.psi_tail)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let (mut rs_max, mut rm_max) = (0.0f64, 0.0f64);
    for i in 0..fs.len() {
        let (rs, rm) = ms_residual(pb, &fs, i)?;
        report.nodes[i].schrodinger_residual = Some(rs);
        report.nodes[i].maxwell_residual = Some(rm);
        rs_max = rs_max.max(rs);
        rm_max = rm_max.max(rm);
    }
    report.checks.extend([
        Check::at_most("u_norm_drift", norm_drift, NORM_DRIFT_TOL),
        Check::at_most("div_a_relative", div_a, DIV_TOL),
        Check::at_most("div_b_relative", div_b, DIV_TOL),
        Check::at_most("curl_sigma_nodes_relative", curl_s, CURL_TOL),
        Check::at_most("grad_psi_vs_sigma_at_2t", grad_psi, GRAD_PSI_TOL)
            .with_detail(format!("t = {}", fs.times[i2])),
        Check::at_most("psi_terminal_equals_tail", tail, 0.0),
        Check::at_most("maxwell_residual_max", rm_max, 10.0 * pb.cfg.tol),
        Check {
            name: "schrodinger_residual_max".into(),
            value: Some(rs_max),
            tolerance: None,
            passed: true,
            detail: Some("L2 norm, reported".into()),
        },
    ]);
    let series = decay_series(pb, &fs)?;
    let specs = series_specs(pb.st.beta);
    match verify_asymptotics(pb, &series, fit_window(pb)) {
        Ok(fits) => {
            report.fits = specs
                .iter()
                .zip(&fits)
                .map(|(s, f)| FitRecord::new(s, f, fit_passes(s, f, MIN_R2)))
                .collect()
        }
        Err(e @ Error::FitWindow(_)) => {
            report
                .checks
                .push(Check::flag("fit_window", false, e.to_string()))
        }
        Err(e) => return Err(e),
    }
    let mut columns = vec!["t"];
    columns.extend(series.names.iter());
    let mut out = Series::new(&columns);
    for (i, &t) in series.times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(series.values.iter().map(|v| v[i]));
        out.rows.push(row);
    }
    Ok(out)
}

/// Re-solve from `t0 = 3T` with data taken from the converged trajectory.
pub fn crosscheck_against(pb: &Problem, traj: &Trajectory) -> Result<(Trajectory, f64), Error> {
    let node = nearest_node(&pb.times, 3.0 * pb.cfg.t_start)?;
    let s0 = &traj.states[node];
    let (again, _) = solve_finite_t0(pb, 3.0 * pb.cfg.t_start, &s0.q, &s0.sigma)?;
    let d = weighted_distance(&pb.st, &again, traj);
    Ok((again, d))
}

pub fn crosscheck(pb: &Problem, traj: &Trajectory, report: &mut Report) -> Result<Series, Error> {
    let (again, d) = crosscheck_against(pb, traj)?;
    let diff = difference(&again, traj);
    let scale = weighted_norms(&pb.st, traj).max();
    let mut s = Series::new(&["t", "distance"]);
    for (i, st) in diff.states.iter().enumerate() {
        let v = rel(node_norms(&pb.st, st).max(), scale);
        report.nodes[i].crosscheck_distance = Some(v);
        s.rows.push(vec![st.t, v]);
    }
    report.checks.push(
        Check::at_most("finite_t0_distance", d, 10.0 * pb.cfg.step_tol).with_detail(format!(
            "t0 = {}",
            pb.times[nearest_node(&pb.times, 3.0 * pb.cfg.t_start)?]
        )),
    );
    Ok(s)
}

/// `max_t |E(t) - E(T)| / |E(T)|` divided by the decades covered.
pub fn drift_per_decade(times: &[f64], energy: &[f64]) -> f64 {
    let e0 = energy[0];
    let decades = (times[times.len() - 1] / times[0]).log10();
    let worst = energy
        .iter()
        .map(|e| rel((e - e0).abs(), e0.abs()))
        .fold(0.0, f64::max);
    worst / decades
}

pub fn energy_drift(pb: &Problem, traj: &Trajectory, report: &mut Report) -> Result<Series, Error> {
    let fs = FrameSolution::new(pb, traj)?;
    let mut s = Series::new(&["t", "kinetic", "magnetic", "electric", "coulomb", "total"]);
    let mut totals = Vec::with_capacity(fs.len());
    for i in 0..fs.len() {
        let e = compute_energy(&fs, i)?;
        report.nodes[i].energy = Some(e.total());
        totals.push(e.total());
        s.rows.push(vec![
            fs.times[i],
            e.kinetic,
            e.magnetic,
            e.electric,
            e.coulomb,
            e.total(),
        ]);
    }
    let tol = 10.0 * (pb.cfg.tol + pb.cfg.step_tol);
    report.checks.push(Check::at_most(
        "energy_drift_per_decade",
        drift_per_decade(&fs.times, &totals),
        tol,
    ));
    Ok(s)
}

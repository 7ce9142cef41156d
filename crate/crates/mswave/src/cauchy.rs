//! The linearized system, the map `Gamma` and the fixed-point drivers.
//!
//! Unknowns are the deviations `(q, sigma, B_b)` from the profiles. The
//! amplitude equation is stepped in the interaction picture `p = U(1/t) q'`,
//! so the free part `i (2t^2)^{-1} Delta` is exact; everything else goes
//! through classical RK4 with step doubling.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::history::{blend_real, blend_vector, NodeSeries, SplicedMoment};
use crate::potentials::{
    current_ma, current_mb, hartree_g, projected_fj, transport_skew, TimeKernelQuadrature,
};
use crate::profiles::{build_w, moment_norm, table_times, AsymptoticState, ProfileTable};
use crate::spectral::{
    free_propagator, gradient_of_real, gradient_part, max_curl, max_divergence, norm, norm_vector,
    split_at, NormSpec, ScalarField, SpectralGrid, VectorField,
};
use crate::timegrid::GeometricGrid;

/// Solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Earliest time `T`.
    pub t_start: f64,
    pub t_max: f64,
    pub rho: f64,
    /// Local error tolerance per unit `ln t` of the sub-stepper.
    pub step_tol: f64,
    pub max_halvings: usize,
    /// Relative weighted distance at which the Picard iteration stops.
    pub tol: f64,
    pub max_iters: usize,
    /// `1` is plain Picard.
    pub under_relaxation: f64,
    pub quad: TimeKernelQuadrature,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t_start: 20.0,
            t_max: 640.0,
            rho: 1.05,
            step_tol: 1e-9,
            max_halvings: 24,
            tol: 1e-8,
            max_iters: 40,
            under_relaxation: 1.0,
            quad: TimeKernelQuadrature::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start > 1.0) || !(self.t_max > self.t_start) || !(self.rho > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 1 < T < T_max and rho > 1 (got {}, {}, {})",
                self.t_start, self.t_max, self.rho
            )));
        }
        if !(self.step_tol > 0.0) || !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.under_relaxation > 0.0 && self.under_relaxation <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "under-relaxation {} not in (0, 1]",
                self.under_relaxation
            )));
        }
        self.quad.validate()
    }
}

/// Deviations from the profiles at one node.
#[derive(Debug, Clone)]
pub struct AuxState {
    pub t: f64,
    pub q: ScalarField,
    pub sigma: VectorField,
    pub bb: VectorField,
}

impl AuxState {
    pub fn zeros(grid: SpectralGrid, t: f64) -> Self {
        let mut bb = VectorField::zeros(grid);
        bb.div_free = true;
        Self {
            t,
            q: ScalarField::zeros(grid),
            sigma: VectorField::zeros(grid),
            bb,
        }
    }
}

/// One state per node of `T rho^n`; beyond `T_max` the profiles close the tail.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: SpectralGrid,
    pub times: Vec<f64>,
    pub rho: f64,
    pub states: Vec<AuxState>,
}

impl Trajectory {
    pub fn zeros(grid: SpectralGrid, times: &[f64], rho: f64) -> Self {
        Self {
            grid,
            times: times.to_vec(),
            rho,
            states: times.iter().map(|&t| AuxState::zeros(grid, t)).collect(),
        }
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// `a self + (1 - a) other`.
    pub fn relax(&self, other: &Trajectory, a: f64) -> Trajectory {
        let mut out = self.clone();
        for (s, o) in out.states.iter_mut().zip(&other.states) {
            s.q = s.q.scale(a.into()).add(&o.q.scale((1.0 - a).into()));
            s.sigma = s.sigma.scale(a).add(&o.sigma.scale(1.0 - a));
            s.bb = s.bb.scale(a).add(&o.bb.scale(1.0 - a));
            s.bb.div_free = true;
        }
        out
    }

    /// Checks node times and the gauge invariants.
    pub fn check(&self) -> Result<()> {
        for (s, &t) in self.states.iter().zip(&self.times) {
            if s.t != t {
                return Err(Error::InvalidParameter(format!(
                    "state time {} off node {t}",
                    s.t
                )));
            }
            s.q.check_finite()?;
            s.sigma.check_finite()?;
            s.bb.check_finite()?;
        }
        Ok(())
    }
}

/// Profiles, node layout and parameters of one run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub st: AsymptoticState,
    pub cfg: SolverConfig,
    pub times: Vec<f64>,
    pub rho: f64,
    pub table: ProfileTable,
}

impl Problem {
    pub fn new(st: AsymptoticState, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = GeometricGrid::new(cfg.t_start, cfg.t_max, cfg.rho)?;
        let n = st.grid().n() as f64;
        let near = cfg.t_max * n / 2.0;
        let far = cfg.t_max * cfg.quad.far_extent.max(n / 2.0);
        let times = table_times(&grid.times, grid.rho, near, far, cfg.quad.far_panel_ratio)?;
        let table = ProfileTable::build(&st, times, &cfg.quad)?;
        Ok(Self {
            st,
            cfg,
            times: grid.times,
            rho: grid.rho,
            table,
        })
    }

    pub fn grid(&self) -> SpectralGrid {
        self.st.grid()
    }

    pub fn zero_trajectory(&self) -> Trajectory {
        Trajectory::zeros(self.grid(), &self.times, self.rho)
    }

    pub fn w(&self, t: f64) -> Result<ScalarField> {
        build_w(&self.st, t)
    }

    pub fn s(&self, i: usize) -> Result<VectorField> {
        self.table.s_at(self.times[i])
    }

    pub fn bstar(&self, i: usize) -> Result<VectorField> {
        self.table.bstar_at(self.times[i])
    }
}

/// Node values of everything the linearized equations freeze.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub times: Vec<f64>,
    /// `a = s + B`.
    pub a: Vec<VectorField>,
    /// `-(2t^2)^{-1}(2 B . s + B^2) + t^{-1}((x . B_a)_S + x . B_b)`.
    pub v: Vec<Vec<f64>>,
    pub s: Vec<VectorField>,
    /// `grad[(2t^2)^{-1} s . S + t^{-1}(g(q, q + 2W) - (x . G)_L)]`.
    pub sigma_source: Vec<VectorField>,
    /// `G = B_a(q, q + 2W)`.
    pub g_field: Vec<VectorField>,
    /// `M_b(w, s, B)`.
    pub mb: NodeSeries,
}

fn long_part(grid: SpectralGrid, f: &[f64], cutoff: f64) -> (Vec<f64>, Vec<f64>) {
    let (short, long) = split_at(&ScalarField::from_real(grid, f), cutoff);
    (short.re(), long.re())
}

impl Coefficients {
    pub fn new(pb: &Problem, traj: &Trajectory) -> Result<Self> {
        let grid = pb.grid();
        let times = pb.times.clone();
        let beta = pb.st.beta;
        let mut ws = Vec::with_capacity(times.len());
        let mut moments = Vec::with_capacity(times.len());
        for (i, &t) in times.iter().enumerate() {
            let w = pb.w(t)?;
            let q = &traj.states[i].q;
            let q2w = q.add(&w.scale(2.0.into()));
            moments.push(current_ma(q, &q2w)?);
            ws.push(w);
        }
        let body = NodeSeries::new(times.clone(), moments)?;
        let src = SplicedMoment::new(grid, &body, None);
        let (mut a, mut v, mut s_all, mut sig, mut gs, mut mb) =
            (vec![], vec![], vec![], vec![], vec![], vec![]);
        for (i, &t) in times.iter().enumerate() {
            let state = &traj.states[i];
            let sp = pb.s(i)?;
            let s = sp.add(&state.sigma);
            let g = projected_fj(&src, 0, t, &pb.cfg.quad)?;
            let ba = pb.bstar(i)?.add(&g);
            let b = ba.add(&state.bb);
            let w = ws[i].add(&state.q);
            let ai = s.add(&b);
            let bs = b.dot(&s);
            let bb2 = b.norm_sqr();
            let (short, _) = long_part(grid, &ba.x_dot(), t.powf(beta));
            let xbb = state.bb.x_dot();
            v.push(
                (0..grid.len())
                    .map(|p| -(2.0 * bs[p] + bb2[p]) / (2.0 * t * t) + (short[p] + xbb[p]) / t)
                    .collect(),
            );
            // sigma source
            let q2w = state.q.add(&ws[i].scale(2.0.into()));
            let gq = hartree_g(&state.q, &q2w)?.re();
            let (_, xg_long) = long_part(grid, &g.x_dot(), t.powf(beta));
            let ss = s.dot(&sp);
            let pot: Vec<f64> = (0..grid.len())
                .map(|p| 0.5 * ss[p] / (t * t) + (gq[p] - xg_long[p]) / t)
                .collect();
            sig.push(gradient_of_real(grid, &pot));
            mb.push(current_mb(&w, &s, &b)?);
            a.push(ai);
            s_all.push(s);
            gs.push(g);
        }
        let mb = NodeSeries::new(times.clone(), mb)?;
        Ok(Self {
            times,
            a,
            v,
            s: s_all,
            sigma_source: sig,
            g_field: gs,
            mb,
        })
    }
}

/// Interaction-picture state `(p, sigma')`.
#[derive(Debug, Clone)]
pub struct StepState {
    pub p: ScalarField,
    pub sigma: VectorField,
}

impl StepState {
    fn axpy(&self, h: f64, k: &StepState) -> StepState {
        let mut out = self.clone();
        out.p.axpy(h.into(), &k.p);
        out.sigma.axpy(h, &k.sigma);
        out
    }
}

/// What drives the amplitude equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    /// `d q'/dt = L q' + R~_1`.
    Full,
    /// `d q'/dt = L q'` and `d sigma'/dt = (2t^2)^{-1} grad(s . sigma')`.
    Homogeneous,
}

fn rhs(
    pb: &Problem,
    c: &Coefficients,
    t: f64,
    y: &StepState,
    forcing: Forcing,
) -> Result<StepState> {
    let grid = pb.grid();
    let a = blend_vector(&c.times, &c.a, t);
    let v = blend_real(&c.times, &c.v, t);
    let s = blend_vector(&c.times, &c.s, t);
    let mut field = free_propagator(&y.p, -1.0 / t);
    if forcing == Forcing::Full {
        field = field.add(&pb.w(t)?);
    }
    let mut n = transport_skew(&a, &field).scale((1.0 / (t * t)).into());
    for p in 0..grid.len() {
        n.values[p] += Complex64::new(0.0, v[p]) * field.values[p];
    }
    let dp = free_propagator(&n, 1.0 / t);
    let mut ds = gradient_of_real(grid, &s.dot(&y.sigma)).scale(0.5 / (t * t));
    if forcing == Forcing::Full {
        ds = ds.add(&blend_vector(&c.times, &c.sigma_source, t));
    }
    Ok(StepState { p: dp, sigma: ds })
}

fn rk4(
    pb: &Problem,
    c: &Coefficients,
    t: f64,
    h: f64,
    y: &StepState,
    forcing: Forcing,
) -> Result<StepState> {
    let k1 = rhs(pb, c, t, y, forcing)?;
    let k2 = rhs(pb, c, t + 0.5 * h, &y.axpy(0.5 * h, &k1), forcing)?;
    let k3 = rhs(pb, c, t + 0.5 * h, &y.axpy(0.5 * h, &k2), forcing)?;
    let k4 = rhs(pb, c, t + h, &y.axpy(h, &k3), forcing)?;
    let mut out = y.axpy(h / 6.0, &k1);
    out = out.axpy(h / 3.0, &k2);
    out = out.axpy(h / 3.0, &k3);
    Ok(out.axpy(h / 6.0, &k4))
}

fn march(
    pb: &Problem,
    c: &Coefficients,
    t0: f64,
    t1: f64,
    m: usize,
    y: &StepState,
    forcing: Forcing,
) -> Result<StepState> {
    // geometric sub-steps: uniform in ln t
    let r = (t1 / t0).powf(1.0 / m as f64);
    let mut y = y.clone();
    let mut t = t0;
    for k in 0..m {
        let next = if k + 1 == m { t1 } else { t * r };
        y = rk4(pb, c, t, next - t, &y, forcing)?;
        t = next;
    }
    Ok(y)
}

/// Sub-stepping statistics of one node interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub substeps: usize,
    pub estimate: f64,
}

/// Advances `(p, sigma')` from node `from` to node `to` (adjacent, either
/// direction) with step doubling; `substeps` is the starting subdivision.
pub fn step_linearized(
    pb: &Problem,
    c: &Coefficients,
    y: &StepState,
    from: usize,
    to: usize,
    substeps: usize,
    forcing: Forcing,
) -> Result<(StepState, StepStats)> {
    if from.abs_diff(to) != 1 || to >= pb.times.len() {
        return Err(Error::InvalidParameter(format!(
            "step {from} -> {to} is not between adjacent nodes"
        )));
    }
    let (t0, t1) = (pb.times[from], pb.times[to]);
    let span = (t1 / t0).ln().abs();
    let scale_q = pb.st.w_plus.l2().max(y.p.l2()).max(f64::MIN_POSITIVE);
    let scale_s = pb
        .table
        .s_at(t1)?
        .l2()
        .max(y.sigma.l2())
        .max(f64::MIN_POSITIVE);
    let mut m = substeps.max(1);
    let mut halvings = 0;
    loop {
        let coarse = march(pb, c, t0, t1, m, y, forcing)?;
        let fine = march(pb, c, t0, t1, 2 * m, y, forcing)?;
        let err = (fine.p.sub(&coarse.p).l2() / scale_q)
            .max(fine.sigma.sub(&coarse.sigma).l2() / scale_s)
            / 15.0;
        if !err.is_finite() {
            return Err(Error::NonFinite {
                what: "step",
                index: from,
            });
        }
        if err <= pb.cfg.step_tol * span {
            return Ok((
                fine,
                StepStats {
                    substeps: 2 * m,
                    estimate: err,
                },
            ));
        }
        halvings += 1;
        if halvings > pb.cfg.max_halvings {
            return Err(Error::StepRejected {
                t: t0,
                estimate: err,
                halvings: halvings as u32,
            });
        }
        m *= 2;
    }
}

/// How `Gamma` pins the amplitude and phase deviations.
#[derive(Debug, Clone)]
pub enum GammaMode {
    /// Zero data at `T_max`, integrated backward.
    Infinity,
    /// Data `(q, sigma)` pinned at node `node`.
    FiniteT0 {
        node: usize,
        q: ScalarField,
        sigma: VectorField,
    },
}

/// Sweeps all node intervals; returns the node states `(q', sigma')`.
fn sweep(
    pb: &Problem,
    c: &Coefficients,
    mode: &GammaMode,
) -> Result<(Vec<ScalarField>, Vec<VectorField>, usize)> {
    let grid = pb.grid();
    let n = pb.times.len();
    let (start, y0) = match mode {
        GammaMode::Infinity => (
            n - 1,
            StepState {
                p: ScalarField::zeros(grid),
                sigma: VectorField::zeros(grid),
            },
        ),
        GammaMode::FiniteT0 { node, q, sigma } => {
            if *node >= n {
                return Err(Error::InvalidParameter(format!(
                    "t0 node {node} outside the grid"
                )));
            }
            (
                *node,
                StepState {
                    p: free_propagator(q, 1.0 / pb.times[*node]),
                    sigma: gradient_part(sigma),
                },
            )
        }
    };
    let mut ps = vec![ScalarField::zeros(grid); n];
    let mut sig = vec![VectorField::zeros(grid); n];
    ps[start] = y0.p.clone();
    sig[start] = y0.sigma.clone();
    let mut total = 0;
    let mut run = |dir: isize| -> Result<()> {
        let mut y = y0.clone();
        let mut i = start as isize;
        let mut m = 1;
        loop {
            let j = i + dir;
            if j < 0 || j >= n as isize {
                return Ok(());
            }
            let (next, stats) =
                step_linearized(pb, c, &y, i as usize, j as usize, m, Forcing::Full)?;
            total += stats.substeps;
            m = (stats.substeps / 2).max(1);
            if stats.estimate < pb.cfg.step_tol * 1e-2 && m > 1 {
                m /= 2;
            }
            y = next;
            ps[j as usize] = y.p.clone();
            sig[j as usize] = y.sigma.clone();
            i = j;
        }
    };
    run(-1)?;
    run(1)?;
    let mut qs: Vec<ScalarField> = ps
        .iter()
        .zip(&pb.times)
        .map(|(p, &t)| free_propagator(p, -1.0 / t))
        .collect();
    if let GammaMode::FiniteT0 { node, q, sigma } = mode {
        qs[*node] = q.clone();
        sig[*node] = sigma.clone();
    }
    Ok((qs, sig, total))
}

/// `B_b' = t^{-1} P F_1(M_b(w, s, B))`, with the profile current beyond `T_max`.
pub fn assign_bb(pb: &Problem, c: &Coefficients) -> Result<Vec<VectorField>> {
    let src = SplicedMoment::new(pb.grid(), &c.mb, Some(&pb.table.mb));
    pb.times
        .iter()
        .map(|&t| Ok(projected_fj(&src, 1, t, &pb.cfg.quad)?.scale(1.0 / t)))
        .collect()
}

/// `Gamma(traj_in)`.
pub fn gamma_map(pb: &Problem, traj: &Trajectory, mode: &GammaMode) -> Result<Trajectory> {
    traj.check()?;
    if traj.times != pb.times {
        return Err(Error::InvalidParameter(
            "trajectory nodes differ from the problem grid".into(),
        ));
    }
    let c = Coefficients::new(pb, traj)?;
    let (qs, sig, _) = sweep(pb, &c, mode)?;
    let bbs = assign_bb(pb, &c)?;
    let states = pb
        .times
        .iter()
        .zip(qs.into_iter().zip(sig.into_iter().zip(bbs)))
        .map(|(&t, (q, (sigma, mut bb)))| {
            bb.div_free = true;
            AuxState { t, q, sigma, bb }
        })
        .collect();
    Ok(Trajectory {
        grid: pb.grid(),
        times: pb.times.clone(),
        rho: pb.rho,
        states,
    })
}

/// Weighted suprema over the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeightedNorms {
    /// `t (ln t)^{-1} (|q|_k v |x q|_k)`.
    pub y: f64,
    /// `(t^{-1} ln t + t^{-alpha beta})^{-1} |q|_{k+1}`.
    pub y1: f64,
    /// `t (ln t)^{-2} |sigma|_{K^k}`, `t (ln t)^{-2} |sigma|_{K^{k+1}}` and
    /// `(t^{-1} ln^2 t + t^{-alpha beta})^{-1} |sigma|_{K^{k+2}}`.
    pub z: [f64; 3],
    /// `t (ln t)^{-1} (|B_b| v |x . B_b|)_{K^{k+1}}`.
    pub n: f64,
}

impl WeightedNorms {
    pub fn max(&self) -> f64 {
        [self.y, self.y1, self.z[0], self.z[1], self.z[2], self.n]
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    fn components(&self) -> [f64; 6] {
        [self.y, self.y1, self.z[0], self.z[1], self.z[2], self.n]
    }
}

/// Per-node norms behind [`WeightedNorms`].
pub fn node_norms(st: &AsymptoticState, s: &AuxState) -> WeightedNorms {
    let (t, k) = (s.t, st.k);
    let lt = t.ln();
    let ab = st.alpha * st.beta;
    let q = norm(&s.q, NormSpec::H(k)).max(moment_norm(&s.q, NormSpec::H(k)));
    let xb = ScalarField::from_real(s.bb.grid, &s.bb.x_dot());
    WeightedNorms {
        y: t / lt * q,
        y1: norm(&s.q, NormSpec::H(k + 1.0)) / (lt / t + t.powf(-ab)),
        z: [
            t / (lt * lt) * norm_vector(&s.sigma, NormSpec::K(k)),
            t / (lt * lt) * norm_vector(&s.sigma, NormSpec::K(k + 1.0)),
            norm_vector(&s.sigma, NormSpec::K(k + 2.0)) / (lt * lt / t + t.powf(-ab)),
        ],
        n: t / lt * norm_vector(&s.bb, NormSpec::K(k + 1.0)).max(norm(&xb, NormSpec::K(k + 1.0))),
    }
}

/// Suprema of [`node_norms`] over the trajectory.
pub fn weighted_norms(st: &AsymptoticState, traj: &Trajectory) -> WeightedNorms {
    let mut out = WeightedNorms::default();
    for s in &traj.states {
        let v = node_norms(st, s);
        out.y = out.y.max(v.y);
        out.y1 = out.y1.max(v.y1);
        for j in 0..3 {
            out.z[j] = out.z[j].max(v.z[j]);
        }
        out.n = out.n.max(v.n);
    }
    out
}

/// Difference trajectory `a - b`.
pub fn difference(a: &Trajectory, b: &Trajectory) -> Trajectory {
    let mut out = a.clone();
    for (s, o) in out.states.iter_mut().zip(&b.states) {
        s.q = s.q.sub(&o.q);
        s.sigma = s.sigma.sub(&o.sigma);
        s.bb = s.bb.sub(&o.bb);
    }
    out
}

/// Relative weighted distance: each component of `a - reference` over the
/// same component of `reference`, maximized.
pub fn weighted_distance(st: &AsymptoticState, a: &Trajectory, reference: &Trajectory) -> f64 {
    let d = weighted_norms(st, &difference(a, reference)).components();
    let r = weighted_norms(st, reference).components();
    let scale = r.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return d.iter().cloned().fold(0.0, f64::max);
    }
    d.iter()
        .zip(&r)
        .map(|(d, r)| d / r.max(1e-3 * scale))
        .fold(0.0, f64::max)
}

/// One Picard iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iterate_index: usize,
    pub weighted_norms: WeightedNorms,
    pub distance: f64,
    pub contraction_ratio: Option<f64>,
    /// Weighted distances per equation: amplitude, phase, field.
    pub residuals: [f64; 3],
    pub max_div_bb: f64,
    pub max_curl_sigma: f64,
}

fn per_equation(st: &AsymptoticState, a: &Trajectory, b: &Trajectory) -> [f64; 3] {
    let d = weighted_norms(st, &difference(a, b));
    let r = weighted_norms(st, b);
    let rel = |x: f64, y: f64| if y > 0.0 { x / y } else { x };
    [
        rel(d.y.max(d.y1), r.y.max(r.y1)),
        rel(
            d.z[0].max(d.z[1]).max(d.z[2]),
            r.z[0].max(r.z[1]).max(r.z[2]),
        ),
        rel(d.n, r.n),
    ]
}

/// Worst `|div B_b|` and `|curl sigma|` over the nodes, each relative to the
/// largest `|B_b|` or `|sigma|` of the run. A per-node scale would turn
/// roundoff into O(1) at nodes where a field is pinned to zero.
pub fn gauge_errors(traj: &Trajectory) -> (f64, f64) {
    let rel = |x: f64, m: f64| if m > 0.0 { x / m } else { x };
    let mb = traj
        .states
        .iter()
        .map(|s| s.bb.max_abs())
        .fold(0.0, f64::max);
    let ms = traj
        .states
        .iter()
        .map(|s| s.sigma.max_abs())
        .fold(0.0, f64::max);
    let div = traj
        .states
        .iter()
        .map(|s| max_divergence(&s.bb))
        .fold(0.0, f64::max);
    let curl = traj
        .states
        .iter()
        .map(|s| max_curl(&s.sigma))
        .fold(0.0, f64::max);
    (rel(div, mb), rel(curl, ms))
}

/// Picard iteration of `Gamma` from the zero trajectory (or `start`).
pub fn iterate(
    pb: &Problem,
    mode: &GammaMode,
    start: Option<Trajectory>,
    mut progress: impl FnMut(&IterationReport),
) -> Result<(Trajectory, Vec<IterationReport>)> {
    let mut current = start.unwrap_or_else(|| pb.zero_trajectory());
    let mut history: Vec<IterationReport> = Vec::new();
    let mut streak = 0;
    for it in 1..=pb.cfg.max_iters {
        let mut next = gamma_map(pb, &current, mode)?;
        if pb.cfg.under_relaxation < 1.0 {
            next = next.relax(&current, pb.cfg.under_relaxation);
        }
        let distance = weighted_distance(&pb.st, &current, &next);
        let ratio = history.last().map(|h| {
            if h.distance > 0.0 {
                distance / h.distance
            } else {
                0.0
            }
        });
        let (max_div_bb, max_curl_sigma) = gauge_errors(&next);
        let report = IterationReport {
            iterate_index: it,
            weighted_norms: weighted_norms(&pb.st, &next),
            distance,
            contraction_ratio: if it >= 2 { ratio } else { None },
            residuals: per_equation(&pb.st, &current, &next),
            max_div_bb,
            max_curl_sigma,
        };
        progress(&report);
        history.push(report);
        current = next;
        if distance <= pb.cfg.tol {
            return Ok((current, history));
        }
        match ratio {
            Some(r) if r >= 1.0 => streak += 1,
            _ => streak = 0,
        }
        if streak >= 3 {
            let ratios = history.iter().filter_map(|h| h.contraction_ratio).collect();
            return Err(Error::NonContraction { ratios });
        }
    }
    let distance = history.last().map(|h| h.distance).unwrap_or(f64::INFINITY);
    Err(Error::NotConverged {
        iterations: pb.cfg.max_iters,
        distance,
    })
}

/// Fixed point with zero data at `T_max`.
pub fn solve_at_infinity(pb: &Problem) -> Result<(Trajectory, Vec<IterationReport>)> {
    iterate(pb, &GammaMode::Infinity, None, |_| {})
}

/// Index of the node nearest to `t` in `ln t`; `t` must lie in the grid range.
pub fn nearest_node(times: &[f64], t: f64) -> Result<usize> {
    let (lo, hi) = (times[0], *times.last().unwrap());
    if !(t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12)) {
        return Err(Error::Coverage { t, lo, hi });
    }
    let mut best = 0;
    for (i, &v) in times.iter().enumerate() {
        if (v / t).ln().abs() < (times[best] / t).ln().abs() {
            best = i;
        }
    }
    Ok(best)
}

/// Fixed point with `(q, sigma)` pinned at the node nearest to `t0`.
pub fn solve_finite_t0(
    pb: &Problem,
    t0: f64,
    q: &ScalarField,
    sigma: &VectorField,
) -> Result<(Trajectory, Vec<IterationReport>)> {
    let node = nearest_node(&pb.times, t0)?;
    let mode = GammaMode::FiniteT0 {
        node,
        q: q.clone(),
        sigma: sigma.clone(),
    };
    iterate(pb, &mode, None, |_| {})
}

/// Homogeneous evolution `d q'/dt = L q'` with coefficients frozen from `traj`,
/// from node `from` to node `to`; returns `q'` at every visited node.
pub fn evolve_homogeneous(
    pb: &Problem,
    traj: &Trajectory,
    q0: &ScalarField,
    from: usize,
    to: usize,
) -> Result<Vec<ScalarField>> {
    let c = Coefficients::new(pb, traj)?;
    let grid = pb.grid();
    let mut y = StepState {
        p: free_propagator(q0, 1.0 / pb.times[from]),
        sigma: VectorField::zeros(grid),
    };
    let mut out = vec![q0.clone()];
    let dir: isize = if to >= from { 1 } else { -1 };
    let mut i = from as isize;
    while i != to as isize {
        let j = i + dir;
        let (next, _) =
            step_linearized(pb, &c, &y, i as usize, j as usize, 1, Forcing::Homogeneous)?;
        y = next;
        out.push(free_propagator(&y.p, -1.0 / pb.times[j as usize]));
        i = j;
    }
    Ok(out)
}

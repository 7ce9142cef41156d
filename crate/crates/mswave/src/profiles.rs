//! Asymptotic profiles `(W, S)`, the frozen field `B_* = B_a(W)`, the leading
//! phase `phi` and the profile remainders.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::history::{blend_real, blend_vector, NodeSeries};
use crate::potentials::{
    advect, compute_ba, current_ma, current_mb, hartree_g, projected_fj, transport,
    AmplitudeHistory, PowerLawMoment, TimeKernelQuadrature,
};
use crate::spectral::{
    fft, free_propagator, gradient_of_real, laplacian, norm, split_at, NormSpec, ScalarField,
    SpectralGrid, VectorField,
};
use crate::timegrid::{gauss_legendre, gauss_on, lagrange_stencil, GeometricGrid};

/// The datum `w_plus` with the regularity parameters it is used with.
#[derive(Debug, Clone)]
pub struct AsymptoticState {
    pub w_plus: ScalarField,
    pub alpha: f64,
    pub beta: f64,
    /// Sobolev index of the solution space.
    pub k: f64,
    /// `max(|w_plus|_{k+alpha+1}, |x w_plus|_{k+alpha})`.
    pub a_plus: f64,
}

impl AsymptoticState {
    pub fn new(w_plus: ScalarField, alpha: f64, beta: f64, k: f64) -> Result<Self> {
        check_parameters(alpha, beta)?;
        w_plus.check_finite()?;
        let a_plus = norm(&w_plus, NormSpec::H(k + alpha + 1.0))
            .max(moment_norm(&w_plus, NormSpec::H(k + alpha)));
        Ok(Self {
            w_plus,
            alpha,
            beta,
            k,
            a_plus,
        })
    }

    pub fn grid(&self) -> SpectralGrid {
        self.w_plus.grid
    }

    pub fn is_zero(&self) -> bool {
        self.w_plus
            .values
            .iter()
            .all(|v| *v == Complex64::default())
    }
}

/// `alpha > 1`, `0 < beta < 1/2`, `beta (alpha + 1) >= 1`.
pub fn check_parameters(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1/2), got {beta}"
        )));
    }
    if beta * (alpha + 1.0) < 1.0 - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "beta (alpha + 1) = {} < 1",
            beta * (alpha + 1.0)
        )));
    }
    Ok(())
}

/// `(sum_j |x_j f|^2)^{1/2}` in the given norm.
pub fn moment_norm(f: &ScalarField, spec: NormSpec) -> f64 {
    (0..3)
        .map(|d| norm(&f.mul_real(&f.grid.coordinate(d)), spec).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 1.0 - 1e-12) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "profiles need t >= 1, got {t}"
        )));
    }
    Ok(())
}

/// `W(t) = U*(1/t) w_plus`.
pub fn build_w(st: &AsymptoticState, t: f64) -> Result<ScalarField> {
    check_time(t)?;
    Ok(free_propagator(&st.w_plus, -1.0 / t))
}

/// `d W / dt = i (2 t^2)^{-1} Delta W`.
pub fn w_time_derivative(st: &AsymptoticState, t: f64) -> Result<ScalarField> {
    Ok(laplacian(&build_w(st, t)?).scale(Complex64::new(0.0, 0.5 / (t * t))))
}

/// `W` as an amplitude history, evaluated exactly at every time.
pub struct ProfileW<'a>(pub &'a AsymptoticState);

impl AmplitudeHistory for ProfileW<'_> {
    fn grid(&self) -> SpectralGrid {
        self.0.grid()
    }
    fn amplitude(&self, t: f64) -> Result<ScalarField> {
        build_w(self.0, t.max(1.0))
    }
}

/// `B_*(t) = B_a(W)(t)`.
pub fn compute_bstar(
    st: &AsymptoticState,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<VectorField> {
    check_time(t)?;
    if st.is_zero() {
        let mut z = VectorField::zeros(st.grid());
        z.div_free = true;
        return Ok(z);
    }
    compute_ba(&ProfileW(st), &ProfileW(st), t, quad)
}

/// Which phase profile to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileVariant {
    /// `W = U*(1/t) w_plus`, `S` integrated along `W`.
    Full,
    /// `W = w_plus`, `S` integrated with the frozen integrand.
    Simplified,
    /// The simplified `S` in closed form.
    ClosedForm,
}

/// Per-mode weight of the long-range cutoff: `max(0, ln t - max(0, ln |xi|) / beta)`.
pub fn closed_form_multiplier(t: f64, xi: f64, beta: f64) -> f64 {
    let cut = if xi > 1.0 { xi.ln() / beta } else { 0.0 };
    (t.ln() - cut).max(0.0)
}

/// `B_a(w_plus)`, the frozen-profile field of the simplified variants.
pub fn frozen_ba(st: &AsymptoticState, quad: &TimeKernelQuadrature) -> Result<VectorField> {
    let m = current_ma(&st.w_plus, &st.w_plus)?;
    projected_fj(
        &PowerLawMoment {
            field: m,
            exponent: 0.0,
            t_ref: 1.0,
        },
        0,
        1.0,
        quad,
    )
}

/// Closed-form `S(t) = ln t grad g(w_+) - ln(t (omega v 1)^{-1/beta} v 1) grad (x . B_a)(w_+)`.
pub fn build_s_closed_form(
    st: &AsymptoticState,
    frozen: &VectorField,
    t: f64,
) -> Result<VectorField> {
    check_time(t)?;
    let grid = st.grid();
    let g = hartree_g(&st.w_plus, &st.w_plus)?;
    let xb = fft::forward_real(&frozen.x_dot(), grid.n());
    let gs = fft::forward_real(&g.re(), grid.n());
    let xi2 = grid.xi_squared();
    let lt = t.ln();
    let phi: Vec<Complex64> = (0..grid.len())
        .map(|p| {
            let v = lt * gs[p] - closed_form_multiplier(t, xi2[p].sqrt(), st.beta) * xb[p];
            if p == 0 {
                Complex64::default()
            } else {
                v
            }
        })
        .collect();
    Ok(gradient_of_real(grid, &fft::inverse_real(&phi, grid.n())))
}

/// Simplified `S(t)` by direct quadrature in `ln t'` over `nodes_per_decade`
/// cells per decade; the cell holding a mode's cutoff crossing contributes its
/// long-range fraction only.
pub fn build_s_simplified(
    st: &AsymptoticState,
    frozen: &VectorField,
    t: f64,
    nodes_per_decade: usize,
) -> Result<VectorField> {
    check_time(t)?;
    let grid = st.grid();
    let g = hartree_g(&st.w_plus, &st.w_plus)?;
    let xb = fft::forward_real(&frozen.x_dot(), grid.n());
    let gs = fft::forward_real(&g.re(), grid.n());
    let lt = t.ln();
    let cells = ((lt / std::f64::consts::LN_10) * nodes_per_decade as f64)
        .ceil()
        .max(1.0) as usize;
    let h = lt / cells as f64;
    let factor: Vec<f64> = grid
        .xi_squared()
        .iter()
        .map(|&r2| {
            let cross = if r2 > 1.0 {
                0.5 * r2.ln() / st.beta
            } else {
                f64::NEG_INFINITY
            };
            (0..cells)
                .map(|i| {
                    let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                    (b - cross.max(a)).clamp(0.0, h)
                })
                .sum()
        })
        .collect();
    let phi: Vec<Complex64> = (0..grid.len())
        .map(|p| {
            if p == 0 {
                Complex64::default()
            } else {
                lt * gs[p] - factor[p] * xb[p]
            }
        })
        .collect();
    Ok(gradient_of_real(grid, &fft::inverse_real(&phi, grid.n())))
}

/// Profile quantities tabulated on a time grid starting at `t = 1`.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub grid: SpectralGrid,
    pub beta: f64,
    pub times: Vec<f64>,
    pub bstar: Vec<VectorField>,
    /// `phi` including its mean `-int_1^t mean(x . B_*) d ln t`.
    pub phi: Vec<Vec<f64>>,
    /// `M_b(W, S, B_*)`.
    pub mb: NodeSeries,
}

/// Node layout: geometric from 1 up to `trajectory[0]`, the trajectory nodes,
/// geometric with ratio `rho` up to `near`, then `far_ratio` up to `far`.
pub fn table_times(
    trajectory: &[f64],
    rho: f64,
    near: f64,
    far: f64,
    far_ratio: f64,
) -> Result<Vec<f64>> {
    let first = trajectory[0];
    let last = *trajectory.last().unwrap();
    let mut out = Vec::new();
    if first > 1.0 {
        let g = GeometricGrid::new(1.0, first, rho)?;
        out.extend_from_slice(&g.times[..g.len() - 1]);
    }
    out.extend_from_slice(trajectory);
    if near > last {
        let g = GeometricGrid::new(last, near, rho)?;
        out.extend_from_slice(&g.times[1..]);
    }
    let top = *out.last().unwrap();
    if far > top {
        let g = GeometricGrid::new(top, far, far_ratio)?;
        out.extend_from_slice(&g.times[1..]);
    }
    Ok(out)
}

impl ProfileTable {
    pub fn build(
        st: &AsymptoticState,
        times: Vec<f64>,
        quad: &TimeKernelQuadrature,
    ) -> Result<Self> {
        if times.is_empty()
            || (times[0] - 1.0).abs() > 1e-12
            || times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParameter(
                "profile table needs increasing times starting at 1".into(),
            ));
        }
        let grid = st.grid();
        let mut bstar = Vec::with_capacity(times.len());
        let mut gspec = Vec::with_capacity(times.len());
        let mut xbspec = Vec::with_capacity(times.len());
        for &t in &times {
            let w = build_w(st, t)?;
            let b = compute_bstar(st, t, quad)?;
            gspec.push(fft::forward_real(&hartree_g(&w, &w)?.re(), grid.n()));
            xbspec.push(fft::forward_real(&b.x_dot(), grid.n()));
            bstar.push(b);
        }
        let phi = integrate_phase(grid, st.beta, &times, &gspec, &xbspec);
        let mut mb = Vec::with_capacity(times.len());
        for (i, &t) in times.iter().enumerate() {
            let w = build_w(st, t)?;
            let s = gradient_of_real(grid, &phi[i]);
            mb.push(current_mb(&w, &s, &bstar[i])?);
        }
        let mb = NodeSeries::new(times.clone(), mb)?;
        Ok(Self {
            grid,
            beta: st.beta,
            times,
            bstar,
            phi,
            mb,
        })
    }

    pub fn lo(&self) -> f64 {
        self.times[0]
    }

    pub fn hi(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn check(&self, t: f64) -> Result<()> {
        if t < self.lo() * (1.0 - 1e-12) || t > self.hi() * (1.0 + 1e-12) {
            return Err(Error::Coverage {
                t,
                lo: self.lo(),
                hi: self.hi(),
            });
        }
        Ok(())
    }

    /// Index of a node equal to `t` up to roundoff.
    pub fn node(&self, t: f64) -> Option<usize> {
        let i = self.times.partition_point(|&s| s < t * (1.0 - 1e-13));
        (i < self.times.len() && (self.times[i] / t - 1.0).abs() < 1e-12).then_some(i)
    }

    pub fn bstar_at(&self, t: f64) -> Result<VectorField> {
        self.check(t)?;
        if let Some(i) = self.node(t) {
            return Ok(self.bstar[i].clone());
        }
        let mut b = blend_vector(&self.times, &self.bstar, t);
        b.div_free = true;
        Ok(b)
    }

    pub fn phi_at(&self, t: f64) -> Result<Vec<f64>> {
        self.check(t)?;
        if let Some(i) = self.node(t) {
            return Ok(self.phi[i].clone());
        }
        Ok(blend_real(&self.times, &self.phi, t))
    }

    /// `S = grad phi`.
    pub fn s_at(&self, t: f64) -> Result<VectorField> {
        Ok(gradient_of_real(self.grid, &self.phi_at(t)?))
    }

    /// `d phi / dt = t^{-1} (g(W) - (x . B_*)_L)` at a node.
    pub fn phi_rate(&self, st: &AsymptoticState, t: f64) -> Result<Vec<f64>> {
        let b = self.bstar_at(t)?;
        let w = build_w(st, t)?;
        let g = hartree_g(&w, &w)?.re();
        let (_, long) = split_at(
            &ScalarField::from_real(self.grid, &b.x_dot()),
            t.powf(self.beta),
        );
        Ok(g.iter().zip(long.re()).map(|(a, l)| (a - l) / t).collect())
    }
}

/// `phi(t_i) = int_1^{t_i} (g - chi(|xi| <= t'^beta) x . B_*) d ln t'` per mode,
/// with the integrands interpolated by cubics in `ln t` and the cutoff
/// crossing placed exactly.
fn integrate_phase(
    grid: SpectralGrid,
    beta: f64,
    times: &[f64],
    g: &[Vec<Complex64>],
    xb: &[Vec<Complex64>],
) -> Vec<Vec<f64>> {
    let taus: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let xi = grid
        .xi_squared()
        .iter()
        .map(|r| r.sqrt())
        .collect::<Vec<_>>();
    // crossing time in ln t per mode; long range for tau >= start
    let start: Vec<f64> = xi
        .iter()
        .map(|&r| {
            if r > 1.0 {
                r.ln() / beta
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let rule = gauss_legendre(2);
    let len = grid.len();
    let mut acc = vec![Complex64::default(); len];
    let mut out = vec![vec![0.0; len]];
    // basis weights of the cubic interpolant over [a, b] inside one segment
    let weights = |a: f64, b: f64, mid: f64| -> (usize, Vec<f64>) {
        let (first, _) = lagrange_stencil(times, mid.exp());
        let mut w = vec![0.0; 4.min(times.len())];
        for (tau, h) in gauss_on(a, b, &rule) {
            let (f2, l) = lagrange_stencil(times, tau.exp());
            debug_assert_eq!(f2, first);
            for (k, lk) in l.iter().enumerate() {
                w[k] += h * lk;
            }
        }
        (first, w)
    };
    for seg in 0..times.len() - 1 {
        let (a, b) = (taus[seg], taus[seg + 1]);
        let mid = 0.5 * (a + b);
        let (first, full) = weights(a, b, mid);
        for p in 0..len {
            let mut v = Complex64::default();
            for (k, wk) in full.iter().enumerate() {
                v += wk * g[first + k][p];
            }
            let s = start[p];
            if s <= a {
                for (k, wk) in full.iter().enumerate() {
                    v -= wk * xb[first + k][p];
                }
            } else if s < b {
                let (_, part) = weights(s, b, mid);
                for (k, wk) in part.iter().enumerate() {
                    v -= wk * xb[first + k][p];
                }
            }
            acc[p] += v;
        }
        out.push(fft::inverse_real(&acc, grid.n()));
    }
    out
}

/// `R_1(W, S, 0) = t^{-2} Q(S + B_*, W) - i (2t^2)^{-1}(2 B_* . S + B_*^2) W + i t^{-1} (x . B_*)_S W`.
pub fn profile_r1(st: &AsymptoticState, table: &ProfileTable, t: f64) -> Result<ScalarField> {
    let grid = st.grid();
    let w = build_w(st, t)?;
    let s = table.s_at(t)?;
    let b = table.bstar_at(t)?;
    let mut r1 = transport(&s.add(&b), &w).scale((1.0 / (t * t)).into());
    let bs = b.dot(&s);
    let bb = b.norm_sqr();
    let (short, _) = split_at(&ScalarField::from_real(grid, &b.x_dot()), t.powf(st.beta));
    for p in 0..grid.len() {
        let v = -(2.0 * bs[p] + bb[p]) / (2.0 * t * t) + short.values[p].re / t;
        r1.values[p] += Complex64::new(0.0, v) * w.values[p];
    }
    Ok(r1)
}

/// `R_2(W, S) = t^{-2} (S . grad) S`.
pub fn profile_r2(table: &ProfileTable, t: f64) -> Result<VectorField> {
    let s = table.s_at(t)?;
    Ok(advect(&s, &s).scale(1.0 / (t * t)))
}

/// `R_3(W, S, 0) = t^{-1} F_1(M_b(W, S, B_*))`; the table must reach `t n/2`
/// and the zero-mode reach of `quad`.
pub fn profile_r3(
    table: &ProfileTable,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<VectorField> {
    Ok(projected_fj(&table.mb, 1, t, quad)?.scale(1.0 / t))
}

/// Remainders `(R_1, R_2, R_3)` of the profile pair with `B_b = 0`.
pub fn compute_remainders(
    st: &AsymptoticState,
    table: &ProfileTable,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<(ScalarField, VectorField, VectorField)> {
    Ok((
        profile_r1(st, table, t)?,
        profile_r2(table, t)?,
        profile_r3(table, t, quad)?,
    ))
}

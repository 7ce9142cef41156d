//! Interaction quantities: Hartree potential, currents, the time kernels `I_m`
//! and `F_j`, the fields `B_a` and `B_b`, and the short/long splitting.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::ops::{gradient_complex, leray_project_spectra};
use crate::spectral::resample::{axis_map, scatter, separable_apply_real};
use crate::spectral::{fft, split_at, ScalarField, SpectralGrid, VectorField};
use crate::timegrid::{gauss_legendre, gauss_on, lagrange_stencil};

/// `g(w1, w2) = (-Delta)^{-1} Re(conj(w1) w2)` with the mean removed.
pub fn hartree_g(w1: &ScalarField, w2: &ScalarField) -> Result<ScalarField> {
    w1.grid.check_compatible(&w2.grid)?;
    let rho: Vec<f64> = w1
        .values
        .iter()
        .zip(&w2.values)
        .map(|(a, b)| (a.conj() * b).re)
        .collect();
    Ok(hartree_of_density(w1.grid, &rho))
}

/// `(-Delta)^{-1} rho` with the mean removed, as a real-valued scalar field.
pub fn hartree_of_density(grid: SpectralGrid, rho: &[f64]) -> ScalarField {
    let mut s = fft::forward_real(rho, grid.n());
    let xi2 = grid.xi_squared();
    for (v, &r2) in s.iter_mut().zip(&xi2) {
        *v = if r2 == 0.0 {
            Complex64::default()
        } else {
            *v / r2
        };
    }
    ScalarField::from_real(grid, &fft::inverse_real(&s, grid.n()))
}

/// `M_a(w1, w2) = x Re(conj(w1) w2)` in the centered chart.
pub fn current_ma(w1: &ScalarField, w2: &ScalarField) -> Result<VectorField> {
    w1.grid.check_compatible(&w2.grid)?;
    let rho: Vec<f64> = w1
        .values
        .iter()
        .zip(&w2.values)
        .map(|(a, b)| (a.conj() * b).re)
        .collect();
    Ok(first_moment(w1.grid, &rho))
}

/// `x rho` in the centered chart.
pub fn first_moment(grid: SpectralGrid, rho: &[f64]) -> VectorField {
    let mut out = VectorField::zeros(grid);
    for d in 0..3 {
        let x = grid.coordinate(d);
        for p in 0..grid.len() {
            out.comps[d][p] = x[p] * rho[p];
        }
    }
    out
}

/// Fraction of `|w|^2` carried by the outermost grid shell.
pub fn boundary_mass(w: &ScalarField) -> f64 {
    let g = w.grid;
    let n = g.n();
    let total: f64 = w.values.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let edge = |i: usize| i == 0 || i == n - 1;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if edge(i) || edge(j) || edge(k) {
                    acc += w.values[g.index(i, j, k)].norm_sqr();
                }
            }
        }
    }
    acc / total
}

/// `M_b(w, s, B) = Im(conj(w) grad w) - (s + B) |w|^2`.
pub fn current_mb(w: &ScalarField, s: &VectorField, b: &VectorField) -> Result<VectorField> {
    w.grid.check_compatible(&s.grid)?;
    w.grid.check_compatible(&b.grid)?;
    let grad = gradient_complex(w);
    let mut out = VectorField::zeros(w.grid);
    for d in 0..3 {
        for p in 0..w.grid.len() {
            let wp = w.values[p];
            out.comps[d][p] = (wp.conj() * grad[d].values[p]).im
                - (s.comps[d][p] + b.comps[d][p]) * wp.norm_sqr();
        }
    }
    Ok(out)
}

/// Panel layout for the `nu` integrals `int_1^inf ... d nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeKernelQuadrature {
    /// Gauss-Legendre points per panel (in `ln nu`).
    pub points_per_panel: usize,
    /// Panel ratio where no interpolation breakpoints are supplied.
    pub panel_ratio: f64,
    /// Panel ratio for the zero-mode-only range beyond the band edge.
    pub far_panel_ratio: f64,
    /// `nu` up to which the zero mode is sampled before the analytic tail.
    pub far_extent: f64,
    /// Power decay of the integrand assumed beyond the last sample.
    pub tail_exponent: f64,
}

impl Default for TimeKernelQuadrature {
    fn default() -> Self {
        Self {
            points_per_panel: 4,
            panel_ratio: 1.2,
            far_panel_ratio: 10f64.powf(0.125),
            far_extent: 256.0,
            tail_exponent: 0.0,
        }
    }
}

/// One quadrature node in `nu`; `weight` already includes `d nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuNode {
    pub nu: f64,
    pub weight: f64,
    /// False for nodes that only feed the zero mode.
    pub full: bool,
}

impl TimeKernelQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_panel == 0
            || self.panel_ratio <= 1.0
            || self.far_panel_ratio <= 1.0
            || self.far_extent < 1.0
        {
            return Err(Error::InvalidParameter(format!(
                "bad kernel quadrature {self:?}"
            )));
        }
        Ok(())
    }

    /// Panel edges in `nu` on `[1, nu_end]`: breakpoints `b / t` first, then
    /// geometric panels of `ratio`.
    pub fn panel_edges(&self, t: f64, breakpoints: &[f64], nu_end: f64, ratio: f64) -> Vec<f64> {
        let mut edges = vec![1.0];
        for &b in breakpoints {
            let nu = b / t;
            if nu > 1.0 + 1e-12 && nu < nu_end - 1e-12 {
                // split long gaps so that no panel exceeds the ratio
                let prev = *edges.last().unwrap();
                let pieces = ((nu / prev).ln() / ratio.ln()).ceil().max(1.0) as usize;
                for k in 1..=pieces {
                    edges.push(prev * (nu / prev).powf(k as f64 / pieces as f64));
                }
            }
        }
        let prev = *edges.last().unwrap();
        if nu_end > prev * (1.0 + 1e-12) {
            let pieces = ((nu_end / prev).ln() / ratio.ln()).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                edges.push(prev * (nu_end / prev).powf(k as f64 / pieces as f64));
            }
        }
        edges
    }

    /// Nodes for an output time `t`. Every lattice mode other than zero leaves
    /// the band once `nu >= n/2`, so full nodes stop at `band_edge`.
    pub fn nodes(&self, t: f64, breakpoints: &[f64], band_edge: f64) -> Vec<NuNode> {
        let rule = gauss_legendre(self.points_per_panel);
        let mut out = Vec::new();
        // lattice modes leave the band at nu = band_edge / m
        let mut breaks: Vec<f64> = breakpoints.to_vec();
        let mmax = band_edge.floor() as usize;
        breaks.extend((1..=mmax).map(|m| t * band_edge / m as f64));
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-12);
        let edges = self.panel_edges(t, &breaks, band_edge, self.panel_ratio);
        for pair in edges.windows(2) {
            for (tau, w) in gauss_on(pair[0].ln(), pair[1].ln(), &rule) {
                let nu = tau.exp();
                out.push(NuNode {
                    nu,
                    weight: w * nu,
                    full: true,
                });
            }
        }
        if self.far_extent > band_edge {
            let far = self.panel_edges(1.0, &[], self.far_extent / band_edge, self.far_panel_ratio);
            for pair in far.windows(2) {
                for (tau, w) in gauss_on(
                    (band_edge * pair[0]).ln(),
                    (band_edge * pair[1]).ln(),
                    &rule,
                ) {
                    let nu = tau.exp();
                    out.push(NuNode {
                        nu,
                        weight: w * nu,
                        full: false,
                    });
                }
            }
        }
        out
    }

    /// `int_a^inf (nu - 1) nu^{-3-j} (nu / a)^{-p} d nu`.
    pub fn zero_mode_tail(&self, a: f64, j: u32) -> f64 {
        let j = j as f64;
        let p = self.tail_exponent;
        a.powf(-1.0 - j) / (1.0 + j + p) - a.powf(-2.0 - j) / (2.0 + j + p)
    }
}

/// Scalar time series on sorted nodes, extended beyond the last node by a
/// power law `f(t) = f_last (t / t_last)^{-p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScalarSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() || times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParameter(
                "series needs increasing times and matching values".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn eval(&self, t: f64, tail_exponent: f64) -> f64 {
        let last = *self.times.last().unwrap();
        if t > last {
            return self.values.last().unwrap() * (t / last).powf(-tail_exponent);
        }
        let (first, w) = lagrange_stencil(&self.times, t);
        w.iter()
            .enumerate()
            .map(|(k, wk)| wk * self.values[first + k])
            .sum()
    }
}

/// `I_m f (t) = int_1^inf nu^{-m-3/2} f(nu t) d nu`, integrated in `nu` on
/// panels aligned with the series nodes, plus the analytic power-law tail.
pub fn apply_im(f: &ScalarSeries, m: f64, t: f64, quad: &TimeKernelQuadrature) -> Result<f64> {
    let lo = f.times[0];
    let hi = *f.times.last().unwrap();
    if t > hi || t < lo {
        return Err(Error::Coverage { t, lo, hi });
    }
    let rule = gauss_legendre(quad.points_per_panel);
    let nu_hi = hi / t;
    let edges = quad.panel_edges(t, &f.times, nu_hi, quad.panel_ratio);
    let mut acc = 0.0;
    for pair in edges.windows(2) {
        for (tau, w) in gauss_on(pair[0].ln(), pair[1].ln(), &rule) {
            let nu = tau.exp();
            acc += w * nu * nu.powf(-m - 1.5) * f.eval(nu * t, quad.tail_exponent);
        }
    }
    let p = quad.tail_exponent;
    acc += f.values.last().unwrap() * nu_hi.powf(-m - 0.5) / (m + p + 0.5);
    Ok(acc)
}

/// The equivalent form `t^{m+1/2} int_t^inf s^{-m-3/2} f(s) ds`, integrated in `s`.
pub fn apply_im_direct(
    f: &ScalarSeries,
    m: f64,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<f64> {
    let lo = f.times[0];
    let hi = *f.times.last().unwrap();
    if t > hi || t < lo {
        return Err(Error::Coverage { t, lo, hi });
    }
    let rule = gauss_legendre(quad.points_per_panel);
    let mut cuts = vec![t];
    cuts.extend(f.times.iter().copied().filter(|&s| s > t));
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        for (s, w) in gauss_on(pair[0], pair[1], &rule) {
            acc += w * s.powf(-m - 1.5) * f.eval(s, quad.tail_exponent);
        }
    }
    let p = quad.tail_exponent;
    acc += f.values.last().unwrap() * hi.powf(-m - 0.5) / (m + p + 0.5);
    Ok(t.powf(m + 0.5) * acc)
}

/// A time history of a real vector field `M(t)` feeding the `F_j` kernels.
pub trait MomentSource {
    fn grid(&self) -> SpectralGrid;
    fn moment(&self, t: f64) -> Result<VectorField>;
    fn mean(&self, t: f64) -> Result<[f64; 3]> {
        Ok(self.moment(t)?.mean())
    }
    /// Interpolation breakpoints; kernel panels are aligned with them.
    fn breakpoints(&self) -> &[f64] {
        &[]
    }
    /// Largest time the source can represent.
    fn horizon(&self) -> f64 {
        f64::INFINITY
    }
}

/// `M(t) = (t / t_ref)^{-p} m` for a fixed field `m`.
pub struct PowerLawMoment {
    pub field: VectorField,
    pub exponent: f64,
    pub t_ref: f64,
}

impl MomentSource for PowerLawMoment {
    fn grid(&self) -> SpectralGrid {
        self.field.grid
    }
    fn moment(&self, t: f64) -> Result<VectorField> {
        Ok(self.field.scale((t / self.t_ref).powf(-self.exponent)))
    }
}

/// Spectra of `F_j(M)(t) = int_1^inf omega^{-1} sin(omega (nu - 1)) nu^{-3-j} D_0(nu) M(nu t) d nu`.
///
/// `D_0(nu)` scales nonzero modes by `nu^3` and leaves the mean alone, so the
/// zero mode gets the multiplier `(nu - 1) nu^{-3-j}`.
pub fn apply_fj_spectra(
    src: &dyn MomentSource,
    j: u32,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<[Vec<Complex64>; 3]> {
    quad.validate()?;
    if j > 1 {
        return Err(Error::InvalidParameter(format!(
            "F_j needs j in {{0, 1}}, got {j}"
        )));
    }
    let grid = src.grid();
    let n = grid.n();
    let reach = t * quad.far_extent.max(n as f64 / 2.0);
    if src.horizon() < reach {
        return Err(Error::Coverage {
            t: reach,
            lo: t,
            hi: src.horizon(),
        });
    }
    let jf = j as f64;
    let band_edge = n as f64 / 2.0;
    let nodes = quad.nodes(t, src.breakpoints(), band_edge);
    let mut out = [
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
    ];
    let n3 = grid.len() as f64;
    for node in &nodes {
        let nu = node.nu;
        if !node.full {
            let m = src.mean(nu * t)?;
            let c = node.weight * (nu - 1.0) * nu.powf(-3.0 - jf) * n3;
            for d in 0..3 {
                out[d][0] += c * m[d];
            }
            continue;
        }
        let field = src.moment(nu * t)?;
        let map = axis_map(&grid, nu);
        let b = map.slots.len();
        // kernel weight per kept mode
        let k: Vec<f64> = map.slots.iter().map(|&s| grid.wavenumber(s)).collect();
        let mut kern = vec![0.0; b * b * b];
        let scale = nu.powf(-jf);
        for a in 0..b {
            for c in 0..b {
                for e in 0..b {
                    let r = (k[a] * k[a] + k[c] * k[c] + k[e] * k[e]).sqrt();
                    kern[(a * b + c) * b + e] = node.weight
                        * if r == 0.0 {
                            (nu - 1.0) * nu.powf(-3.0 - jf)
                        } else {
                            (r * (nu - 1.0)).sin() / r * scale
                        };
                }
            }
        }
        for d in 0..3 {
            let mut band = separable_apply_real(n, &field.comps[d], &map, &map, &map);
            for (v, w) in band.iter_mut().zip(&kern) {
                *v *= *w;
            }
            scatter(&grid, &band, &map.slots, 1.0, &mut out[d]);
        }
    }
    // analytic tail of the zero mode from the last panel edge
    let a = if quad.far_extent > band_edge {
        quad.far_extent
    } else {
        band_edge
    };
    let m = src.mean(a * t)?;
    let tail = quad.zero_mode_tail(a, j) * n3;
    for d in 0..3 {
        out[d][0] += tail * m[d];
    }
    Ok(out)
}

/// `F_j(M)(t)` as a field (no projection).
pub fn apply_fj(
    src: &dyn MomentSource,
    j: u32,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<VectorField> {
    let s = apply_fj_spectra(src, j, t, quad)?;
    Ok(VectorField::from_spectra(src.grid(), &s))
}

/// `P F_j(M)(t)`, flagged divergence free.
pub fn projected_fj(
    src: &dyn MomentSource,
    j: u32,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<VectorField> {
    let mut s = apply_fj_spectra(src, j, t, quad)?;
    leray_project_spectra(&src.grid(), &mut s);
    let mut out = VectorField::from_spectra(src.grid(), &s);
    out.div_free = true;
    Ok(out)
}

/// A time history of an amplitude `w(t)`.
pub trait AmplitudeHistory {
    fn grid(&self) -> SpectralGrid;
    fn amplitude(&self, t: f64) -> Result<ScalarField>;
    fn breakpoints(&self) -> &[f64] {
        &[]
    }
}

/// `M_a(w1, w2)(t)` from two amplitude histories.
pub struct PairMoment<'a> {
    pub w1: &'a dyn AmplitudeHistory,
    pub w2: &'a dyn AmplitudeHistory,
}

impl MomentSource for PairMoment<'_> {
    fn grid(&self) -> SpectralGrid {
        self.w1.grid()
    }
    fn moment(&self, t: f64) -> Result<VectorField> {
        current_ma(&self.w1.amplitude(t)?, &self.w2.amplitude(t)?)
    }
    fn breakpoints(&self) -> &[f64] {
        let a = self.w1.breakpoints();
        if a.is_empty() {
            self.w2.breakpoints()
        } else {
            a
        }
    }
}

/// `B_a(w1, w2)(t) = P F_0(M_a(w1, w2))(t)`.
pub fn compute_ba(
    w1: &dyn AmplitudeHistory,
    w2: &dyn AmplitudeHistory,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<VectorField> {
    w1.grid().check_compatible(&w2.grid())?;
    projected_fj(&PairMoment { w1, w2 }, 0, t, quad)
}

/// `B_b(t) = t^{-1} P F_1(M_b)(t)` for a supplied `M_b` history.
pub fn compute_bb(
    mb: &dyn MomentSource,
    t: f64,
    quad: &TimeKernelQuadrature,
) -> Result<VectorField> {
    Ok(projected_fj(mb, 1, t, quad)?.scale(1.0 / t))
}

/// Cutoff `t^beta` separating short (`|xi| > t^beta`) from long range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub beta: f64,
    pub t: f64,
}

impl SplitSpec {
    pub fn cutoff(&self) -> f64 {
        self.t.powf(self.beta)
    }
}

/// Returns `(short, long)`.
pub fn split_short_long(f: &ScalarField, spec: SplitSpec) -> (ScalarField, ScalarField) {
    split_at(f, spec.cutoff())
}

/// Transport term `Q(a, v) = a . grad v + (1/2)(div a) v`.
pub fn transport(a: &VectorField, v: &ScalarField) -> ScalarField {
    let div = crate::spectral::divergence(a);
    transport_with_divergence(a, &div, v)
}

/// [`transport`] with a precomputed `div a`.
pub fn transport_with_divergence(a: &VectorField, div: &[f64], v: &ScalarField) -> ScalarField {
    let grad = gradient_complex(v);
    let mut out = ScalarField::zeros(v.grid);
    for p in 0..v.grid.len() {
        let mut acc = 0.5 * div[p] * v.values[p];
        for (d, g) in grad.iter().enumerate() {
            acc += a.comps[d][p] * g.values[p];
        }
        out.values[p] = acc;
    }
    out
}

/// Skew form `(a . grad v + div(a v)) / 2` of [`transport`]: equal in the
/// continuum, and exactly anti-Hermitian on the grid for real `a`.
pub fn transport_skew(a: &VectorField, v: &ScalarField) -> ScalarField {
    let grad = gradient_complex(v);
    let flux = [0, 1, 2].map(|d| v.mul_real(&a.comps[d]));
    let div = crate::spectral::divergence_complex(&flux);
    let mut out = div;
    for p in 0..v.grid.len() {
        let mut acc = out.values[p];
        for (d, g) in grad.iter().enumerate() {
            acc += a.comps[d][p] * g.values[p];
        }
        out.values[p] = 0.5 * acc;
    }
    out
}

/// `(s . grad) f` componentwise.
pub fn advect(s: &VectorField, f: &VectorField) -> VectorField {
    let mut out = VectorField::zeros(f.grid);
    for c in 0..3 {
        let g = crate::spectral::gradient_of_real(f.grid, &f.comps[c]);
        for p in 0..f.grid.len() {
            out.comps[c][p] = (0..3).map(|d| s.comps[d][p] * g.comps[d][p]).sum();
        }
    }
    out
}

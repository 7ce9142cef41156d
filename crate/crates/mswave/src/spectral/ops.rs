//! Fourier multipliers, derivatives and norms.

use num_complex::Complex64;

use super::fft;
use super::field::{ScalarField, VectorField};
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Calls `f(p, [kx, ky, kz])` for each FFT slot in storage order.
pub fn for_each_mode(grid: &SpectralGrid, mut f: impl FnMut(usize, [f64; 3])) {
    let k = grid.wavenumbers();
    let mut p = 0;
    for &kx in &k {
        for &ky in &k {
            for &kz in &k {
                f(p, [kx, ky, kz]);
                p += 1;
            }
        }
    }
}

/// Wavenumbers with the Nyquist slot zeroed, for odd (first-order) derivatives.
fn odd_wavenumbers(grid: &SpectralGrid) -> Vec<f64> {
    let mut k = grid.wavenumbers();
    k[grid.n() / 2] = 0.0;
    k
}

/// Like [`for_each_mode`] with the derivative wavenumbers, so that projections
/// agree exactly with the spectral divergence and curl.
pub fn for_each_mode_odd(grid: &SpectralGrid, mut f: impl FnMut(usize, [f64; 3])) {
    let k = odd_wavenumbers(grid);
    let mut p = 0;
    for &kx in &k {
        for &ky in &k {
            for &kz in &k {
                f(p, [kx, ky, kz]);
                p += 1;
            }
        }
    }
}

pub fn apply_multiplier(f: &ScalarField, m: impl Fn([f64; 3]) -> Complex64) -> ScalarField {
    let mut s = f.spectrum();
    for_each_mode(&f.grid, |p, xi| s[p] *= m(xi));
    ScalarField::from_spectrum(f.grid, s)
}

/// `omega^s f`: multiplies the coefficient at `xi` by `|xi|^s`; the mean is
/// removed unless `s == 0`.
pub fn omega_pow(f: &ScalarField, s: f64) -> Result<ScalarField> {
    f.check_finite()?;
    if s == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_multiplier(f, |xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if r2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(r2.powf(0.5 * s), 0.0)
        }
    }))
}

/// `Delta^{-1} f` with the mean removed.
pub fn inverse_laplacian(f: &ScalarField) -> Result<ScalarField> {
    f.check_finite()?;
    Ok(apply_multiplier(f, |xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if r2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(-1.0 / r2, 0.0)
        }
    }))
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    apply_multiplier(f, |xi| {
        Complex64::new(-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]), 0.0)
    })
}

pub fn laplacian_spectrum(grid: &SpectralGrid, s: &mut [Complex64]) {
    for_each_mode(grid, |p, xi| {
        s[p] *= -(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])
    });
}

/// `U(t) f`: multiplies the coefficient at `xi` by `exp(-i t |xi|^2 / 2)`.
pub fn free_propagator(f: &ScalarField, t: f64) -> ScalarField {
    if t == 0.0 {
        return f.clone();
    }
    apply_multiplier(f, |xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        Complex64::from_polar(1.0, -0.5 * t * r2)
    })
}

pub fn free_propagator_spectrum(grid: &SpectralGrid, s: &mut [Complex64], t: f64) {
    if t == 0.0 {
        return;
    }
    for_each_mode(grid, |p, xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        s[p] *= Complex64::from_polar(1.0, -0.5 * t * r2);
    });
}

/// Spectra of `d_x f, d_y f, d_z f` given the spectrum of `f`.
pub fn gradient_spectra(grid: &SpectralGrid, s: &[Complex64]) -> [Vec<Complex64>; 3] {
    let k = odd_wavenumbers(grid);
    let n = grid.n();
    let mut out = [s.to_vec(), s.to_vec(), s.to_vec()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let p = grid.index(i, j, l);
                out[0][p] *= I * k[i];
                out[1][p] *= I * k[j];
                out[2][p] *= I * k[l];
            }
        }
    }
    out
}

/// Spectral gradient of a complex scalar.
pub fn gradient_complex(f: &ScalarField) -> [ScalarField; 3] {
    let s = f.spectrum();
    gradient_spectra(&f.grid, &s).map(|g| ScalarField::from_spectrum(f.grid, g))
}

/// Spectral gradient of the real part of `f`.
pub fn gradient_real(f: &ScalarField) -> VectorField {
    let s = fft::hermitian_part(&f.spectrum(), f.grid.n());
    VectorField::from_spectra(f.grid, &gradient_spectra(&f.grid, &s))
}

pub fn gradient_of_real(grid: SpectralGrid, f: &[f64]) -> VectorField {
    let s = fft::forward_real(f, grid.n());
    VectorField::from_spectra(grid, &gradient_spectra(&grid, &s))
}

pub fn divergence(v: &VectorField) -> Vec<f64> {
    let g = v.grid;
    let k = odd_wavenumbers(&g);
    let s = v.spectra();
    let n = g.n();
    let mut d = vec![Complex64::default(); g.len()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let p = g.index(i, j, l);
                d[p] = I * (k[i] * s[0][p] + k[j] * s[1][p] + k[l] * s[2][p]);
            }
        }
    }
    fft::inverse_real(&d, n)
}

/// Spectral divergence of a complex vector given by its components.
pub fn divergence_complex(v: &[ScalarField; 3]) -> ScalarField {
    let g = v[0].grid;
    let k = odd_wavenumbers(&g);
    let s = [v[0].spectrum(), v[1].spectrum(), v[2].spectrum()];
    let n = g.n();
    let mut d = vec![Complex64::default(); g.len()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let p = g.index(i, j, l);
                d[p] = I * (k[i] * s[0][p] + k[j] * s[1][p] + k[l] * s[2][p]);
            }
        }
    }
    ScalarField::from_spectrum(g, d)
}

pub fn curl(v: &VectorField) -> VectorField {
    let g = v.grid;
    let k = odd_wavenumbers(&g);
    let s = v.spectra();
    let n = g.n();
    let mut c = [
        vec![Complex64::default(); g.len()],
        vec![Complex64::default(); g.len()],
        vec![Complex64::default(); g.len()],
    ];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let p = g.index(i, j, l);
                let kk = [k[i], k[j], k[l]];
                c[0][p] = I * (kk[1] * s[2][p] - kk[2] * s[1][p]);
                c[1][p] = I * (kk[2] * s[0][p] - kk[0] * s[2][p]);
                c[2][p] = I * (kk[0] * s[1][p] - kk[1] * s[0][p]);
            }
        }
    }
    VectorField::from_spectra(g, &c)
}

/// Max pointwise `|div v|`.
pub fn max_divergence(v: &VectorField) -> f64 {
    divergence(v).iter().fold(0.0, |m, d| m.max(d.abs()))
}

/// Max pointwise `|curl v|`.
pub fn max_curl(v: &VectorField) -> f64 {
    curl(v).max_abs()
}

/// Applies the 3x3 real symmetric multiplier `m(xi)` to the spectra of `v`.
fn project(v: &VectorField, m: impl Fn([f64; 3], usize, usize) -> f64) -> VectorField {
    let g = v.grid;
    let s = v.spectra();
    let mut out = s.clone();
    for_each_mode_odd(&g, |p, xi| {
        for a in 0..3 {
            out[a][p] = (0..3).map(|b| s[b][p] * m(xi, a, b)).sum();
        }
    });
    VectorField::from_spectra(g, &out)
}

/// Leray projection `1 - xi xi^T / |xi|^2`; the mean passes through.
pub fn leray_project(v: &VectorField) -> VectorField {
    let mut out = project(v, |xi, a, b| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let delta = if a == b { 1.0 } else { 0.0 };
        if r2 == 0.0 {
            delta
        } else {
            delta - xi[a] * xi[b] / r2
        }
    });
    out.div_free = true;
    out
}

pub fn leray_project_spectra(grid: &SpectralGrid, s: &mut [Vec<Complex64>; 3]) {
    for_each_mode_odd(grid, |p, xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if r2 == 0.0 {
            return;
        }
        let dot = (xi[0] * s[0][p] + xi[1] * s[1][p] + xi[2] * s[2][p]) / r2;
        for a in 0..3 {
            s[a][p] -= dot * xi[a];
        }
    });
}

/// Gradient part `xi xi^T / |xi|^2`; the mean is removed.
pub fn gradient_part(v: &VectorField) -> VectorField {
    project(v, |xi, a, b| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if r2 == 0.0 {
            0.0
        } else {
            xi[a] * xi[b] / r2
        }
    })
}

/// Sharp split of `f` at `|xi| = cutoff`: returns `(short, long)` with
/// `|xi| > cutoff` in the short part.
pub fn split_at(f: &ScalarField, cutoff: f64) -> (ScalarField, ScalarField) {
    let s = f.spectrum();
    let mut short = s.clone();
    let mut long = s;
    let c2 = cutoff * cutoff;
    for_each_mode(&f.grid, |p, xi| {
        if xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] > c2 {
            long[p] = Complex64::default();
        } else {
            short[p] = Complex64::default();
        }
    });
    (
        ScalarField::from_spectrum(f.grid, short),
        ScalarField::from_spectrum(f.grid, long),
    )
}

/// Norm selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    /// Inhomogeneous Sobolev, weight `(1 + |xi|^2)^{k/2}`.
    H(f64),
    /// Homogeneous Sobolev, weight `|xi|^k`; the mean is dropped for `k != 0`.
    HDot(f64),
    /// `max(Hdot^1, Hdot^k)`.
    K(f64),
    /// Grid quadrature `L^r`; `f64::INFINITY` gives the grid max.
    L(f64),
}

fn weight(spec: NormSpec, r2: f64) -> f64 {
    match spec {
        NormSpec::H(k) => (1.0 + r2).powf(k),
        NormSpec::HDot(k) => {
            if k == 0.0 {
                1.0
            } else if r2 == 0.0 {
                0.0
            } else {
                r2.powf(k)
            }
        }
        _ => unreachable!(),
    }
}

/// Sobolev norm from an unnormalized spectrum: `(L^3 sum w(xi)^2 |c|^2)^{1/2}` with `c = s / n^3`.
pub fn sobolev_from_spectrum(grid: &SpectralGrid, s: &[Complex64], spec: NormSpec) -> f64 {
    match spec {
        NormSpec::K(k) => sobolev_from_spectrum(grid, s, NormSpec::HDot(1.0))
            .max(sobolev_from_spectrum(grid, s, NormSpec::HDot(k))),
        NormSpec::L(_) => panic!("L^r norms need samples"),
        _ => {
            let mut acc = 0.0;
            for_each_mode(grid, |p, xi| {
                let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                acc += weight(spec, r2) * s[p].norm_sqr();
            });
            let n3 = grid.len() as f64;
            (grid.volume() * acc / (n3 * n3)).sqrt()
        }
    }
}

fn lr(grid: &SpectralGrid, abs: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        abs.fold(0.0, f64::max)
    } else {
        (grid.cell_volume() * abs.map(|a| a.powf(r)).sum::<f64>()).powf(1.0 / r)
    }
}

pub fn norm_spectrum(grid: &SpectralGrid, s: &[Complex64], spec: NormSpec) -> f64 {
    match spec {
        NormSpec::K(k) => norm_spectrum(grid, s, NormSpec::HDot(1.0)).max(norm_spectrum(
            grid,
            s,
            NormSpec::HDot(k),
        )),
        _ => sobolev_from_spectrum(grid, s, spec),
    }
}

pub fn norm(f: &ScalarField, spec: NormSpec) -> f64 {
    match spec {
        NormSpec::L(r) => lr(&f.grid, f.values.iter().map(|v| v.norm()), r),
        _ => norm_spectrum(&f.grid, &f.spectrum(), spec),
    }
}

pub fn norm_vector(v: &VectorField, spec: NormSpec) -> f64 {
    match spec {
        NormSpec::L(r) => {
            let m = v.norm_sqr();
            lr(&v.grid, m.iter().map(|x| x.sqrt()), r)
        }
        NormSpec::K(k) => {
            norm_vector(v, NormSpec::HDot(1.0)).max(norm_vector(v, NormSpec::HDot(k)))
        }
        _ => {
            let s = v.spectra();
            s.iter()
                .map(|c| norm_spectrum(&v.grid, c, spec).powi(2))
                .sum::<f64>()
                .sqrt()
        }
    }
}

/// Rejects non-finite specs up front.
pub fn check_norm_spec(spec: NormSpec) -> Result<()> {
    let ok = match spec {
        NormSpec::H(k) | NormSpec::HDot(k) | NormSpec::K(k) => k.is_finite(),
        NormSpec::L(r) => r >= 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("bad norm {spec:?}")))
    }
}

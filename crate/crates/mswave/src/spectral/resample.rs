//! Dilations by band-limited Fourier resampling and the `M D F M` pieces.
//!
//! A dilation `f(x) -> f(x / nu)` about the chart origin maps the Fourier
//! coefficient function `c(xi)` to `nu^3 c(nu xi)`. On the grid `c(nu xi)` is
//! the centered DTFT of the samples, evaluated separably per axis; lattice
//! points whose image leaves the band are dropped.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft;
use super::field::ScalarField;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// Relative spectral or spatial mass a dilation may lose before it is rejected.
pub const ALIASING_LIMIT: f64 = 1e-10;

/// One axis of a separable resampling: kept FFT slots and the matrix rows.
#[derive(Debug, Clone)]
pub struct AxisMap {
    pub slots: Vec<usize>,
    /// Row-major `slots.len() x n`.
    pub matrix: Vec<Complex64>,
}

fn is_unit(nu: f64) -> bool {
    (nu - 1.0).abs() < 1e-14
}

/// Slots `i` whose image `nu * m(i)` stays strictly inside the band. At
/// `nu = 1` every slot is kept.
pub fn band_slots(grid: &SpectralGrid, nu: f64) -> Vec<usize> {
    let n = grid.n();
    if is_unit(nu) {
        return (0..n).collect();
    }
    let half = n as f64 / 2.0;
    (0..n)
        .filter(|&i| nu * (grid.mode(i) as f64).abs() < half - 1e-9)
        .collect()
}

/// Matrix `E[m][j] = exp(-i xi_m (L/2 + nu x_j))`; at `nu = 1` this is the DFT.
pub fn axis_map(grid: &SpectralGrid, nu: f64) -> AxisMap {
    let n = grid.n();
    let slots = band_slots(grid, nu);
    let half = 0.5 * grid.length();
    let mut matrix = Vec::with_capacity(slots.len() * n);
    for &s in &slots {
        let xi = grid.wavenumber(s);
        for j in 0..n {
            matrix.push(Complex64::from_polar(
                1.0,
                -xi * (half + nu * grid.coord(j)),
            ));
        }
    }
    AxisMap { slots, matrix }
}

/// Applies three axis maps to complex samples; the result is in compact band
/// layout `[bx][by][bz]`.
pub fn separable_apply(
    n: usize,
    data: &[Complex64],
    mx: &AxisMap,
    my: &AxisMap,
    mz: &AxisMap,
) -> Vec<Complex64> {
    let (bx, by, bz) = (mx.slots.len(), my.slots.len(), mz.slots.len());
    let mut t1 = vec![Complex64::default(); n * n * bz];
    for line in 0..n * n {
        let src = &data[line * n..line * n + n];
        let dst = &mut t1[line * bz..line * bz + bz];
        for (b, d) in dst.iter_mut().enumerate() {
            let row = &mz.matrix[b * n..b * n + n];
            *d = src.iter().zip(row).map(|(a, e)| a * e).sum();
        }
    }
    let mut t2 = vec![Complex64::default(); n * by * bz];
    for i in 0..n {
        for b in 0..by {
            let row = &my.matrix[b * n..b * n + n];
            let dst = &mut t2[(i * by + b) * bz..(i * by + b) * bz + bz];
            for (j, e) in row.iter().enumerate() {
                let src = &t1[(i * n + j) * bz..(i * n + j) * bz + bz];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * e;
                }
            }
        }
    }
    let mut out = vec![Complex64::default(); bx * by * bz];
    for b in 0..bx {
        let row = &mx.matrix[b * n..b * n + n];
        let dst = &mut out[b * by * bz..(b + 1) * by * bz];
        for (i, e) in row.iter().enumerate() {
            let src = &t2[i * by * bz..(i + 1) * by * bz];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * e;
            }
        }
    }
    out
}

/// Real-input variant of [`separable_apply`].
pub fn separable_apply_real(
    n: usize,
    data: &[f64],
    mx: &AxisMap,
    my: &AxisMap,
    mz: &AxisMap,
) -> Vec<Complex64> {
    let (bx, by, bz) = (mx.slots.len(), my.slots.len(), mz.slots.len());
    let mut t1 = vec![Complex64::default(); n * n * bz];
    for line in 0..n * n {
        let src = &data[line * n..line * n + n];
        let dst = &mut t1[line * bz..line * bz + bz];
        for (b, d) in dst.iter_mut().enumerate() {
            let row = &mz.matrix[b * n..b * n + n];
            let (mut re, mut im) = (0.0, 0.0);
            for (a, e) in src.iter().zip(row) {
                re += a * e.re;
                im += a * e.im;
            }
            *d = Complex64::new(re, im);
        }
    }
    let mut t2 = vec![Complex64::default(); n * by * bz];
    for i in 0..n {
        for b in 0..by {
            let row = &my.matrix[b * n..b * n + n];
            let dst = &mut t2[(i * by + b) * bz..(i * by + b) * bz + bz];
            for (j, e) in row.iter().enumerate() {
                let src = &t1[(i * n + j) * bz..(i * n + j) * bz + bz];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * e;
                }
            }
        }
    }
    let mut out = vec![Complex64::default(); bx * by * bz];
    for b in 0..bx {
        let row = &mx.matrix[b * n..b * n + n];
        let dst = &mut out[b * by * bz..(b + 1) * by * bz];
        for (i, e) in row.iter().enumerate() {
            let src = &t2[i * by * bz..(i + 1) * by * bz];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * e;
            }
        }
    }
    out
}

/// Scatters a compact band result into a full FFT-layout spectrum.
pub fn scatter(
    grid: &SpectralGrid,
    band: &[Complex64],
    slots: &[usize],
    scale: f64,
    out: &mut [Complex64],
) {
    let b = slots.len();
    for (a, &sx) in slots.iter().enumerate() {
        for (c, &sy) in slots.iter().enumerate() {
            for (d, &sz) in slots.iter().enumerate() {
                out[grid.index(sx, sy, sz)] += band[(a * b + c) * b + d] * scale;
            }
        }
    }
}

/// Unnormalized spectrum of `g(x) = f(x / nu)` without the `nu^3` factor:
/// entry `m` is `sum_j f_j exp(-i xi_m (L/2 + nu x_j))`.
pub fn dilation_spectrum_raw(f: &ScalarField, nu: f64) -> Vec<Complex64> {
    let grid = f.grid;
    if is_unit(nu) {
        return f.spectrum();
    }
    let map = axis_map(&grid, nu);
    let band = separable_apply(grid.n(), &f.values, &map, &map, &map);
    let mut out = vec![Complex64::default(); grid.len()];
    scatter(&grid, &band, &map.slots, 1.0, &mut out);
    out
}

/// Fraction of mass lost by dilating `f` by `nu` on its own grid.
pub fn dilation_loss(f: &ScalarField, nu: f64) -> f64 {
    let grid = f.grid;
    let total: f64 = f.values.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 || is_unit(nu) {
        return 0.0;
    }
    let n = grid.n();
    if nu > 1.0 {
        // stretched copies wrap around the box
        let lim = 0.5 * grid.length() / nu;
        let x = grid.coords();
        let mut outside = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if x[i].abs() > lim || x[j].abs() > lim || x[k].abs() > lim {
                        outside += f.values[grid.index(i, j, k)].norm_sqr();
                    }
                }
            }
        }
        outside / total
    } else {
        let s = f.spectrum();
        let lim = nu * grid.nyquist();
        let k = grid.wavenumbers();
        let mut outside = 0.0;
        let mut all = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v = s[grid.index(i, j, l)].norm_sqr();
                    all += v;
                    if k[i].abs() >= lim || k[j].abs() >= lim || k[l].abs() >= lim {
                        outside += v;
                    }
                }
            }
        }
        outside / all
    }
}

/// `D_0(nu) f (x) = f(x / nu)` on the same grid.
pub fn dilate(f: &ScalarField, nu: f64) -> Result<ScalarField> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidParameter(format!("dilation ratio {nu}")));
    }
    f.check_finite()?;
    let fraction = dilation_loss(f, nu);
    if fraction > ALIASING_LIMIT {
        return Err(Error::Aliasing {
            nu,
            fraction,
            limit: ALIASING_LIMIT,
        });
    }
    let mut s = dilation_spectrum_raw(f, nu);
    let c = nu.powi(3);
    for v in s.iter_mut() {
        *v *= c;
    }
    Ok(ScalarField::from_spectrum(f.grid, s))
}

/// Principal branch of `(i t)^p`.
pub fn it_pow(t: f64, p: f64) -> Complex64 {
    let z = Complex64::new(0.0, t);
    Complex64::from_polar(z.norm().powf(p), z.arg() * p)
}

/// Multiplication by `exp(i |x|^2 / 2t)`.
pub fn chirp(f: &ScalarField, t: f64) -> ScalarField {
    let x2 = f.grid.x_squared();
    ScalarField {
        grid: f.grid,
        values: f
            .values
            .iter()
            .zip(&x2)
            .map(|(&v, &r)| v * Complex64::from_polar(1.0, 0.5 * r / t))
            .collect(),
    }
}

/// `D(t) F g`: the continuous Fourier transform of `g` (unitary
/// normalization) evaluated at `x / t`, times `(i t)^{-3/2}`.
fn dilated_fourier(g: &ScalarField, t: f64) -> Result<ScalarField> {
    let grid = g.grid;
    let n = grid.n();
    let nyq = grid.nyquist();
    // spectral content that lands outside the box is lost
    let s = g.spectrum();
    let lim = 0.5 * grid.length() / t;
    let k = grid.wavenumbers();
    let (mut all, mut lost) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let v = s[grid.index(i, j, l)].norm_sqr();
                all += v;
                if k[i].abs() > lim || k[j].abs() > lim || k[l].abs() > lim {
                    lost += v;
                }
            }
        }
    }
    if all > 0.0 && lost / all > ALIASING_LIMIT {
        return Err(Error::Aliasing {
            nu: t,
            fraction: lost / all,
            limit: ALIASING_LIMIT,
        });
    }
    let x = grid.coords();
    let mut matrix = Vec::with_capacity(n * n);
    for a in 0..n {
        let eta = x[a] / t;
        for j in 0..n {
            matrix.push(if eta.abs() <= nyq {
                Complex64::from_polar(1.0, -eta * x[j])
            } else {
                Complex64::default()
            });
        }
    }
    let map = AxisMap {
        slots: (0..n).collect(),
        matrix,
    };
    let mut values = separable_apply(n, &g.values, &map, &map, &map);
    let c = (2.0 * PI).powf(-1.5) * grid.cell_volume() * it_pow(t, -1.5);
    for v in values.iter_mut() {
        *v *= c;
    }
    Ok(ScalarField { grid, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    M,
    D,
    D0,
    Mdfm,
}

/// Applies one factor of `U(t) = M(t) D(t) F M(t)` on the grid of `f`.
pub fn mdfm_apply(f: &ScalarField, t: f64, piece: Piece) -> Result<ScalarField> {
    f.check_finite()?;
    if t == 0.0 {
        return Err(Error::InvalidParameter("t = 0".into()));
    }
    match piece {
        Piece::M => Ok(chirp(f, t)),
        Piece::D0 => dilate(f, t),
        Piece::D => Ok(dilate(f, t)?.scale(it_pow(t, -1.5))),
        Piece::Mdfm => Ok(chirp(&dilated_fourier(&chirp(f, t), t)?, t)),
    }
}

/// `|| <J(t)>^m f ||` style norms through `|| w(omega) D(t)^* M(t)^* f ||`.
pub fn galilei_norm(f: &ScalarField, t: f64, spec: super::ops::NormSpec) -> Result<f64> {
    let h = chirp(f, -t);
    let g = dilate(&h, 1.0 / t)?.scale(it_pow(t, 1.5));
    Ok(super::ops::norm_spectrum(
        &g.grid,
        &fft::forward(&g.values, g.grid.n()),
        spec,
    ))
}

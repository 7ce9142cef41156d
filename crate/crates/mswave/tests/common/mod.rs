#![allow(dead_code)]

use mswave::spectral::{ScalarField, SpectralGrid, VectorField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random complex field with modes `|m_a| <= mmax` only, built mode by mode.
pub fn random_band_limited(grid: SpectralGrid, seed: u64, mmax: i64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut s = vec![Complex64::default(); grid.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if grid.mode(i).abs() <= mmax
                    && grid.mode(j).abs() <= mmax
                    && grid.mode(k).abs() <= mmax
                {
                    s[grid.index(i, j, k)] =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
    }
    ScalarField::from_spectrum(grid, s)
}

pub fn random_real_band_limited(grid: SpectralGrid, seed: u64, mmax: i64) -> Vec<f64> {
    random_band_limited(grid, seed, mmax).re()
}

pub fn random_vector(grid: SpectralGrid, seed: u64, mmax: i64) -> VectorField {
    VectorField::new(
        grid,
        [0, 1, 2].map(|d| random_real_band_limited(grid, seed * 7 + d as u64, mmax)),
    )
    .unwrap()
}

pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn rel_diff_real(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn rel_diff_vec(a: &VectorField, b: &VectorField) -> f64 {
    let num: f64 = (0..3)
        .map(|d| {
            a.comps[d]
                .iter()
                .zip(&b.comps[d])
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
        })
        .sum();
    let den: f64 = (0..3)
        .map(|d| b.comps[d].iter().map(|y| y * y).sum::<f64>())
        .sum();
    (num / den).sqrt()
}

pub fn gaussian(grid: SpectralGrid, sigma: f64, center: [f64; 3]) -> ScalarField {
    ScalarField::from_fn(grid, |x, y, z| {
        let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2) + (z - center[2]).powi(2);
        Complex64::new((-0.5 * r2 / (sigma * sigma)).exp(), 0.0)
    })
}

/// Gaussian envelope (widths per axis) times a plane wave, scaled to the given L^2 norm.
pub fn wave_packet(grid: SpectralGrid, sigma: [f64; 3], kappa: [f64; 3], l2: f64) -> ScalarField {
    let f = ScalarField::from_fn(grid, |x, y, z| {
        let r2 = (x / sigma[0]).powi(2) + (y / sigma[1]).powi(2) + (z / sigma[2]).powi(2);
        Complex64::from_polar(
            (-0.5 * r2).exp(),
            kappa[0] * x + kappa[1] * y + kappa[2] * z,
        )
    });
    let s = l2 / f.l2();
    f.scale(Complex64::new(s, 0.0))
}

/// Least-squares slope of `ln(y / (ln t)^p)` against `ln t`.
pub fn log_slope(t: &[f64], y: &[f64], p: i32) -> f64 {
    let xs: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = t
        .iter()
        .zip(y)
        .map(|(t, y)| (y / t.ln().powi(p)).ln())
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

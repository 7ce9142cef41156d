//! Analytic families for `w_plus`.

use crate::config::{ConfigError, InitialState, RunConfig};
use crate::dump;
use mswave::spectral::{ScalarField, SpectralGrid};
use num_complex::Complex64;

pub fn gaussian(
    grid: SpectralGrid,
    amplitude: f64,
    width: [f64; 3],
    center: [f64; 3],
    k: [f64; 3],
) -> ScalarField {
    ScalarField::from_fn(grid, |x, y, z| {
        let d = [x - center[0], y - center[1], z - center[2]];
        let r2: f64 = (0..3).map(|a| (d[a] / width[a]).powi(2)).sum();
        Complex64::from_polar(
            amplitude * (-0.5 * r2).exp(),
            k[0] * x + k[1] * y + k[2] * z,
        )
    })
}

fn normalized(f: ScalarField, l2: Option<f64>) -> Result<ScalarField, ConfigError> {
    let Some(target) = l2 else { return Ok(f) };
    let norm = f.l2();
    if target == 0.0 {
        return Ok(f.scale(Complex64::default()));
    }
    if norm == 0.0 {
        return Err(ConfigError::Invalid(format!(
            "cannot rescale a vanishing w_plus to l2_norm {target}"
        )));
    }
    Ok(f.scale(Complex64::new(target / norm, 0.0)))
}

/// Evaluates the configured `w_plus` on the run grid.
pub fn build_w_plus(cfg: &RunConfig) -> Result<ScalarField, ConfigError> {
    let grid = SpectralGrid::new(cfg.grid.n, cfg.grid.length)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    match &cfg.initial_state {
        InitialState::Gaussian {
            amplitude,
            width,
            l2_norm,
        } => normalized(
            gaussian(grid, *amplitude, width.axes(), [0.0; 3], [0.0; 3]),
            *l2_norm,
        ),
        InitialState::GaussianPlaneWave {
            amplitude,
            width,
            wavevector,
            l2_norm,
        } => normalized(
            gaussian(grid, *amplitude, width.axes(), [0.0; 3], *wavevector),
            *l2_norm,
        ),
        InitialState::TwoGaussians {
            amplitudes,
            width,
            centers,
            l2_norm,
        } => {
            let a = gaussian(grid, amplitudes[0], [width[0]; 3], centers[0], [0.0; 3]);
            let b = gaussian(grid, amplitudes[1], [width[1]; 3], centers[1], [0.0; 3]);
            normalized(a.add(&b), *l2_norm)
        }
        InitialState::FieldDump { path } => {
            let f = dump::read_scalar(path).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if !f.grid.compatible(&grid) {
                return Err(ConfigError::Invalid(format!(
                    "field dump grid (n = {}, L = {}) differs from the run grid (n = {}, L = {})",
                    f.grid.n(),
                    f.grid.length(),
                    grid.n(),
                    grid.length()
                )));
            }
            Ok(f)
        }
    }
}

use num_complex::Complex64;

use super::fft;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// Complex samples on a grid. Also used for real scalars (phases, potentials)
/// with zero imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: SpectralGrid,
    pub values: Vec<Complex64>,
}

/// Three real components on a grid plus a divergence-free claim.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: SpectralGrid,
    pub comps: [Vec<f64>; 3],
    pub div_free: bool,
}

impl ScalarField {
    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn new(grid: SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: SpectralGrid, values: &[f64]) -> Self {
        Self {
            grid,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// Samples `f(x, y, z)` on the centered chart.
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64, f64, f64) -> Complex64) -> Self {
        let x = grid.coords();
        let mut values = Vec::with_capacity(grid.len());
        for &a in &x {
            for &b in &x {
                for &c in &x {
                    values.push(f(a, b, c));
                }
            }
        }
        Self { grid, values }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            Some(index) => Err(Error::NonFinite {
                what: "scalar field",
                index,
            }),
            None => Ok(()),
        }
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        fft::forward(&self.values, self.grid.n())
    }

    pub fn from_spectrum(grid: SpectralGrid, mut coeffs: Vec<Complex64>) -> Self {
        fft::inverse_in_place(&mut coeffs, grid.n());
        Self {
            grid,
            values: coeffs,
        }
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// Continuous L^2 norm, `(dx^3 sum |f|^2)^{1/2}`.
    pub fn l2(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&mut self, a: Complex64, other: &Self) {
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn mul_real(&self, r: &[f64]) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().zip(r).map(|(&v, &w)| v * w).collect(),
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

impl VectorField {
    pub fn zeros(grid: SpectralGrid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
            div_free: false,
        }
    }

    pub fn new(grid: SpectralGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidGrid(
                "component length does not match grid".into(),
            ));
        }
        Ok(Self {
            grid,
            comps,
            div_free: false,
        })
    }

    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let x = grid.coords();
        let mut out = Self::zeros(grid);
        let mut p = 0;
        for &a in &x {
            for &b in &x {
                for &c in &x {
                    let v = f(a, b, c);
                    for d in 0..3 {
                        out.comps[d][p] = v[d];
                    }
                    p += 1;
                }
            }
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        for c in &self.comps {
            if let Some(index) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "vector field",
                    index,
                });
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for p in 0..self.grid.len() {
            let s = self.comps[0][p].powi(2) + self.comps[1][p].powi(2) + self.comps[2][p].powi(2);
            m = m.max(s);
        }
        m.sqrt()
    }

    pub fn l2(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum();
        (self.grid.cell_volume() * s).sqrt()
    }

    pub fn mean(&self) -> [f64; 3] {
        let n = self.grid.len() as f64;
        [0, 1, 2].map(|d| self.comps[d].iter().sum::<f64>() / n)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            comps: [0, 1, 2].map(|d| self.comps[d].iter().map(|v| v * a).collect()),
            div_free: self.div_free,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            comps: [0, 1, 2].map(|d| {
                self.comps[d]
                    .iter()
                    .zip(&other.comps[d])
                    .map(|(a, b)| a + b)
                    .collect()
            }),
            div_free: self.div_free && other.div_free,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            comps: [0, 1, 2].map(|d| {
                self.comps[d]
                    .iter()
                    .zip(&other.comps[d])
                    .map(|(a, b)| a - b)
                    .collect()
            }),
            div_free: self.div_free && other.div_free,
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for d in 0..3 {
            for (s, o) in self.comps[d].iter_mut().zip(&other.comps[d]) {
                *s += a * o;
            }
        }
        self.div_free = self.div_free && other.div_free;
    }

    /// Pointwise `v . w`.
    pub fn dot(&self, other: &Self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|p| (0..3).map(|d| self.comps[d][p] * other.comps[d][p]).sum())
            .collect()
    }

    /// Pointwise `x . v` in the centered chart.
    pub fn x_dot(&self) -> Vec<f64> {
        let x = self.grid.coords();
        let n = self.grid.n();
        let mut out = vec![0.0; self.grid.len()];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = self.grid.index(i, j, k);
                    out[p] =
                        x[i] * self.comps[0][p] + x[j] * self.comps[1][p] + x[k] * self.comps[2][p];
                }
            }
        }
        out
    }

    /// `|v|^2` pointwise.
    pub fn norm_sqr(&self) -> Vec<f64> {
        self.dot(self)
    }

    /// Component spectra (unnormalized forward transforms).
    pub fn spectra(&self) -> [Vec<Complex64>; 3] {
        let n = self.grid.n();
        let (a, b) = fft::forward_real_pair(&self.comps[0], &self.comps[1], n);
        let c = fft::forward_real(&self.comps[2], n);
        [a, b, c]
    }

    /// Real parts of the inverse transforms of three spectra.
    pub fn from_spectra(grid: SpectralGrid, s: &[Vec<Complex64>; 3]) -> Self {
        let n = grid.n();
        let (a, b) = fft::inverse_real_pair(&s[0], &s[1], n);
        let c = fft::inverse_real(&s[2], n);
        Self {
            grid,
            comps: [a, b, c],
            div_free: false,
        }
    }
}

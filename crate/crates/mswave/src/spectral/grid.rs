use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic cubic box `[-L/2, L/2)^3` sampled on `n^3` points.
///
/// Samples are stored row-major with z fastest: `index(i, j, k) = (i n + j) n + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    n: usize,
    length: f64,
}

impl SpectralGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} is not a power of two >= 2"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length {length} is not positive"
            )));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of samples, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Centered chart coordinate of sample `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Signed mode number of FFT slot `i`, in `{-n/2, ..., n/2 - 1}`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.mode(i) as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Largest per-axis wavenumber magnitude, `pi n / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    pub fn compatible(&self, other: &SpectralGrid) -> bool {
        self.n == other.n && self.length == other.length
    }

    pub fn check_compatible(&self, other: &SpectralGrid) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids(
                self.n,
                self.length,
                other.n,
                other.length,
            ))
        }
    }

    /// Same resolution, box scaled by `factor`; the target of an exact dilation.
    pub fn dilated(&self, factor: f64) -> SpectralGrid {
        SpectralGrid {
            n: self.n,
            length: self.length * factor,
        }
    }

    /// `|xi|^2` for every FFT slot, in storage order.
    pub fn xi_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let mut out = Vec::with_capacity(self.len());
        for &kx in &k {
            for &ky in &k {
                for &kz in &k {
                    out.push(kx * kx + ky * ky + kz * kz);
                }
            }
        }
        out
    }

    /// `|x|^2` for every sample of the centered chart.
    pub fn x_squared(&self) -> Vec<f64> {
        let x = self.coords();
        let mut out = Vec::with_capacity(self.len());
        for &a in &x {
            for &b in &x {
                for &c in &x {
                    out.push(a * a + b * b + c * c);
                }
            }
        }
        out
    }

    /// One coordinate function `x_axis` sampled on the grid.
    pub fn coordinate(&self, axis: usize) -> Vec<f64> {
        let x = self.coords();
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    out.push(x[[i, j, k][axis]]);
                }
            }
        }
        out
    }
}

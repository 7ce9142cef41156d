//! Geometric time grids, Lagrange interpolation in `ln t` and Gauss-Legendre rules.

use crate::error::{Error, Result};

/// Nodes `t_i = t0 rho^i`, `i = 0..count`, with `rho` adjusted so that the last
/// node is exactly `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGrid {
    pub t0: f64,
    pub rho: f64,
    pub times: Vec<f64>,
}

impl GeometricGrid {
    pub fn new(t0: f64, t_end: f64, rho: f64) -> Result<Self> {
        if !(t0 > 0.0 && t_end > t0 && rho > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric grid needs 0 < T < T_max and rho > 1 (got {t0}, {t_end}, {rho})"
            )));
        }
        let steps = ((t_end / t0).ln() / rho.ln()).round().max(1.0) as usize;
        let rho = (t_end / t0).powf(1.0 / steps as f64);
        let mut times: Vec<f64> = (0..=steps).map(|i| t0 * rho.powi(i as i32)).collect();
        times[steps] = t_end;
        Ok(Self { t0, rho, times })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

/// Four-point Lagrange stencil in `ln t` over the sorted `times`.
///
/// Returns `(first index, weights)`; outside the node range the end stencils
/// extrapolate.
pub fn lagrange_stencil(times: &[f64], t: f64) -> (usize, Vec<f64>) {
    let n = times.len();
    if n == 1 {
        return (0, vec![1.0]);
    }
    let tau = t.ln();
    // interval containing t
    let seg = match times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    };
    let width = n.min(4);
    let first = seg.saturating_sub(1).min(n - width);
    let nodes: Vec<f64> = times[first..first + width].iter().map(|v| v.ln()).collect();
    let mut w = vec![1.0; width];
    for a in 0..width {
        for b in 0..width {
            if a != b {
                w[a] *= (tau - nodes[b]) / (nodes[a] - nodes[b]);
            }
        }
    }
    // exact node hit: avoid roundoff in the other weights
    if let Some(hit) = times[first..first + width].iter().position(|&v| v == t) {
        w.iter_mut().for_each(|x| *x = 0.0);
        w[hit] = 1.0;
    }
    (first, w)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; points];
    let mut w = vec![0.0; points];
    let n = points as f64;
    for i in 0..points {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=points {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if points == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[points - 1 - i] = z;
        w[points - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_on(
    a: f64,
    b: f64,
    rule: &(Vec<f64>, Vec<f64>),
) -> impl Iterator<Item = (f64, f64)> + '_ {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0
        .iter()
        .zip(&rule.1)
        .map(move |(&x, &w)| (c + h * x, h * w))
}

/// Integral over `[a, b]` of the cubic Lagrange interpolant of `values` on
/// `times`, convex combination weights returned per node.
pub fn interpolant_integral_weights(times: &[f64], a: f64, b: f64, out: &mut [f64]) {
    // the interpolant is cubic in ln t on each segment; integrate in t with GL
    // on each segment piece (integrand t-cubic in ln t is smooth)
    let rule = gauss_legendre(6);
    let n = times.len();
    let mut cuts = vec![a];
    for &t in times.iter().take(n.saturating_sub(1)).skip(1) {
        if t > a && t < b {
            cuts.push(t);
        }
    }
    cuts.push(b);
    for pair in cuts.windows(2) {
        let (la, lb) = (pair[0].ln(), pair[1].ln());
        for (tau, wt) in gauss_on(la, lb, &rule) {
            let t = tau.exp();
            let (first, w) = lagrange_stencil(times, t);
            for (k, wk) in w.iter().enumerate() {
                out[first + k] += wt * t * wk;
            }
        }
    }
}

//! Node-sampled histories: Lagrange blending in `ln t` and moment sources
//! built from stored node values.

use crate::error::{Error, Result};
use crate::potentials::MomentSource;
use crate::spectral::{ScalarField, SpectralGrid, VectorField};
use crate::timegrid::lagrange_stencil;

pub fn blend_real(times: &[f64], values: &[Vec<f64>], t: f64) -> Vec<f64> {
    let (first, w) = lagrange_stencil(times, t);
    let mut out = vec![0.0; values[first].len()];
    for (k, wk) in w.iter().enumerate() {
        if *wk == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(&values[first + k]) {
            *o += wk * v;
        }
    }
    out
}

pub fn blend_scalar(times: &[f64], fields: &[ScalarField], t: f64) -> ScalarField {
    let (first, w) = lagrange_stencil(times, t);
    let mut out = ScalarField::zeros(fields[first].grid);
    for (k, wk) in w.iter().enumerate() {
        if *wk != 0.0 {
            out.axpy((*wk).into(), &fields[first + k]);
        }
    }
    out
}

pub fn blend_vector(times: &[f64], fields: &[VectorField], t: f64) -> VectorField {
    let (first, w) = lagrange_stencil(times, t);
    let mut out = VectorField::zeros(fields[first].grid);
    out.div_free = fields[first..first + w.len()].iter().all(|f| f.div_free);
    for (k, wk) in w.iter().enumerate() {
        if *wk != 0.0 {
            out.axpy(*wk, &fields[first + k]);
        }
    }
    out
}

pub fn blend_mean(times: &[f64], means: &[[f64; 3]], t: f64) -> [f64; 3] {
    let (first, w) = lagrange_stencil(times, t);
    let mut out = [0.0; 3];
    for (k, wk) in w.iter().enumerate() {
        for d in 0..3 {
            out[d] += wk * means[first + k][d];
        }
    }
    out
}

/// Node values of a moment field, blended in `ln t`.
#[derive(Debug, Clone)]
pub struct NodeSeries {
    pub times: Vec<f64>,
    pub fields: Vec<VectorField>,
    pub means: Vec<[f64; 3]>,
}

impl NodeSeries {
    pub fn new(times: Vec<f64>, fields: Vec<VectorField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() || times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParameter(
                "node series needs increasing times, one field each".into(),
            ));
        }
        let means = fields.iter().map(|f| f.mean()).collect();
        Ok(Self {
            times,
            fields,
            means,
        })
    }

    pub fn lo(&self) -> f64 {
        self.times[0]
    }

    pub fn hi(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn covers(&self, t: f64) -> bool {
        t >= self.lo() * (1.0 - 1e-12) && t <= self.hi() * (1.0 + 1e-12)
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.covers(t) {
            Ok(())
        } else {
            Err(Error::Coverage {
                t,
                lo: self.lo(),
                hi: self.hi(),
            })
        }
    }

    pub fn at(&self, t: f64) -> Result<VectorField> {
        self.check(t)?;
        Ok(blend_vector(&self.times, &self.fields, t))
    }

    pub fn mean_at(&self, t: f64) -> Result<[f64; 3]> {
        self.check(t)?;
        Ok(blend_mean(&self.times, &self.means, t))
    }
}

/// A moment history made of a trajectory part on `[T, T_max]` and an
/// optional closure beyond `T_max`. Without a closure the moment is zero past
/// the trajectory.
pub struct SplicedMoment<'a> {
    pub grid: SpectralGrid,
    pub body: &'a NodeSeries,
    pub tail: Option<&'a NodeSeries>,
    pub breaks: Vec<f64>,
}

impl<'a> SplicedMoment<'a> {
    pub fn new(grid: SpectralGrid, body: &'a NodeSeries, tail: Option<&'a NodeSeries>) -> Self {
        let mut breaks = body.times.clone();
        if let Some(t) = tail {
            breaks.extend(t.times.iter().copied().filter(|&s| s > body.hi()));
        }
        Self {
            grid,
            body,
            tail,
            breaks,
        }
    }
}

impl MomentSource for SplicedMoment<'_> {
    fn grid(&self) -> SpectralGrid {
        self.grid
    }

    fn moment(&self, t: f64) -> Result<VectorField> {
        if t <= self.body.hi() {
            return self.body.at(t);
        }
        match self.tail {
            Some(tail) => tail.at(t),
            None => Ok(VectorField::zeros(self.grid)),
        }
    }

    fn mean(&self, t: f64) -> Result<[f64; 3]> {
        if t <= self.body.hi() {
            return self.body.mean_at(t);
        }
        match self.tail {
            Some(tail) => tail.mean_at(t),
            None => Ok([0.0; 3]),
        }
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    fn horizon(&self) -> f64 {
        match self.tail {
            Some(tail) => tail.hi(),
            None => f64::INFINITY,
        }
    }
}

impl MomentSource for NodeSeries {
    fn grid(&self) -> SpectralGrid {
        self.fields[0].grid
    }

    fn moment(&self, t: f64) -> Result<VectorField> {
        self.at(t)
    }

    fn mean(&self, t: f64) -> Result<[f64; 3]> {
        self.mean_at(t)
    }

    fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    fn horizon(&self) -> f64 {
        self.hi()
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("incompatible grids: (n = {0}, L = {1}) vs (n = {2}, L = {3})")]
    IncompatibleGrids(usize, f64, usize, f64),
    #[error("non-finite value at sample {index} of {what}")]
    NonFinite { what: &'static str, index: usize },
    #[error(
        "dilation by {nu} aliases: {fraction:.3e} of the spectral mass is lost (limit {limit:.1e})"
    )]
    Aliasing { nu: f64, fraction: f64, limit: f64 },
    #[error("time {t} outside the covered range [{lo}, {hi}]")]
    Coverage { t: f64, lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step rejected at t = {t}: error estimate {estimate:.3e} after {halvings} halvings")]
    StepRejected {
        t: f64,
        estimate: f64,
        halvings: u32,
    },
    #[error("Picard iteration does not contract (ratios {ratios:?})")]
    NonContraction { ratios: Vec<f64> },
    #[error(
        "Picard iteration did not converge in {iterations} iterates (last distance {distance:.3e})"
    )]
    NotConverged { iterations: usize, distance: f64 },
    #[error("finite-difference stencil needs {needed} nodes around node {node}, trajectory has {available}")]
    Stencil {
        node: usize,
        needed: usize,
        available: usize,
    },
    #[error("fit window too short: {0}")]
    FitWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

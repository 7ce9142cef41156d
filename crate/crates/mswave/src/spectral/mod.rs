//! Periodic pseudospectral field algebra.

pub mod fft;
mod field;
mod grid;
pub mod ops;
pub mod resample;

pub use field::{ScalarField, VectorField};
pub use grid::SpectralGrid;
pub use ops::{
    curl, divergence, divergence_complex, free_propagator, gradient_complex, gradient_of_real,
    gradient_part, gradient_real, inverse_laplacian, laplacian, leray_project, max_curl,
    max_divergence, norm, norm_vector, omega_pow, split_at, NormSpec,
};
pub use resample::{chirp, dilate, galilei_norm, it_pow, mdfm_apply, Piece};

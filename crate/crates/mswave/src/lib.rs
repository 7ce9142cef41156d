//! Modified wave operators for the Maxwell-Schrodinger system in Coulomb gauge,
//! computed pseudospectrally on a periodic box.
//!
//! The pipeline: an asymptotic state `w_plus` fixes the profiles `(W, S)` and
//! the frozen field `B_*`; the auxiliary system for the deviations
//! `(q, sigma, B_b)` is solved by Picard iteration backward from a large time;
//! the physical pair `(u, A)` is then reassembled and checked.

pub mod cauchy;
pub mod error;
pub mod history;
pub mod potentials;
pub mod profiles;
pub mod spectral;
pub mod timegrid;
pub mod wave;

pub use error::{Error, Result};

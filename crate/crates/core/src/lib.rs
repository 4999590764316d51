//! Resonances of finite-level particles coupled to a discretized boson field.
//!
//! The crate builds complex-deformed Hamiltonians on a truncated Fock space and
//! computes resonance eigenvalues, Feshbach reductions, survival amplitudes,
//! continued resolvent matrix elements and one infrared decimation step.

pub mod dynamics;
pub mod error;
pub mod feshbach;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod resolvent;
pub mod rg;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

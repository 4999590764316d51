//! Discretized boson modes, the truncated Fock basis and sparse second-quantized operators.

pub mod basis;
pub mod grid;
pub mod ops;
pub mod sparse;

pub use basis::{enumerate_basis, enumerate_basis_with_cap, fock_dimension, FockBasis, OccupationState};
pub use grid::{GridFamily, GridLayout, Mode, ModeGrid};
pub use ops::{dgamma_power, field_energy, field_phi, ladder, number_operator, Ladder};
pub use sparse::SparseOperator;

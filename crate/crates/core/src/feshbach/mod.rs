//! Feshbach-Schur reduction, the scalar equation for a cutoff resonance and the
//! second-order decay and shift coefficients.

pub mod fgr;
pub mod map;
pub mod scalar;

pub use fgr::{fgr, fgr_with_nodes, principal_value, Channel, FgrCoefficients, PV_NODES};
pub use map::{feshbach_map, ReducedOperator, SchurReduction};
pub use scalar::{schur_resonance, schur_resonance_with, NewtonOptions, ScalarReduction, RATIO_GATE};

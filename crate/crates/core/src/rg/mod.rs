//! Infrared cutoff comparisons, the scaling map and one Feshbach decimation step.

pub mod decimate;
pub mod gap;
pub mod scale;

pub use decimate::{decimate, ez_root, DecimationResult, Decimator};
pub use gap::{hard_sector_gap, ir_gap_experiment, IrGapReport, IrGapRow, MIN_SOFT_NODES};
pub use scale::{dilate, grid_power, scale_transform, ScaledOperator};

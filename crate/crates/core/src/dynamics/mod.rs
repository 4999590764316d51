//! Time evolution at real deformation: survival amplitudes, spectral filters and
//! the decay-law error experiment.

pub mod metastability;
pub mod propagate;

pub use metastability::{
    envelope_error, lifetime_grid, linear_fit, metastability_report, predicted_alpha, MetastabilityOptions,
    MetastabilityReport, MetastabilityRow,
};
pub use propagate::{
    filtered_survival, propagate_survival, propagate_survival_dense, propagate_survival_krylov, spectral_filter,
    survival_from_spectrum, FilterWindow, PropagationOptions, SurvivalTrace, NORM_DRIFT_TOL,
};

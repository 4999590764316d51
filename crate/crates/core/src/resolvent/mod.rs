//! Continued resolvent matrix elements of the deformed Hamiltonian and their
//! decomposition into a resonance pole plus a remainder.

pub mod element;
pub mod fit;
pub mod scan;

pub use element::{dprime_norm, resolvent_element, Profile, ResolventValue, TestVector, COND_LIMIT};
pub use fit::{pole_fit, predicted_beta, PoleFit, PoleFitSummary};
pub use scan::{continuation_scan, wedge_ok, ContinuationDomain, ContinuationScan, ScanSample, SigmaSchedule};

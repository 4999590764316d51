//! Eigenvalue solvers: dense oracle, shift-invert Krylov-Schur near a target,
//! continuation of a resonance in the coupling, and deformation diagnostics.

pub mod arnoldi;
pub mod dense;
pub mod golden;
pub mod theta;
pub mod track;

use num_complex::Complex64 as C64;

use crate::table::{fmt_f64, fmt_opt, Table};

pub use arnoldi::{eig_near, eig_near_with, refine_pair, ArnoldiOptions};
pub use golden::{golden_rule_correction, CorrectionRow, GoldenRuleCorrection};
pub use dense::{dense_eigenvalues, dense_spectrum, dense_spectrum_with_cap, EigenPair, HermitianSpectrum, DENSE_CAP};
pub use theta::{string_angle, theta_report, ThetaReport};
pub use track::{linear_path, resonance_at, track_resonance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dense,
    ShiftInvert,
    Feshbach,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::ShiftInvert => "shift-invert",
            Method::Feshbach => "feshbach",
        }
    }
}

/// A computed eigenvalue with its eigenvectors and provenance.
#[derive(Clone, Debug)]
pub struct ResonanceEstimate {
    pub value: C64,
    /// Unit-norm right eigenvector.
    pub right_vec: Vec<C64>,
    /// Unit-norm left eigenvector (`l^dagger H = value l^dagger`).
    pub left_vec: Vec<C64>,
    pub method: Method,
    pub theta: Option<C64>,
    pub sigma: Option<f64>,
    pub g: Option<f64>,
    /// `||(H - value) r||` for the unit vector `r`.
    pub residual: f64,
    /// `|<Psi_j, r>|` with the unperturbed state, when known.
    pub overlap: Option<f64>,
    /// False when the left/right biorthogonality check failed.
    pub resolved: bool,
}

impl ResonanceEstimate {
    /// `<Psi, P Psi>` for the rank-one spectral projection `P = r l^dagger / <l, r>`.
    pub fn projection_weight(&self, psi: &[C64]) -> C64 {
        use crate::linalg::dot;
        dot(psi, &self.right_vec) * dot(&self.left_vec, psi) / dot(&self.left_vec, &self.right_vec)
    }
}

pub const RESONANCE_COLUMNS: [&str; 9] =
    ["g", "theta_re", "theta_im", "sigma", "lambda_re", "lambda_im", "residual", "overlap", "method"];

pub fn resonance_table(estimates: &[ResonanceEstimate]) -> Table {
    let mut t = Table::new(&RESONANCE_COLUMNS);
    for e in estimates {
        t.push(vec![
            fmt_opt(e.g),
            fmt_opt(e.theta.map(|x| x.re)),
            fmt_opt(e.theta.map(|x| x.im)),
            fmt_opt(e.sigma),
            fmt_f64(e.value.re),
            fmt_f64(e.value.im),
            fmt_f64(e.residual),
            fmt_opt(e.overlap),
            e.method.as_str().to_string(),
        ]);
    }
    t
}

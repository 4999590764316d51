use num_complex::Complex64 as C64;

use super::propagate::{survival_from_spectrum, FilterWindow, SurvivalTrace};
use crate::error::{Error, Result};
use crate::feshbach::fgr;
use crate::linalg::norm;
use crate::model::{Model, ModelKind, Part};
use crate::spectral::{resonance_at, HermitianSpectrum};
use crate::table::{fmt_f64, Table};

/// Error exponent `(2 + 4 mu)/(5 + 2 mu)`; `2/3` for the minimal-coupling toy.
pub fn predicted_alpha(model: &Model) -> f64 {
    match model.spec().kind {
        ModelKind::Nelson => {
            let mu = model.spec().form.mu;
            (2.0 + 4.0 * mu) / (5.0 + 2.0 * mu)
        }
        ModelKind::QedToy => 2.0 / 3.0,
    }
}

/// `t = 0` followed by `points - 1` log-spaced times on `[0.01, 2] / gamma`.
pub fn lifetime_grid(gamma: f64, points: usize) -> Vec<f64> {
    let (a, b) = ((0.01 / gamma).ln(), (2.0 / gamma).ln());
    let n = points - 1;
    std::iter::once(0.0)
        .chain((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()))
        .collect()
}

/// Largest relative gap between `|amplitude|` and `e^{-gamma t}` for `t gamma` in `[lo, hi]`.
pub fn envelope_error(trace: &SurvivalTrace, gamma: f64, lo: f64, hi: f64) -> f64 {
    trace
        .times
        .iter()
        .zip(&trace.amplitude)
        .filter(|(t, _)| (lo..=hi).contains(&(*t * gamma)))
        .map(|(t, a)| {
            let env = (-gamma * t).exp();
            (a.norm() - env).abs() / env
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug)]
pub struct MetastabilityOptions {
    /// Deformation used to locate the resonance.
    pub theta: C64,
    /// Filter width constant `C` in `delta = C sigma`.
    pub filter_c: f64,
    pub time_points: usize,
}

impl Default for MetastabilityOptions {
    fn default() -> Self {
        Self { theta: C64::new(0.0, 0.3), filter_c: 4.0, time_points: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct MetastabilityRow {
    pub g: f64,
    pub sigma: f64,
    pub delta: f64,
    pub lambda: C64,
    pub gamma: f64,
    pub sup_error: f64,
    /// Largest relative envelope error on `t gamma` in `[0.2, 1]`.
    pub envelope_error: f64,
    /// `||(1 - f(H)) Psi_j||^2`.
    pub filter_loss: f64,
    pub alpha_hat_running: f64,
    pub resolvable: bool,
    pub trace: SurvivalTrace,
}

#[derive(Clone, Debug)]
pub struct MetastabilityReport {
    pub rows: Vec<MetastabilityRow>,
    pub alpha_hat: f64,
    pub alpha_predicted: f64,
    pub residuals: Vec<f64>,
    /// Smallest resolvable width on this grid.
    pub width_floor: f64,
}

/// Least-squares slope and intercept of `y` on `x`, with residuals.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    (slope, intercept, res)
}

/// Grid spacing at momentum `k`.
fn spacing_at(model: &Model, k: f64) -> f64 {
    let edges = model.grid().edges();
    let i = edges.partition_point(|&e| e <= k).clamp(1, edges.len() - 1);
    edges[i] - edges[i - 1]
}

pub fn metastability_report(model: &Model, j: usize, g_list: &[f64], opts: &MetastabilityOptions) -> Result<MetastabilityReport> {
    model.check_level(j)?;
    if g_list.len() < 3 {
        return Err(Error::invalid("g_list", "need at least three couplings"));
    }
    if g_list.windows(2).any(|w| w[1] >= w[0]) || g_list.iter().any(|&g| g <= 0.0) {
        return Err(Error::invalid("g_list", "must be positive and strictly decreasing"));
    }
    let alpha_predicted = predicted_alpha(model);
    let fgr = fgr(model, j)?;
    let width_floor = fgr
        .channels
        .iter()
        .filter_map(|c| c.k_star)
        .map(|k| spacing_at(model, k) / std::f64::consts::PI)
        .fold(0.0, f64::max);
    let psi = model.space().level_vacuum(j);
    let mut rows: Vec<MetastabilityRow> = Vec::new();
    for &g in g_list {
        let lambda = resonance_at(model, opts.theta, g, j, None)?.value;
        let gamma = -lambda.im;
        if !(gamma > 0.0) {
            return Err(Error::invalid("resonance", format!("no decay at g = {g} (Im lambda = {})", lambda.im)));
        }
        let h = model.hamiltonian(C64::new(0.0, 0.0), g, None, Part::Full)?;
        let spec = HermitianSpectrum::new(&h.matrix)?;
        let times = lifetime_grid(gamma, opts.time_points);
        let trace = survival_from_spectrum(&spec, &psi, &times, lambda);
        let sigma = g.powf(2.0 - alpha_predicted);
        let delta = opts.filter_c * sigma;
        let window = FilterWindow { center: lambda.re, inner: 0.5 * delta, outer: delta };
        let rest = spec.apply(&psi, |e| C64::new(1.0 - window.value(e), 0.0));
        let filter_loss = norm(&rest).powi(2);
        rows.push(MetastabilityRow {
            g,
            sigma,
            delta,
            lambda,
            gamma,
            sup_error: trace.sup_deviation(),
            envelope_error: envelope_error(&trace, gamma, 0.2, 1.0),
            filter_loss,
            alpha_hat_running: f64::NAN,
            resolvable: gamma >= width_floor,
            trace,
        });
        let k = rows.len();
        if k >= 2 {
            let x: Vec<f64> = rows.iter().map(|r| r.g.ln()).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.sup_error.ln()).collect();
            rows[k - 1].alpha_hat_running = linear_fit(&x, &y).0;
        }
    }
    let x: Vec<f64> = rows.iter().map(|r| r.g.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.sup_error.ln()).collect();
    let (alpha_hat, _, residuals) = linear_fit(&x, &y);
    Ok(MetastabilityReport { rows, alpha_hat, alpha_predicted, residuals, width_floor })
}

impl MetastabilityReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["g", "sigma", "delta", "gamma", "sup_error", "alpha_hat_running"]);
        for r in &self.rows {
            t.push(vec![fmt_f64(r.g), fmt_f64(r.sigma), fmt_f64(r.delta), fmt_f64(r.gamma), fmt_f64(r.sup_error), fmt_f64(r.alpha_hat_running)]);
        }
        t
    }
}

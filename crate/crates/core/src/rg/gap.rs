use num_complex::Complex64 as C64;

use crate::dynamics::linear_fit;
use crate::error::{Error, Result};
use crate::model::{Model, Part};
use crate::spectral::{dense_eigenvalues, resonance_at};
use crate::table::Table;

/// Minimum number of grid nodes below each cutoff.
pub const MIN_SOFT_NODES: usize = 4;

#[derive(Clone, Debug)]
pub struct IrGapRow {
    /// Cutoff after snapping to a cell edge.
    pub sigma: f64,
    pub lambda_full: C64,
    pub lambda_cut: C64,
    pub diff_abs: f64,
    /// Distance from `lambda_cut` to the rest of the hard-sector spectrum, over `sigma`.
    pub gap_over_sigma: f64,
    /// Log-log slope over the rows up to this one.
    pub slope_running: f64,
    /// False when the difference is below the eigensolver residuals.
    pub resolvable: bool,
}

#[derive(Clone, Debug)]
pub struct IrGapReport {
    pub rows: Vec<IrGapRow>,
    /// Log-log slope of `diff_abs` against `sigma` over resolvable rows.
    pub slope: f64,
    /// Differences increase with `sigma` over the resolvable rows.
    pub monotone: bool,
}

impl IrGapReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "sigma",
            "lambda_full_re",
            "lambda_full_im",
            "lambda_cut_re",
            "lambda_cut_im",
            "diff_abs",
            "gap_over_sigma",
            "slope_running",
        ]);
        for r in &self.rows {
            t.push_f64(&[
                r.sigma,
                r.lambda_full.re,
                r.lambda_full.im,
                r.lambda_cut.re,
                r.lambda_cut.im,
                r.diff_abs,
                r.gap_over_sigma,
                r.slope_running,
            ]);
        }
        t
    }
}

fn log_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    linear_fit(&x, &y).0
}

/// Cell edge for `sigma`; a cutoff at or above the grid top makes every mode soft.
fn cutoff_edge(model: &Model, sigma: f64) -> Result<(usize, f64)> {
    let grid = model.grid();
    if sigma >= grid.layout().kmax {
        return Ok((grid.len(), grid.layout().kmax));
    }
    model.snap_sigma(sigma)
}

/// Spectral gap around `lambda` in the cutoff Hamiltonian restricted to states without soft bosons.
pub fn hard_sector_gap(model: &Model, theta: C64, g: f64, sigma: f64, lambda: C64) -> Result<f64> {
    let (edge, _) = cutoff_edge(model, sigma)?;
    let h = if edge == model.grid().len() {
        model.hamiltonian(theta, 0.0, None, Part::Full)?
    } else {
        model.hamiltonian(theta, g, Some(sigma), Part::Cutoff)?
    };
    let sector = model.space().zero_soft_indices(edge);
    let mut d: Vec<f64> = dense_eigenvalues(&h.matrix.restrict(&sector))?.iter().map(|e| (e - lambda).norm()).collect();
    d.sort_by(f64::total_cmp);
    Ok(d.get(1).copied().unwrap_or(f64::INFINITY))
}

/// Compares the tracked resonance of the full and the infrared-cutoff Hamiltonian over `sigma_list`.
pub fn ir_gap_experiment(model: &Model, theta: C64, g: f64, j: usize, sigma_list: &[f64]) -> Result<IrGapReport> {
    model.check_level(j)?;
    if sigma_list.is_empty() {
        return Err(Error::invalid("sigma_list", "empty"));
    }
    let mut snapped = Vec::with_capacity(sigma_list.len());
    for &s in sigma_list {
        let (edge, value) = cutoff_edge(model, s)?;
        if edge < MIN_SOFT_NODES {
            return Err(Error::invalid("sigma_list", format!("sigma = {s} leaves {edge} < {MIN_SOFT_NODES} nodes below the cutoff")));
        }
        snapped.push(value);
    }
    let full = resonance_at(model, theta, g, j, None)?;
    let mut rows: Vec<IrGapRow> = Vec::with_capacity(snapped.len());
    let mut fit_points = Vec::new();
    for &sigma in &snapped {
        let (cut_value, cut_residual) = if sigma >= model.grid().layout().kmax {
            (C64::new(model.level(j), 0.0), 0.0)
        } else {
            let cut = resonance_at(model, theta, g, j, Some(sigma))?;
            (cut.value, cut.residual)
        };
        let diff_abs = (full.value - cut_value).norm();
        let floor = 10.0 * (full.residual + cut_residual) + 1e-13 * full.value.norm();
        let resolvable = g > 0.0 && diff_abs > floor;
        if resolvable {
            fit_points.push((sigma, diff_abs));
        }
        let gap = hard_sector_gap(model, theta, g, sigma, cut_value)?;
        rows.push(IrGapRow {
            sigma,
            lambda_full: full.value,
            lambda_cut: cut_value,
            diff_abs,
            gap_over_sigma: gap / sigma,
            slope_running: log_slope(&fit_points),
            resolvable,
        });
    }
    let mut ordered: Vec<(f64, f64)> = fit_points.clone();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = ordered.windows(2).all(|w| w[1].1 > w[0].1);
    Ok(IrGapReport { rows, slope: log_slope(&fit_points), monotone })
}

use num_complex::Complex64 as C64;

use crate::dynamics::linear_fit;
use crate::error::{Error, Result};
use crate::feshbach::fgr;
use crate::model::Model;
use crate::table::{fmt_f64, Table};

use super::resonance_at;

#[derive(Clone, Copy, Debug)]
pub struct CorrectionRow {
    pub g: f64,
    pub lambda: C64,
    /// `|lambda - lambda_j + g^2 z|`.
    pub remainder: f64,
}

/// Beyond-second-order part of the tracked resonance and its exponent in `g`.
#[derive(Clone, Debug)]
pub struct GoldenRuleCorrection {
    /// Second-order coefficient from quadrature.
    pub z: C64,
    pub rows: Vec<CorrectionRow>,
    /// Log-log slope of the remainder minus 2.
    pub epsilon_hat: f64,
}

impl GoldenRuleCorrection {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["g", "lambda_re", "lambda_im", "remainder"]);
        for r in &self.rows {
            t.push(vec![fmt_f64(r.g), fmt_f64(r.lambda.re), fmt_f64(r.lambda.im), fmt_f64(r.remainder)]);
        }
        t
    }
}

pub fn golden_rule_correction(model: &Model, theta: C64, j: usize, g_list: &[f64]) -> Result<GoldenRuleCorrection> {
    if g_list.len() < 2 || g_list.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::invalid("g_list", "need at least two positive couplings"));
    }
    let z = fgr(model, j)?.z;
    let lj = model.level(j);
    let mut rows = Vec::with_capacity(g_list.len());
    for &g in g_list {
        let lambda = resonance_at(model, theta, g, j, None)?.value;
        rows.push(CorrectionRow { g, lambda, remainder: (lambda - lj + g * g * z).norm() });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.g.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.remainder.ln()).collect();
    let epsilon_hat = linear_fit(&x, &y).0 - 2.0;
    Ok(GoldenRuleCorrection { z, rows, epsilon_hat })
}

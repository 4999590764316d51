use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::dynamics::linear_fit;

const BETA_MIN: f64 = -1.0;
const BETA_MAX: f64 = 0.95;
const BETA_STEP: f64 = 0.005;

#[derive(Clone, Debug)]
pub struct PoleFit {
    pub residue: C64,
    /// `(z, F(z) - p/(lambda - z))`.
    pub remainder_samples: Vec<(C64, C64)>,
    pub fitted_beta: f64,
    /// Two standard errors of the regression slope.
    pub beta_band: f64,
    pub fitted_c: f64,
    /// Largest relative change of the residue over leave-one-out refits.
    pub jackknife_spread: f64,
    /// True when the data are a pure pole and no remainder exponent can be fitted.
    pub degenerate: bool,
}

/// Structured summary of a fit.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PoleFitSummary {
    pub p_re: f64,
    pub p_im: f64,
    pub beta_hat: f64,
    pub beta_predicted: f64,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub n_samples: usize,
}

/// `(1 + 2 mu / 3)^{-1}`.
pub fn predicted_beta(mu: f64) -> f64 {
    1.0 / (1.0 + 2.0 * mu / 3.0)
}

/// Least squares for `F ~ p a + c b`; returns `(p, c, residual^2)`.
fn two_column_ls(a: &[C64], b: &[C64], f: &[C64]) -> (C64, C64, f64) {
    let d = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(u, v)| u.conj() * v).sum::<C64>();
    let (aa, ab, bb) = (d(a, a), d(a, b), d(b, b));
    let (af, bf) = (d(a, f), d(b, f));
    let det = aa * bb - ab * ab.conj();
    let p = (bb * af - ab * bf) / det;
    let c = (aa * bf - ab.conj() * af) / det;
    let res = f.iter().zip(a.iter().zip(b)).map(|(fi, (ai, bi))| (fi - p * ai - c * bi).norm_sqr()).sum();
    (p, c, res)
}

fn residue_for(z: &[C64], f: &[C64], lambda: C64) -> (C64, f64) {
    let a: Vec<C64> = z.iter().map(|zi| (lambda - zi).inv()).collect();
    let eval = |beta: f64| {
        let b: Vec<C64> = z.iter().map(|zi| (lambda - zi).powf(-beta)).collect();
        two_column_ls(&a, &b, f)
    };
    let steps = ((BETA_MAX - BETA_MIN) / BETA_STEP).round() as usize;
    let (mut best_beta, mut best_res) = (BETA_MIN, f64::INFINITY);
    for i in 0..=steps {
        let beta = BETA_MIN + i as f64 * BETA_STEP;
        let r = eval(beta).2;
        if r < best_res {
            best_res = r;
            best_beta = beta;
        }
    }
    // golden-section refinement around the grid minimum
    let (mut lo, mut hi) = ((best_beta - BETA_STEP).max(BETA_MIN), (best_beta + BETA_STEP).min(BETA_MAX));
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let (mut f1, mut f2) = (eval(x1).2, eval(x2).2);
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = eval(x1).2;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = eval(x2).2;
        }
    }
    let beta = 0.5 * (lo + hi);
    let (p, _, res) = eval(beta);
    if res <= best_res {
        (p, beta)
    } else {
        (eval(best_beta).0, best_beta)
    }
}

/// Splits samples of a continued matrix element into a pole at `lambda` and a power-law remainder.
pub fn pole_fit(samples: &[(C64, C64)], lambda: C64) -> Result<PoleFit> {
    if samples.len() < 12 {
        return Err(Error::invalid("samples", format!("need at least 12, got {}", samples.len())));
    }
    let dist: Vec<f64> = samples.iter().map(|(z, _)| (lambda - z).norm()).collect();
    let (dmin, dmax) = dist.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    if !(dmax >= 10.0 * dmin * (1.0 - 1e-9)) {
        return Err(Error::RankDeficient(format!("samples span {:.3} < one decade in |z - lambda|", dmax / dmin)));
    }
    let z: Vec<C64> = samples.iter().map(|s| s.0).collect();
    let f: Vec<C64> = samples.iter().map(|s| s.1).collect();

    // pure pole first; an exact pole leaves nothing to regress
    let a: Vec<C64> = z.iter().map(|zi| (lambda - zi).inv()).collect();
    let p0 = a.iter().zip(&f).map(|(ai, fi)| ai.conj() * fi).sum::<C64>() / a.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let fmax = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let pure = f.iter().zip(&a).map(|(fi, ai)| (fi - p0 * ai).norm()).fold(0.0, f64::max);
    if pure <= 1e-12 * fmax {
        return Ok(PoleFit {
            residue: p0,
            remainder_samples: z.iter().zip(&f).zip(&a).map(|((zi, fi), ai)| (*zi, fi - p0 * ai)).collect(),
            fitted_beta: f64::NAN,
            beta_band: f64::NAN,
            fitted_c: 0.0,
            jackknife_spread: 0.0,
            degenerate: true,
        });
    }

    let (p, _) = residue_for(&z, &f, lambda);
    let remainder: Vec<(C64, C64)> = z.iter().zip(&f).zip(&a).map(|((zi, fi), ai)| (*zi, fi - p * ai)).collect();
    let x: Vec<f64> = dist.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = remainder.iter().map(|(_, r)| r.norm().max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, intercept, res) = linear_fit(&x, &y);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let s2 = res.iter().map(|r| r * r).sum::<f64>() / (n - 2.0);
    let band = 2.0 * (s2 / sxx).sqrt();

    let mut spread: f64 = 0.0;
    for skip in 0..z.len() {
        let zs: Vec<C64> = z.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
        let fs: Vec<C64> = f.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
        let (pj, _) = residue_for(&zs, &fs, lambda);
        spread = spread.max((pj - p).norm() / p.norm());
    }

    Ok(PoleFit {
        residue: p,
        remainder_samples: remainder,
        fitted_beta: -slope,
        beta_band: band,
        fitted_c: intercept.exp(),
        jackknife_spread: spread,
        degenerate: false,
    })
}

impl PoleFit {
    pub fn summary(&self, mu: f64) -> PoleFitSummary {
        PoleFitSummary {
            p_re: self.residue.re,
            p_im: self.residue.im,
            beta_hat: self.fitted_beta,
            beta_predicted: predicted_beta(mu),
            c_hat: self.fitted_c,
            n_samples: self.remainder_samples.len(),
        }
    }

    /// `max_z |r(z)| |lambda - z|^beta_hat`.
    pub fn remainder_bound(&self, lambda: C64) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        self.remainder_samples
            .iter()
            .map(|(z, r)| r.norm() * (lambda - z).norm().powf(self.fitted_beta))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent::ContinuationDomain;

    #[test]
    fn synthetic_recovery() {
        let lambda = C64::new(0.93, -0.07);
        let d = ContinuationDomain::standard(lambda, std::f64::consts::FRAC_PI_2 - 0.1, std::f64::consts::PI + 0.2).unwrap();
        let samples: Vec<(C64, C64)> =
            d.samples.iter().map(|&z| (z, 2.0 / (lambda - z) + 0.1 * (lambda - z).powf(-0.75))).collect();
        let fit = pole_fit(&samples, lambda).unwrap();
        assert!((fit.residue - 2.0).norm() < 0.02);
        assert!((fit.fitted_beta - 0.75).abs() < 0.05);
        assert!(!fit.degenerate);
    }

    #[test]
    fn pure_pole_is_degenerate() {
        let lambda = C64::new(1.0, -0.1);
        let d = ContinuationDomain::standard(lambda, 1.4, 3.4).unwrap();
        let samples: Vec<(C64, C64)> = d.samples.iter().map(|&z| (z, 1.0 / (lambda - z))).collect();
        let fit = pole_fit(&samples, lambda).unwrap();
        assert!(fit.degenerate);
        assert!((fit.residue - 1.0).norm() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let s = vec![(C64::new(0.0, 0.0), C64::new(1.0, 0.0)); 5];
        assert!(pole_fit(&s, C64::new(1.0, -0.1)).is_err());
    }
}

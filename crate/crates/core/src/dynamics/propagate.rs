use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::linalg::{dot, norm};
use crate::spectral::{HermitianSpectrum, DENSE_CAP};
use crate::table::{fmt_f64, Table};

/// Largest tolerated `| ||psi(t)|| - 1 |` along a trace.
pub const NORM_DRIFT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SurvivalTrace {
    pub times: Vec<f64>,
    pub amplitude: Vec<C64>,
    pub reference: Vec<C64>,
    pub deviation: Vec<f64>,
}

impl SurvivalTrace {
    fn new(times: &[f64], amplitude: Vec<C64>, lambda_ref: C64) -> Self {
        let reference: Vec<C64> = times.iter().map(|&t| (C64::new(0.0, -t) * lambda_ref).exp()).collect();
        let deviation = amplitude.iter().zip(&reference).map(|(a, r)| (a - r).norm()).collect();
        Self { times: times.to_vec(), amplitude, reference, deviation }
    }

    pub fn sup_deviation(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["t", "amp_re", "amp_im", "ref_re", "ref_im", "deviation"]);
        for i in 0..self.times.len() {
            t.push(
                [self.times[i], self.amplitude[i].re, self.amplitude[i].im, self.reference[i].re, self.reference[i].im, self.deviation[i]]
                    .iter()
                    .copied()
                    .map(fmt_f64)
                    .collect(),
            );
        }
        t
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PropagationOptions {
    pub dense_cap: usize,
    pub allow_krylov: bool,
    pub krylov_dim: usize,
    /// Local error bound per Krylov step.
    pub step_tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { dense_cap: DENSE_CAP, allow_krylov: true, krylov_dim: 30, step_tol: 1e-12 }
    }
}

fn check_input(h: &SparseOperator, psi: &[C64], times: &[f64]) -> Result<()> {
    if psi.len() != h.dim() {
        return Err(Error::LengthMismatch { what: "state", expected: h.dim(), got: psi.len() });
    }
    if !h.is_hermitian(1e-12) {
        return Err(Error::invalid("hamiltonian", "propagation needs a Hermitian operator"));
    }
    if (norm(psi) - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("state", "must be normalized"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times", "must be finite and non-decreasing"));
    }
    Ok(())
}

/// `<psi, e^{-itH} psi>` on `times`, compared with `e^{-it lambda_ref}`.
pub fn propagate_survival(
    h: &SparseOperator,
    psi: &[C64],
    times: &[f64],
    lambda_ref: C64,
    opts: &PropagationOptions,
) -> Result<SurvivalTrace> {
    if h.dim() <= opts.dense_cap {
        propagate_survival_dense(h, psi, times, lambda_ref)
    } else if opts.allow_krylov {
        propagate_survival_krylov(h, psi, times, lambda_ref, opts)
    } else {
        Err(Error::Capacity { dim: h.dim(), cap: opts.dense_cap })
    }
}

pub fn propagate_survival_dense(h: &SparseOperator, psi: &[C64], times: &[f64], lambda_ref: C64) -> Result<SurvivalTrace> {
    check_input(h, psi, times)?;
    let spec = HermitianSpectrum::new(h)?;
    Ok(survival_from_spectrum(&spec, psi, times, lambda_ref))
}

/// Survival amplitude from a precomputed eigendecomposition.
pub fn survival_from_spectrum(spec: &HermitianSpectrum, psi: &[C64], times: &[f64], lambda_ref: C64) -> SurvivalTrace {
    let weights: Vec<f64> = spec.coefficients(psi).iter().map(|c| c.norm_sqr()).collect();
    let amplitude = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return C64::new(weights.iter().sum(), 0.0);
            }
            weights.iter().zip(&spec.values).map(|(w, &e)| C64::from_polar(*w, -e * t)).sum()
        })
        .collect();
    SurvivalTrace::new(times, amplitude, lambda_ref)
}

/// Lanczos propagation with adaptive step size.
pub fn propagate_survival_krylov(
    h: &SparseOperator,
    psi: &[C64],
    times: &[f64],
    lambda_ref: C64,
    opts: &PropagationOptions,
) -> Result<SurvivalTrace> {
    check_input(h, psi, times)?;
    let mut state = psi.to_vec();
    let mut t_now = 0.0;
    let mut tau = times.last().copied().unwrap_or(0.0).max(1e-3) / 16.0;
    let mut amplitude = Vec::with_capacity(times.len());
    for &t in times {
        while t_now < t {
            let step = tau.min(t - t_now);
            let (next, err) = krylov_step(h, &state, step, opts.krylov_dim)?;
            if err > opts.step_tol && step > 1e-14 {
                tau = step * 0.5;
                continue;
            }
            state = next;
            t_now += step;
            if err < 0.1 * opts.step_tol {
                tau = step * 1.5;
            }
        }
        let drift = (norm(&state) - 1.0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::Krylov(format!("norm drift {drift:e} at t = {t}")));
        }
        amplitude.push(dot(psi, &state));
    }
    Ok(SurvivalTrace::new(times, amplitude, lambda_ref))
}

/// One step `e^{-i tau H} v` from a Lanczos basis; returns the state and an error estimate.
fn krylov_step(h: &SparseOperator, v0: &[C64], tau: f64, max_dim: usize) -> Result<(Vec<C64>, f64)> {
    let n = h.dim();
    let m_max = max_dim.min(n).max(1);
    let beta0 = norm(v0);
    let mut basis: Vec<Vec<C64>> = vec![v0.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut tail = 0.0;
    for k in 0..m_max {
        let mut w = h.matvec(&basis[k]);
        let a = dot(&basis[k], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let bn = norm(&w);
        if bn < 1e-13 || k + 1 == m_max {
            tail = if bn < 1e-13 { 0.0 } else { bn };
            break;
        }
        beta.push(bn);
        basis.push(w.into_iter().map(|x| x / bn).collect());
    }
    let m = alpha.len();
    let t = Mat::<C64>::from_fn(m, m, |i, j| {
        if i == j {
            C64::new(alpha[i], 0.0)
        } else if i + 1 == j {
            C64::new(beta[i], 0.0)
        } else if j + 1 == i {
            C64::new(beta[j], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let evd = t.self_adjoint_eigen(faer::Side::Lower).map_err(|e| Error::Krylov(format!("{e:?}")))?;
    let u = evd.U();
    let s = evd.S().column_vector();
    let coeffs: Vec<C64> = (0..m)
        .map(|i| (0..m).map(|k| u[(i, k)] * C64::from_polar(1.0, -s[k].re * tau) * u[(0, k)].conj()).sum())
        .collect();
    let err = tail * coeffs[m - 1].norm() * beta0;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (b, c) in basis.iter().zip(&coeffs) {
        out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x * beta0);
    }
    Ok((out, err))
}

/// Sharp-plateau bump: 1 on `|u - center| <= inner`, smooth shoulders, 0 beyond `outer`.
#[derive(Clone, Copy, Debug)]
pub struct FilterWindow {
    pub center: f64,
    pub inner: f64,
    pub outer: f64,
}

impl FilterWindow {
    pub fn value(&self, u: f64) -> f64 {
        let d = (u - self.center).abs();
        if d <= self.inner {
            1.0
        } else if d >= self.outer {
            0.0
        } else {
            let s = (d - self.inner) / (self.outer - self.inner);
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }
}

/// `f(H) psi` by functional calculus.
pub fn spectral_filter(spec: &HermitianSpectrum, window: &FilterWindow, psi: &[C64]) -> Vec<C64> {
    spec.apply(psi, |e| C64::new(window.value(e), 0.0))
}

/// `<psi, e^{-itH} f(H) psi>`.
pub fn filtered_survival(spec: &HermitianSpectrum, window: &FilterWindow, psi: &[C64], times: &[f64], lambda_ref: C64) -> SurvivalTrace {
    let c = spec.coefficients(psi);
    let amplitude = times
        .iter()
        .map(|&t| {
            c.iter()
                .zip(&spec.values)
                .map(|(c, &e)| C64::from_polar(c.norm_sqr() * window.value(e), -e * t))
                .sum()
        })
        .collect();
    SurvivalTrace::new(times, amplitude, lambda_ref)
}

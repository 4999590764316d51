use num_complex::Complex64 as C64;

use super::arnoldi::{eig_near_with, refine_pair, ArnoldiOptions};
use super::{Method, ResonanceEstimate};
use crate::error::{Error, Result};
use crate::feshbach::{NewtonOptions, ScalarReduction};
use crate::fock::SparseOperator;
use crate::linalg::dot;
use crate::model::{Model, Part};

/// Smallest admissible continuation step.
pub const MIN_STEP: f64 = 1e-6;
/// Overlap with the previous right vector required to accept a step.
pub const OVERLAP_THRESHOLD: f64 = 0.5;
/// Candidates requested from the shift-invert solver at each step.
pub const CANDIDATES: usize = 6;

fn unperturbed(model: &Model, theta: C64, j: usize, sigma: Option<f64>) -> ResonanceEstimate {
    let psi = model.space().level_vacuum(j);
    ResonanceEstimate {
        value: C64::new(model.level(j), 0.0),
        right_vec: psi.clone(),
        left_vec: psi,
        method: Method::Dense,
        theta: Some(theta),
        sigma,
        g: Some(0.0),
        residual: 0.0,
        overlap: Some(1.0),
        resolved: true,
    }
}

/// Eigenvalue branch emanating from level `j`, continued along `g_path`.
///
/// Each step targets the previous eigenvalue and keeps the candidate with the
/// largest overlap with the previous right vector. When the shift-invert window
/// holds no acceptable candidate, the root of the rank-one Feshbach reduction onto
/// `|j> (x) |vacuum>` is tried instead. A step whose best overlap is still below
/// [`OVERLAP_THRESHOLD`] is halved and retried.
pub fn track_resonance(
    model: &Model,
    theta: C64,
    g_path: &[f64],
    j: usize,
    sigma: Option<f64>,
) -> Result<Vec<ResonanceEstimate>> {
    model.check_level(j)?;
    if !(theta.im > 0.0) {
        return Err(Error::invalid("theta", "tracking needs Im theta > 0"));
    }
    if g_path.first() != Some(&0.0) {
        return Err(Error::invalid("g_path", "must start at g = 0"));
    }
    if g_path.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("g_path", "must be strictly increasing"));
    }
    let part = if sigma.is_some() { Part::Cutoff } else { Part::Full };
    let snapped = match sigma {
        Some(s) => Some(model.snap_sigma(s)?.1),
        None => None,
    };
    let psi_j = model.space().level_vacuum(j);
    let space_index = model.space().index(j, 0);
    let opts = ArnoldiOptions::default();

    let mut current = unperturbed(model, theta, j, snapped);
    let mut g_now = 0.0;
    let mut out = vec![current.clone()];
    for &target in &g_path[1..] {
        let mut step = target - g_now;
        while g_now < target {
            let g_try = if g_now + step >= target { target } else { g_now + step };
            let h = model.hamiltonian(theta, g_try, sigma, part)?;
            let overlap_with = |c: ResonanceEstimate| (dot(&current.right_vec, &c.right_vec).norm(), c);
            let mut best = eig_near_with(&h.matrix, current.value, CANDIDATES, Some(&current.right_vec), &opts)
                .ok()
                .and_then(|cands| cands.into_iter().map(overlap_with).max_by(|a, b| a.0.total_cmp(&b.0)));
            if best.as_ref().is_none_or(|b| b.0 < OVERLAP_THRESHOLD) {
                // dense continua near lambda_j can crowd the branch out of the shift-invert window
                if let Ok(c) = reduced_root(&h.matrix, space_index, current.value) {
                    let cand = overlap_with(c);
                    if best.as_ref().is_none_or(|b| cand.0 > b.0) {
                        best = Some(cand);
                    }
                }
            }
            match best {
                Some((ov, mut cand)) if ov >= OVERLAP_THRESHOLD => {
                    cand.theta = Some(theta);
                    cand.sigma = h.sigma;
                    cand.g = Some(g_try);
                    cand.overlap = Some(dot(&psi_j, &cand.right_vec).norm());
                    current = cand;
                    g_now = g_try;
                }
                other => {
                    step *= 0.5;
                    if step < MIN_STEP {
                        return Err(Error::BranchLost { g: g_try, overlap: other.map_or(0.0, |o| o.0) });
                    }
                }
            }
        }
        out.push(current.clone());
    }
    Ok(out)
}

/// Root of the rank-one reduction onto basis vector `target`, by Newton iteration from `z0`.
fn reduced_root(h: &SparseOperator, target: usize, z0: C64) -> Result<ResonanceEstimate> {
    let red = ScalarReduction::from_operator(h.clone(), target)?;
    let z = red.newton(z0, &NewtonOptions::default())?;
    let (right, _) = red.eigenvectors(z)?;
    let mut est = refine_pair(h, z, right)?;
    est.method = Method::Feshbach;
    Ok(est)
}

/// Convenience: `n` equal steps from 0 to `g`.
pub fn linear_path(g: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| g * i as f64 / n as f64).collect()
}

/// Tracked eigenvalue at a single coupling.
pub fn resonance_at(model: &Model, theta: C64, g: f64, j: usize, sigma: Option<f64>) -> Result<ResonanceEstimate> {
    if g == 0.0 {
        return Ok(track_resonance(model, theta, &[0.0], j, sigma)?.remove(0));
    }
    let path = linear_path(g, 4);
    Ok(track_resonance(model, theta, &path, j, sigma)?.pop().expect("non-empty path"))
}

use num_complex::Complex64 as C64;

use super::dense::dense_spectrum;
use super::track::resonance_at;
use crate::error::{Error, Result};
use crate::model::{Model, Part};

#[derive(Clone, Debug)]
pub struct ThetaReport {
    pub thetas: Vec<C64>,
    pub full: Vec<C64>,
    pub cutoff: Vec<C64>,
    /// Largest pairwise distance among `full`.
    pub full_spread: f64,
    pub cutoff_spread: f64,
    /// Fitted direction of the one-boson string attached to level `j`, per theta.
    pub string_angles: Vec<f64>,
}

fn spread(values: &[C64]) -> f64 {
    let mut s: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            s = s.max((a - b).norm());
        }
    }
    s
}

/// Direction of the eigenvalues whose vectors live mostly on `|j> (x) |one boson>`,
/// measured from `anchor` as a weighted circular mean.
pub fn string_angle(model: &Model, theta: C64, g: f64, j: usize, anchor: C64) -> Result<f64> {
    let h = model.hamiltonian(theta, g, None, Part::Full)?;
    let pairs = dense_spectrum(&h.matrix)?;
    let space = model.space();
    let modes = model.grid().len();
    let one_boson: Vec<usize> = (0..modes).filter_map(|n| space.fock().one_boson(n)).map(|i| space.index(j, i)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for p in &pairs {
        let weight: f64 = one_boson.iter().map(|&i| p.vector[i].norm_sqr()).sum();
        let d = p.value - anchor;
        if weight >= 0.5 && d.norm() > 1e-12 {
            acc += d;
        }
    }
    if acc.norm() == 0.0 {
        return Err(Error::invalid("string", "no one-boson string found"));
    }
    Ok(acc.arg())
}

/// Dependence of the tracked eigenvalue on the deformation, for the full and the cutoff Hamiltonian.
pub fn theta_report(model: &Model, g: f64, thetas: &[C64], j: usize, sigma: f64) -> Result<ThetaReport> {
    if thetas.len() < 3 {
        return Err(Error::invalid("theta_list", "need at least three values"));
    }
    if thetas.iter().any(|t| !(0.15..=0.45).contains(&t.im)) {
        return Err(Error::invalid("theta_list", "Im theta must lie in [0.15, 0.45]"));
    }
    let mut full = Vec::new();
    let mut cutoff = Vec::new();
    let mut angles = Vec::new();
    for &theta in thetas {
        let lf = resonance_at(model, theta, g, j, None)?.value;
        full.push(lf);
        cutoff.push(resonance_at(model, theta, g, j, Some(sigma))?.value);
        angles.push(string_angle(model, theta, g, j, lf)?);
    }
    Ok(ThetaReport {
        thetas: thetas.to_vec(),
        full_spread: spread(&full),
        cutoff_spread: spread(&cutoff),
        full,
        cutoff,
        string_angles: angles,
    })
}

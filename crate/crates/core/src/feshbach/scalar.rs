use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::linalg::{bilinear, normalize, ShiftedLu};
use crate::model::{Model, Part};
use crate::spectral::{Method, ResonanceEstimate};

/// Largest admissible `g^2 / sigma`.
pub const RATIO_GATE: f64 = 0.05;

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { damping: 0.5, max_iter: 50, tol: 1e-12 }
    }
}

/// Rank-one reduction of the cutoff Hamiltonian onto `|j> (x) |vacuum>`.
///
/// Works on the sector without soft bosons, which the cutoff Hamiltonian leaves
/// invariant; there `b(z) = H_ii - z - r (Hbar - z)^{-1} c`.
#[derive(Clone, Debug)]
pub struct ScalarReduction {
    full_dim: usize,
    /// Product-space indices of the sector, in order.
    sector: Vec<usize>,
    /// Position of `|j, vacuum>` inside the sector.
    pivot: usize,
    diag: C64,
    row: Vec<C64>,
    col: Vec<C64>,
    complement: SparseOperator,
    /// Cutoff Hamiltonian on the full space (for residuals).
    full: SparseOperator,
}

impl ScalarReduction {
    pub fn new(model: &Model, theta: C64, g: f64, j: usize, sigma: f64) -> Result<Self> {
        model.check_level(j)?;
        let (edge, _) = model.snap_sigma(sigma)?;
        let h = model.hamiltonian(theta, g, Some(sigma), Part::Cutoff)?;
        let space = model.space();
        let sector = space.zero_soft_indices(edge);
        Self::on_sector(h.matrix, sector, space.index(j, 0))
    }

    /// Reduction of `h` onto the basis vector `target`, with every other index in the complement.
    pub fn from_operator(h: SparseOperator, target: usize) -> Result<Self> {
        if target >= h.dim() {
            return Err(Error::OutOfBounds { what: "pivot", index: target, len: h.dim() });
        }
        let sector = (0..h.dim()).collect();
        Self::on_sector(h, sector, target)
    }

    /// `sector` must be invariant under `h` and contain `target`.
    fn on_sector(h: SparseOperator, sector: Vec<usize>, target: usize) -> Result<Self> {
        let pivot = sector.iter().position(|&i| i == target).expect("pivot is in the sector");
        let restricted = h.restrict(&sector);
        let others: Vec<usize> = (0..sector.len()).filter(|&i| i != pivot).collect();
        let row = others.iter().map(|&c| restricted.get(pivot, c)).collect();
        let col = others.iter().map(|&r| restricted.get(r, pivot)).collect();
        Ok(Self {
            full_dim: h.dim(),
            diag: restricted.get(pivot, pivot),
            complement: restricted.restrict(&others),
            sector,
            pivot,
            row,
            col,
            full: h,
        })
    }

    /// `(b(z), b'(z))`.
    pub fn evaluate(&self, z: C64) -> Result<(C64, C64)> {
        let lu = ShiftedLu::new(&self.complement, z)?;
        let x = lu.solve(&self.col);
        let x2 = lu.solve(&x);
        let b = self.diag - z - bilinear(&self.row, &x);
        let db = C64::new(-1.0, 0.0) - bilinear(&self.row, &x2);
        Ok((b, db))
    }

    pub fn b(&self, z: C64) -> Result<C64> {
        Ok(self.evaluate(z)?.0)
    }

    /// Damped Newton iteration on `b(z) = 0` from `z0`.
    pub fn newton(&self, z0: C64, opts: &NewtonOptions) -> Result<C64> {
        let mut z = z0;
        let (mut b, mut db) = self.evaluate(z)?;
        for _ in 0..opts.max_iter {
            if b.norm() <= opts.tol {
                return Ok(z);
            }
            let mut step = b / db;
            let mut accepted = None;
            for _ in 0..40 {
                let trial = z - step;
                if let Ok((bt, dbt)) = self.evaluate(trial) {
                    if bt.norm() < b.norm() {
                        accepted = Some((trial, bt, dbt));
                        break;
                    }
                }
                step *= opts.damping;
            }
            let Some((zn, bn, dbn)) = accepted else {
                return Err(Error::NoConvergence { method: "Newton on b(z)", iterations: opts.max_iter });
            };
            z = zn;
            b = bn;
            db = dbn;
        }
        if b.norm() <= opts.tol {
            return Ok(z);
        }
        Err(Error::NoConvergence { method: "Newton on b(z)", iterations: opts.max_iter })
    }

    /// Right and left eigenvectors at a root, embedded in the full product space.
    pub fn eigenvectors(&self, z: C64) -> Result<(Vec<C64>, Vec<C64>)> {
        let lu = ShiftedLu::new(&self.complement, z)?;
        let x = lu.solve(&self.col);
        let conj_row: Vec<C64> = self.row.iter().map(|v| v.conj()).collect();
        let y = lu.solve_adjoint(&conj_row);
        let mut right = vec![C64::new(0.0, 0.0); self.full_dim];
        let mut left = vec![C64::new(0.0, 0.0); self.full_dim];
        let mut k = 0;
        for (pos, &idx) in self.sector.iter().enumerate() {
            if pos == self.pivot {
                right[idx] = C64::new(1.0, 0.0);
                left[idx] = C64::new(1.0, 0.0);
            } else {
                right[idx] = -x[k];
                left[idx] = -y[k];
                k += 1;
            }
        }
        normalize(&mut right);
        normalize(&mut left);
        Ok((right, left))
    }

    pub fn cutoff_hamiltonian(&self) -> &SparseOperator {
        &self.full
    }
}

/// Cutoff resonance from the scalar Feshbach reduction, by Newton iteration from `lambda_j`.
pub fn schur_resonance(model: &Model, theta: C64, g: f64, j: usize, sigma: f64) -> Result<ResonanceEstimate> {
    schur_resonance_with(model, theta, g, j, sigma, &NewtonOptions::default())
}

pub fn schur_resonance_with(
    model: &Model,
    theta: C64,
    g: f64,
    j: usize,
    sigma: f64,
    opts: &NewtonOptions,
) -> Result<ResonanceEstimate> {
    model.check_level(j)?;
    let (_, snapped) = model.snap_sigma(sigma)?;
    if g * g / snapped > RATIO_GATE {
        return Err(Error::invalid("g", format!("g^2/sigma = {} exceeds {RATIO_GATE}", g * g / snapped)));
    }
    let gap = model.spec().particle.isolation(j) * theta.im.abs().sin();
    if snapped >= gap {
        return Err(Error::invalid("sigma", format!("sigma = {snapped} must stay below d_j sin|Im theta| = {gap}")));
    }
    let red = ScalarReduction::new(model, theta, g, j, snapped)?;
    let z = red.newton(C64::new(model.level(j), 0.0), opts)?;
    let (right, left) = red.eigenvectors(z)?;
    let hr = red.full.matvec(&right);
    let residual = hr.iter().zip(&right).map(|(a, b)| (a - z * b).norm_sqr()).sum::<f64>().sqrt();
    let overlap = right[model.space().index(j, 0)].norm();
    Ok(ResonanceEstimate {
        value: z,
        right_vec: right,
        left_vec: left,
        method: Method::Feshbach,
        theta: Some(theta),
        sigma: Some(snapped),
        g: Some(g),
        residual,
        overlap: Some(overlap),
        resolved: true,
    })
}

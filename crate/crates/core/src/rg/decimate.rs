use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::feshbach::{NewtonOptions, ScalarReduction, SchurReduction};
use crate::fock::{OccupationState, SparseOperator};
use crate::model::{Model, Part};

/// Effective operator after one Feshbach decimation onto low field energies.
#[derive(Clone, Debug)]
pub struct DecimationResult {
    pub rho: f64,
    pub z: C64,
    /// `F_P(H - z)` in the basis `psi (x) eta`, vacuum `eta` first.
    pub h_eff: SparseOperator,
    pub e_z: C64,
    /// `(field energy of eta, diagonal entry)`.
    pub t_diag: Vec<(f64, C64)>,
    /// Spectral norm of the off-diagonal part of `h_eff`.
    pub w_norm: f64,
    /// Cutoff resonance the projection is built on.
    pub lambda_cut: C64,
}

impl DecimationResult {
    /// `E_z - (lambda_cut - z)`.
    pub fn delta_e(&self) -> C64 {
        self.e_z - (self.lambda_cut - self.z)
    }
}

/// Decimation setup for fixed `(theta, g, sigma, rho0)`, reusable across `z`.
#[derive(Clone, Debug)]
pub struct Decimator {
    reduction: SchurReduction,
    energies: Vec<f64>,
    lambda_cut: C64,
    sigma: f64,
    rho: f64,
}

fn spectral_norm(m: &Mat<C64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let svd = m.thin_svd().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(svd.S().column_vector()[0].re)
}

impl Decimator {
    pub fn new(model: &Model, theta: C64, g: f64, j: usize, sigma: f64, rho0: f64) -> Result<Self> {
        model.check_level(j)?;
        let requested = sigma;
        let (edge, sigma) = model.snap_sigma(sigma)?;
        if !(rho0 > 0.0 && rho0 <= requested.max(sigma)) {
            return Err(Error::invalid("rho0", format!("need 0 < rho0 <= sigma = {requested}, got {rho0}")));
        }
        let red = ScalarReduction::new(model, theta, g, j, sigma)?;
        let lambda_cut = red.newton(C64::new(model.level(j), 0.0), &NewtonOptions::default())?;
        let (right, left) = red.eigenvectors(lambda_cut)?;

        let space = model.space();
        let fock = space.fock();
        let grid = fock.grid();
        let soft: Vec<usize> = (0..fock.dim())
            .filter(|&i| fock.supported_in(i, 0..edge))
            .filter(|&i| fock.state(i).occupied_modes().iter().map(|&n| grid.k(n as usize)).sum::<f64>() <= rho0 * (1.0 + 1e-12))
            .collect();
        let energies: Vec<f64> =
            soft.iter().map(|&i| fock.state(i).occupied_modes().iter().map(|&n| grid.k(n as usize)).sum()).collect();

        let n = space.dim();
        let embed = |v: &[C64], eta: &OccupationState| -> Vec<C64> {
            let mut out = vec![C64::new(0.0, 0.0); n];
            for (idx, &a) in v.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let (level, fi) = space.split(idx);
                let mut modes = fock.state(fi).occupied_modes().to_vec();
                modes.extend_from_slice(eta.occupied_modes());
                if modes.len() > fock.n_max() {
                    continue;
                }
                // hard and soft modes are disjoint, so the product state is a basis state
                if let Some(t) = fock.index_of(&OccupationState::from_modes(modes)) {
                    out[space.index(level, t)] += a;
                }
            }
            out
        };
        let cols = |v: &[C64]| {
            let c: Vec<Vec<C64>> = soft.iter().map(|&i| embed(v, fock.state(i))).collect();
            Mat::from_fn(n, c.len(), |r, k| c[k][r])
        };
        let vmat = cols(&right);
        let wmat = cols(&left);
        let h = model.hamiltonian(theta, g, None, Part::Full)?.matrix.to_dense();
        let reduction = SchurReduction::with_basis(&h, &vmat, &wmat)?;
        Ok(Self { reduction, energies, lambda_cut, sigma, rho: rho0 })
    }

    pub fn lambda_cut(&self) -> C64 {
        self.lambda_cut
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of field states kept.
    pub fn rank(&self) -> usize {
        self.energies.len()
    }

    fn check_disc(&self, z: C64) -> Result<()> {
        if (z - self.lambda_cut).norm() >= 0.5 * self.sigma {
            return Err(Error::invalid("z", format!("{z} is outside the disc of radius sigma/2 around {}", self.lambda_cut)));
        }
        Ok(())
    }

    pub fn at(&self, z: C64) -> Result<DecimationResult> {
        self.check_disc(z)?;
        let reduced = self.reduction.map_of(z)?;
        let m = reduced.matrix;
        let r = m.nrows();
        let t_diag: Vec<(f64, C64)> = (0..r).map(|i| (self.energies[i], m[(i, i)])).collect();
        let off = Mat::from_fn(r, r, |a, b| if a == b { C64::new(0.0, 0.0) } else { m[(a, b)] });
        Ok(DecimationResult {
            rho: self.rho,
            z,
            e_z: m[(0, 0)],
            t_diag,
            w_norm: spectral_norm(&off)?,
            h_eff: SparseOperator::from_dense(&m),
            lambda_cut: self.lambda_cut,
        })
    }

    /// `(E_z, dE_z/dz)` from the vacuum entry alone.
    pub fn vacuum_entry(&self, z: C64) -> Result<(C64, C64)> {
        self.check_disc(z)?;
        self.reduction.diagonal_entry(z, 0)
    }

    /// Newton iteration on `E_z = 0` from the cutoff resonance.
    pub fn root(&self, opts: &NewtonOptions) -> Result<C64> {
        let mut z = self.lambda_cut;
        for _ in 0..opts.max_iter {
            let (e, de) = self.vacuum_entry(z)?;
            if e.norm() <= opts.tol {
                return Ok(z);
            }
            z -= e / de;
        }
        let (e, _) = self.vacuum_entry(z)?;
        if e.norm() <= opts.tol {
            return Ok(z);
        }
        Err(Error::NoConvergence { method: "Newton on E_z", iterations: opts.max_iter })
    }
}

/// One decimation step of `H - z` onto `(cutoff resonance) (x) (soft field states with energy <= rho0)`.
pub fn decimate(model: &Model, theta: C64, g: f64, j: usize, z: C64, sigma: f64, rho0: f64) -> Result<DecimationResult> {
    Decimator::new(model, theta, g, j, sigma, rho0)?.at(z)
}

/// First-iterate resonance estimate, the root of `E_z`.
pub fn ez_root(model: &Model, theta: C64, g: f64, sigma: f64, rho0: f64, j: usize) -> Result<C64> {
    Decimator::new(model, theta, g, j, sigma, rho0)?.root(&NewtonOptions::default())
}

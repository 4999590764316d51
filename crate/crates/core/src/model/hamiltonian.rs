use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::coupling::{cut_index, normal_ordering_constant, radial_coupling, Window};
use super::spec::{ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::fock::{enumerate_basis_with_cap, field_phi, FockBasis, ModeGrid, SparseOperator};

/// Default bound on the product-space dimension.
pub const DEFAULT_DIM_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Full,
    /// Free part plus the interaction restricted to `k >= sigma`.
    Cutoff,
    /// The interaction restricted to `k < sigma`, alone.
    BelowInteraction,
}

/// Particle levels tensored with the truncated Fock basis; index `level * fock_dim + fock_index`.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    levels: usize,
    fock: Arc<FockBasis>,
}

impl ProductSpace {
    pub fn new(levels: usize, fock: Arc<FockBasis>) -> Self {
        Self { levels, fock }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn fock(&self) -> &FockBasis {
        &self.fock
    }

    pub fn fock_dim(&self) -> usize {
        self.fock.dim()
    }

    pub fn dim(&self) -> usize {
        self.levels * self.fock.dim()
    }

    pub fn index(&self, level: usize, fock_index: usize) -> usize {
        level * self.fock.dim() + fock_index
    }

    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.fock.dim(), index % self.fock.dim())
    }

    /// `|level> (x) |vacuum>` as a vector.
    pub fn level_vacuum(&self, level: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.index(level, 0)] = C64::new(1.0, 0.0);
        v
    }

    /// Product indices whose boson content avoids the modes below `edge`.
    pub fn zero_soft_indices(&self, edge: usize) -> Vec<usize> {
        let m = self.fock.grid().len();
        (0..self.dim()).filter(|&i| self.fock.supported_in(self.split(i).1, edge..m)).collect()
    }
}

/// Hamiltonian matrix with the parameters it was built from.
#[derive(Clone, Debug)]
pub struct DeformedHamiltonian {
    pub theta: C64,
    pub g: f64,
    /// Snapped cutoff, if any.
    pub sigma: Option<f64>,
    pub part: Part,
    pub matrix: SparseOperator,
}

/// A validated model with its grid and basis enumerated once.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    space: ProductSpace,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        Self::with_cap(spec, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(spec: ModelSpec, cap: usize) -> Result<Self> {
        spec.validate()?;
        let grid = Arc::new(ModeGrid::new(spec.grid)?);
        let levels = spec.particle.n_levels();
        let fock = enumerate_basis_with_cap(grid, spec.nmax, cap / levels)
            .map_err(|_| Error::Capacity { dim: levels * crate::fock::fock_dimension(spec.grid.count, spec.nmax) as usize, cap })?;
        Ok(Self { spec, space: ProductSpace::new(levels, Arc::new(fock)) })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &ModeGrid {
        self.space.fock().grid()
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn level(&self, j: usize) -> f64 {
        self.spec.particle.levels[j]
    }

    pub fn check_level(&self, j: usize) -> Result<()> {
        let n = self.spec.particle.n_levels();
        if j >= n {
            return Err(Error::OutOfBounds { what: "level", index: j, len: n });
        }
        Ok(())
    }

    /// Snaps `sigma` to a cell edge, requiring it to lie strictly inside the grid.
    pub fn snap_sigma(&self, sigma: f64) -> Result<(usize, f64)> {
        let edge = self.grid().snap_edge(sigma)?;
        Ok((edge, self.grid().edges()[edge]))
    }

    pub fn cut_index(&self, sigma: f64) -> usize {
        cut_index(self.grid(), sigma)
    }

    pub fn radial_coupling(&self, theta: C64, window: Window) -> Vec<C64> {
        radial_coupling(&self.spec, self.grid(), theta, window)
    }

    pub fn hamiltonian(&self, theta: C64, g: f64, sigma: Option<f64>, part: Part) -> Result<DeformedHamiltonian> {
        if theta.norm() >= self.spec.theta_max || !theta.is_finite() {
            return Err(Error::invalid("theta", format!("|theta| = {} must be below {}", theta.norm(), self.spec.theta_max)));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::invalid("g", format!("coupling must be finite and non-negative, got {g}")));
        }
        let snapped = match sigma {
            Some(s) => Some(self.snap_sigma(s)?.1),
            None if part != Part::Full => {
                return Err(Error::invalid("sigma", "cutoff parts need a cutoff"));
            }
            None => None,
        };
        let window = match (part, snapped) {
            (Part::Full, _) => Window::All,
            (Part::Cutoff, Some(s)) => Window::Above(s),
            (Part::BelowInteraction, Some(s)) => Window::Below(s),
            _ => unreachable!(),
        };
        let matrix = match self.spec.kind {
            ModelKind::Nelson => self.assemble_nelson(theta, g, window, part != Part::BelowInteraction)?,
            ModelKind::QedToy => match part {
                Part::BelowInteraction => {
                    let s = snapped.expect("checked");
                    let full = self.assemble_qed(theta, g, Window::All)?;
                    let cut = self.assemble_qed(theta, g, Window::Above(s))?;
                    full.sub(&cut)
                }
                _ => self.assemble_qed(theta, g, window)?,
            },
        };
        let matrix = matrix.with_hermitian_hint(theta.im == 0.0 && part != Part::BelowInteraction);
        Ok(DeformedHamiltonian { theta, g, sigma: snapped, part, matrix })
    }

    fn free_triplets(&self, theta: C64) -> Vec<(usize, usize, C64)> {
        let scale = (-theta).exp();
        let energies = crate::fock::ops::second_quantized_diagonal(self.space.fock(), |k| k);
        let fd = self.space.fock_dim();
        let mut trip = Vec::with_capacity(self.dim());
        for (l, &lam) in self.spec.particle.levels.iter().enumerate() {
            for (i, &e) in energies.iter().enumerate() {
                trip.push((l * fd + i, l * fd + i, lam + scale * e));
            }
        }
        trip
    }

    fn kron_triplets(&self, small: &[Vec<C64>], factor: C64, op: &SparseOperator, trip: &mut Vec<(usize, usize, C64)>) {
        let fd = self.space.fock_dim();
        for (l, row) in small.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let f = factor * c;
                trip.extend(op.iter().map(|(r, col, v)| (l * fd + r, m * fd + col, f * v)));
            }
        }
    }

    fn assemble_nelson(&self, theta: C64, g: f64, window: Window, with_free: bool) -> Result<SparseOperator> {
        let mut trip = if with_free { self.free_triplets(theta) } else { Vec::new() };
        if g != 0.0 {
            let phi = field_phi(self.space.fock(), &self.radial_coupling(theta, window), false)?;
            self.kron_triplets(&self.spec.particle.coupling, C64::new(g, 0.0), &phi, &mut trip);
        }
        Ok(SparseOperator::from_triplets(self.dim(), trip))
    }

    fn assemble_qed(&self, theta: C64, g: f64, window: Window) -> Result<SparseOperator> {
        let mut trip = self.free_triplets(theta);
        if g != 0.0 {
            let phi = field_phi(self.space.fock(), &self.radial_coupling(theta, window), false)?;
            let p = self.spec.particle.momentum_matrix().expect("validated");
            self.kron_triplets(&p, g * (-theta).exp(), &phi, &mut trip);
            let konst = normal_ordering_constant(&self.spec, self.grid(), window);
            let sq = phi.matmul(&phi).shifted(C64::new(konst, 0.0));
            let n = self.spec.particle.n_levels();
            let identity: Vec<Vec<C64>> = (0..n)
                .map(|l| (0..n).map(|m| C64::new(if l == m { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect();
            self.kron_triplets(&identity, C64::new(0.5 * g * g, 0.0), &sq, &mut trip);
        }
        Ok(SparseOperator::from_triplets(self.dim(), trip))
    }

    /// Cutoff Hamiltonian plus `shift * projector`.
    pub fn renormalized_cutoff_hamiltonian(
        &self,
        theta: C64,
        g: f64,
        sigma: f64,
        shift: C64,
        projector: &SparseOperator,
    ) -> Result<DeformedHamiltonian> {
        if projector.dim() != self.dim() {
            return Err(Error::LengthMismatch { what: "projector", expected: self.dim(), got: projector.dim() });
        }
        check_idempotent(projector, 1e-8)?;
        let mut h = self.hamiltonian(theta, g, Some(sigma), Part::Cutoff)?;
        if shift != C64::new(0.0, 0.0) && projector.nnz() > 0 {
            h.matrix = h.matrix.add(&projector.scale(shift)).with_hermitian_hint(false);
        }
        Ok(h)
    }
}

/// Idempotency test on a few deterministic probe vectors.
pub fn check_idempotent(p: &SparseOperator, tol: f64) -> Result<()> {
    let n = p.dim();
    let mut defect: f64 = 0.0;
    for seed in 0..3u64 {
        let x: Vec<C64> = (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * (0.7548776662466927 + seed as f64 * 0.5698402909980532);
                C64::new((t * 12.9898).sin(), (t * 78.233).cos())
            })
            .collect();
        let px = p.matvec(&x);
        let ppx = p.matvec(&px);
        let scale = px.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        let d = px.iter().zip(&ppx).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / scale;
        defect = defect.max(d);
    }
    if defect > tol {
        return Err(Error::NotIdempotent { defect });
    }
    Ok(())
}

pub fn build_hamiltonian(spec: &ModelSpec, theta: C64, g: f64, sigma: Option<f64>, part: Part) -> Result<DeformedHamiltonian> {
    Model::new(spec.clone())?.hamiltonian(theta, g, sigma, part)
}

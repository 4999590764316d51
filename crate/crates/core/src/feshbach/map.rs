use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::linalg::{max_abs_diff, DenseLu};

/// Condition estimate above which the complementary block counts as singular.
pub const SINGULAR_COND: f64 = 1e14;

/// Feshbach-Schur reduction of a dense operator onto the range of an idempotent `P`.
///
/// With `V` an orthonormal basis of `Ran P` and `U` one of `Ran (1 - P)`, the
/// operator in the adapted basis `Q = [V U]` splits into blocks and the map is the
/// Schur complement of the lower-right block. `P` may be oblique.
#[derive(Clone, Debug)]
pub struct SchurReduction {
    blocks: Mat<C64>,
    basis: Mat<C64>,
    ran_dim: usize,
}

/// Reduced operator on `Ran P` with the conditioning of the inverted block.
#[derive(Clone, Debug)]
pub struct ReducedOperator {
    pub matrix: Mat<C64>,
    pub condition: f64,
}

fn range_basis(a: &Mat<C64>) -> Result<Mat<C64>> {
    let svd = a.thin_svd().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let rank = (0..s.nrows()).filter(|&i| s[i].re > 0.5).count();
    Ok(svd.U().subcols(0, rank).to_owned())
}

impl SchurReduction {
    pub fn new(h: &Mat<C64>, p: &Mat<C64>) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || p.nrows() != n || p.ncols() != n {
            return Err(Error::LengthMismatch { what: "projector", expected: n, got: p.nrows() });
        }
        let defect = max_abs_diff(&(p * p), p);
        let scale = p.norm_max().max(1.0);
        if defect > 1e-10 * scale {
            return Err(Error::NotIdempotent { defect });
        }
        let v = range_basis(p)?;
        let u = range_basis(&(Mat::<C64>::identity(n, n) - p))?;
        let ran_dim = v.ncols();
        if ran_dim + u.ncols() != n {
            return Err(Error::invalid("projector", "range and kernel do not span the space"));
        }
        let basis = Mat::from_fn(n, n, |i, j| if j < ran_dim { v[(i, j)] } else { u[(i, j - ran_dim)] });
        let lu = DenseLu::new(&basis)?;
        let blocks = lu.solve_mat(&(h * &basis));
        Ok(Self { blocks, basis, ran_dim })
    }

    /// Reduction onto `Ran V` along `ker W^*`, keeping the columns of `V` as the reduced basis.
    ///
    /// `V` and `W` are `n x r`; `W^* V` must be invertible, and `P = V (W^* V)^{-1} W^*`.
    pub fn with_basis(h: &Mat<C64>, v: &Mat<C64>, w: &Mat<C64>) -> Result<Self> {
        let n = h.nrows();
        let r = v.ncols();
        if v.nrows() != n || w.nrows() != n || w.ncols() != r {
            return Err(Error::LengthMismatch { what: "range basis", expected: n, got: v.nrows() });
        }
        let gram = w.adjoint() * v;
        let gram_lu = DenseLu::new(&gram)?;
        // dual basis normalized so that W'^* V = 1
        let dual = w * gram_lu.solve_mat(&Mat::<C64>::identity(r, r)).adjoint();
        let p = v * dual.adjoint();
        let u = range_basis(&(Mat::<C64>::identity(n, n) - &p))?;
        if r + u.ncols() != n {
            return Err(Error::invalid("projector", "range and kernel do not span the space"));
        }
        let basis = Mat::from_fn(n, n, |i, j| if j < r { v[(i, j)] } else { u[(i, j - r)] });
        let lu = DenseLu::new(&basis)?;
        let blocks = lu.solve_mat(&(h * &basis));
        Ok(Self { blocks, basis, ran_dim: r })
    }

    pub fn from_sparse(h: &SparseOperator, p: &SparseOperator) -> Result<Self> {
        Self::new(&h.to_dense(), &p.to_dense())
    }

    pub fn ran_dim(&self) -> usize {
        self.ran_dim
    }

    /// Adapted basis `Q`: range columns first, then the complement.
    pub fn basis(&self) -> &Mat<C64> {
        &self.basis
    }

    /// Basis of `Ran P` used for the reduced operator.
    pub fn range_basis(&self) -> Mat<C64> {
        self.basis.subcols(0, self.ran_dim).to_owned()
    }

    /// `F_P(H - z)` on `Ran P`.
    pub fn map_of(&self, z: C64) -> Result<ReducedOperator> {
        let n = self.blocks.nrows();
        let r = self.ran_dim;
        let b11 = Mat::from_fn(r, r, |i, j| self.blocks[(i, j)] - if i == j { z } else { C64::new(0.0, 0.0) });
        if r == n {
            return Ok(ReducedOperator { matrix: b11, condition: 1.0 });
        }
        let m = n - r;
        let b12 = Mat::from_fn(r, m, |i, j| self.blocks[(i, r + j)]);
        let b21 = Mat::from_fn(m, r, |i, j| self.blocks[(r + i, j)]);
        let b22 = Mat::from_fn(m, m, |i, j| self.blocks[(r + i, r + j)] - if i == j { z } else { C64::new(0.0, 0.0) });
        let lu = DenseLu::new(&b22).map_err(|_| Error::Singular { z, cond: f64::INFINITY })?;
        let condition = lu.condition_estimate();
        if !(condition < SINGULAR_COND) {
            return Err(Error::Singular { z, cond: condition });
        }
        let x = lu.solve_mat(&b21);
        Ok(ReducedOperator { matrix: b11 - b12 * x, condition })
    }

    /// Entry `(i, i)` of `F_P(H - z)` and its `z`-derivative.
    pub fn diagonal_entry(&self, z: C64, i: usize) -> Result<(C64, C64)> {
        let n = self.blocks.nrows();
        let r = self.ran_dim;
        if i >= r {
            return Err(Error::OutOfBounds { what: "reduced index", index: i, len: r });
        }
        let b11 = self.blocks[(i, i)] - z;
        if r == n {
            return Ok((b11, C64::new(-1.0, 0.0)));
        }
        let m = n - r;
        let b22 = Mat::from_fn(m, m, |a, b| self.blocks[(r + a, r + b)] - if a == b { z } else { C64::new(0.0, 0.0) });
        let lu = DenseLu::new(&b22).map_err(|_| Error::Singular { z, cond: f64::INFINITY })?;
        let condition = lu.condition_estimate();
        if !(condition < SINGULAR_COND) {
            return Err(Error::Singular { z, cond: condition });
        }
        let col: Vec<C64> = (0..m).map(|a| self.blocks[(r + a, i)]).collect();
        let x = lu.solve(&col);
        let x2 = lu.solve(&x);
        let row = |v: &[C64]| (0..m).map(|a| self.blocks[(i, r + a)] * v[a]).sum::<C64>();
        Ok((b11 - row(&x), C64::new(-1.0, 0.0) - row(&x2)))
    }

    /// Scalar `b(z)` for a rank-one projection.
    pub fn b_of(&self, z: C64) -> Result<C64> {
        if self.ran_dim != 1 {
            return Err(Error::invalid("projector", format!("b(z) needs rank one, got rank {}", self.ran_dim)));
        }
        Ok(self.map_of(z)?.matrix[(0, 0)])
    }
}

/// `F_P(H)` in an orthonormal basis of `Ran P`.
pub fn feshbach_map(h: &SparseOperator, p: &SparseOperator) -> Result<ReducedOperator> {
    SchurReduction::from_sparse(h, p)?.map_of(C64::new(0.0, 0.0))
}

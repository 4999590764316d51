//! Vector helpers, LU wrappers and condition estimates shared by the solvers.

pub mod schur;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;

pub use schur::{complex_schur, Schur};

/// `<a, b>`, conjugate-linear in `a`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bilinear pairing `sum a_i b_i`.
pub fn bilinear(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(a: &mut [C64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
    n
}

pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn column(m: &Mat<C64>, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn to_column_mat(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn mat_vec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

pub fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn norm_one_dense(a: &Mat<C64>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Estimate of `||A^{-1}||_1` from solves with `A` and `A^dagger` (Hager's method, complex form).
pub fn inverse_norm_one_estimate(
    n: usize,
    solve: impl Fn(&[C64]) -> Vec<C64>,
    solve_adjoint: impl Fn(&[C64]) -> Vec<C64>,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let one_norm = |v: &[C64]| v.iter().map(|x| x.norm()).sum::<f64>();
    let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for iter in 0..5 {
        let y = solve(&x);
        let e = one_norm(&y);
        if iter > 0 && e <= est {
            break;
        }
        est = e;
        let xi: Vec<C64> = y.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { C64::new(1.0, 0.0) }).collect();
        let z = solve_adjoint(&xi);
        let (j, zmax) = z.iter().enumerate().map(|(i, v)| (i, v.norm())).fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if iter > 0 && (zmax <= dot(&z, &x).re || j == last_j) {
            break;
        }
        last_j = j;
        x = vec![C64::new(0.0, 0.0); n];
        x[j] = C64::new(1.0, 0.0);
    }
    let alt: Vec<C64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        })
        .collect();
    let alt_est = 2.0 * one_norm(&solve(&alt)) / (3.0 * n as f64);
    est.max(alt_est)
}

/// Sparse LU of `H - z`.
pub struct ShiftedLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, C64>,
    dim: usize,
    z: C64,
    norm_one: f64,
}

impl ShiftedLu {
    pub fn new(h: &SparseOperator, z: C64) -> Result<Self> {
        let a = h.to_faer_shifted(z)?;
        let lu = a.sp_lu().map_err(|_| Error::Singular { z, cond: f64::INFINITY })?;
        let norm_one = h.shifted(z).norm_one();
        let out = Self { lu, dim: h.dim(), z, norm_one };
        // a zero pivot shows up as non-finite output
        let probe = out.solve(&vec![C64::new(1.0, 0.0); out.dim]);
        if probe.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular { z, cond: f64::INFINITY });
        }
        Ok(out)
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut m = to_column_mat(b);
        self.lu.solve_in_place(&mut m);
        column(&m, 0)
    }

    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let mut m = to_column_mat(b);
        self.lu.solve_adjoint_in_place(&mut m);
        column(&m, 0)
    }

    /// One-norm condition number estimate of `H - z`.
    pub fn condition_estimate(&self) -> f64 {
        self.norm_one * inverse_norm_one_estimate(self.dim, |b| self.solve(b), |b| self.solve_adjoint(b))
    }
}

/// Dense LU wrapper with the same interface.
pub struct DenseLu {
    lu: faer::linalg::solvers::PartialPivLu<C64>,
    dim: usize,
    norm_one: f64,
}

impl DenseLu {
    pub fn new(a: &Mat<C64>) -> Result<Self> {
        let lu = a.partial_piv_lu();
        let out = Self { lu, dim: a.nrows(), norm_one: norm_one_dense(a) };
        let probe = out.solve(&vec![C64::new(1.0, 0.0); out.dim]);
        if probe.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular { z: C64::new(0.0, 0.0), cond: f64::INFINITY });
        }
        Ok(out)
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut m = to_column_mat(b);
        self.lu.solve_in_place(&mut m);
        column(&m, 0)
    }

    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let mut m = to_column_mat(b);
        self.lu.solve_adjoint_in_place(&mut m);
        column(&m, 0)
    }

    pub fn solve_mat(&self, b: &Mat<C64>) -> Mat<C64> {
        self.lu.solve(b)
    }

    pub fn condition_estimate(&self) -> f64 {
        self.norm_one * inverse_norm_one_estimate(self.dim, |b| self.solve(b), |b| self.solve_adjoint(b))
    }
}

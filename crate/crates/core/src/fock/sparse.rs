use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Entries with modulus at or below this are not stored.
pub const DROP_TOL: f64 = 1e-14;

/// Square complex matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian_hint: bool,
}

impl SparseOperator {
    pub fn zero(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new(), hermitian_hint: true }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(d: &[C64]) -> Self {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut acc = C64::new(0.0, 0.0);
                while i < row.len() && row[i].0 == c {
                    acc += row[i].1;
                    i += 1;
                }
                if acc.norm() > DROP_TOL {
                    cols.push(c);
                    vals.push(acc);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals, hermitian_hint: false }
    }

    pub fn from_dense(m: &Mat<C64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols());
        Self::from_triplets(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j, m[(i, j)]))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn with_hermitian_hint(mut self, hint: bool) -> Self {
        self.hermitian_hint = hint;
        self
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `A^dagger x`.
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.cols[k]] += self.vals[k].conj() * x[r];
            }
        }
        y
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v.conj())));
        out.hermitian_hint = self.hermitian_hint;
        out
    }

    pub fn map_values(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (r, c, f(v))))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_values(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.iter().chain(other.iter().map(|(r, c, v)| (r, c, -v))))
    }

    /// `self - z` on the diagonal.
    pub fn shifted(&self, z: C64) -> Self {
        Self::from_triplets(self.dim, self.iter().chain((0..self.dim).map(|i| (i, i, -z))))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut trip = Vec::new();
        for (r, k, a) in self.iter() {
            for (c, b) in other.row(k) {
                trip.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.dim, trip)
    }

    /// Principal submatrix on the given (sorted, distinct) indices.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in indices.iter().enumerate() {
            map[old] = new;
        }
        let trip: Vec<_> = indices
            .iter()
            .enumerate()
            .flat_map(|(nr, &r)| {
                let map = &map;
                self.row(r).filter_map(move |(c, v)| (map[c] != usize::MAX).then(|| (nr, map[c], v)))
            })
            .collect();
        let mut out = Self::from_triplets(indices.len(), trip);
        out.hermitian_hint = self.hermitian_hint;
        out
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut col = vec![0.0; self.dim];
        for (_, c, v) in self.iter() {
            col[c] += v.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol * self.max_abs().max(1.0)
    }

    /// Column-compressed copy of `self - z` for the sparse LU. The diagonal is always
    /// stored so the pattern does not depend on `z`.
    pub fn to_faer_shifted(&self, z: C64) -> Result<faer::sparse::SparseColMat<usize, C64>> {
        use faer::sparse::{SparseColMat, Triplet};
        let mut trip: Vec<Triplet<usize, usize, C64>> = Vec::with_capacity(self.nnz() + self.dim);
        for r in 0..self.dim {
            let mut diag = -z;
            for (c, v) in self.row(r) {
                if c == r {
                    diag += v;
                } else {
                    trip.push(Triplet::new(r, c, v));
                }
            }
            trip.push(Triplet::new(r, r, diag));
        }
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &trip)
            .map_err(|e| Error::invalid("sparse matrix", format!("{e:?}")))
    }
}

//! Complex Schur decomposition and reordering for the small projected matrices of
//! the Krylov-Schur iteration.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Rotation `[c s; -conj(s) c]` mapping `(f, g)` to `(r, 0)`.
pub fn givens(f: C64, g: C64) -> (f64, C64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let fa = f.norm();
    let rho = fa.hypot(g.norm());
    let phase = f / fa;
    (fa / rho, phase * g.conj() / rho)
}

fn rot_rows(a: &mut Mat<C64>, i: usize, k: usize, c: f64, s: C64, cols: std::ops::Range<usize>) {
    for j in cols {
        let x = a[(i, j)];
        let y = a[(k, j)];
        a[(i, j)] = x * c + s * y;
        a[(k, j)] = y * c - s.conj() * x;
    }
}

fn rot_cols(a: &mut Mat<C64>, i: usize, k: usize, c: f64, s: C64, rows: std::ops::Range<usize>) {
    for r in rows {
        let x = a[(r, i)];
        let y = a[(r, k)];
        a[(r, i)] = x * c + y * s.conj();
        a[(r, k)] = y * c - x * s;
    }
}

/// Schur form `A = Z T Z^dagger` with `T` upper triangular and `Z` unitary.
pub struct Schur {
    pub t: Mat<C64>,
    pub z: Mat<C64>,
}

pub fn complex_schur(a: &Mat<C64>) -> Result<Schur> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut t = a.clone();
    let mut z = Mat::<C64>::identity(n, n);

    // Hessenberg reduction with Givens rotations.
    for col in 0..n.saturating_sub(2) {
        for row in (col + 2..n).rev() {
            let (c, s) = givens(t[(row - 1, col)], t[(row, col)]);
            rot_rows(&mut t, row - 1, row, c, s, col..n);
            rot_cols(&mut t, row - 1, row, c, s, 0..n);
            rot_cols(&mut z, row - 1, row, c, s, 0..n);
            t[(row, col)] = ZERO;
        }
    }

    let eps = f64::EPSILON;
    let mut hi = n.saturating_sub(1);
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = 100 * n.max(1);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let scale = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if t[(l, l - 1)].norm() <= eps * scale.max(f64::MIN_POSITIVE) {
                t[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NoConvergence { method: "complex Schur", iterations: total });
        }
        let mu = if iter % 11 == 10 {
            t[(hi, hi)] + t[(hi, hi - 1)].norm() * C64::new(0.75, 0.5)
        } else {
            let a11 = t[(hi - 1, hi - 1)];
            let a12 = t[(hi - 1, hi)];
            let a21 = t[(hi, hi - 1)];
            let a22 = t[(hi, hi)];
            let half = (a11 - a22) * 0.5;
            let disc = (half * half + a12 * a21).sqrt();
            let mean = (a11 + a22) * 0.5;
            let (r1, r2) = (mean + disc, mean - disc);
            if (r1 - a22).norm() < (r2 - a22).norm() {
                r1
            } else {
                r2
            }
        };
        let mut x = t[(l, l)] - mu;
        let mut y = t[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = t[(k, k - 1)];
                y = t[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let start = if k > l { k - 1 } else { l };
            rot_rows(&mut t, k, k + 1, c, s, start..n);
            rot_cols(&mut t, k, k + 1, c, s, 0..(k + 3).min(hi + 1));
            rot_cols(&mut z, k, k + 1, c, s, 0..n);
            if k > l {
                t[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t, z })
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swaps diagonal entries `k` and `k + 1`, keeping `A = Z T Z^dagger`.
    pub fn swap(&mut self, k: usize) {
        let n = self.t.nrows();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        rot_rows(&mut self.t, k, k + 1, c, s, k + 2..n);
        rot_cols(&mut self.t, k, k + 1, c, s, 0..k);
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
        rot_cols(&mut self.z, k, k + 1, c, s, 0..n);
    }

    /// Moves the selected diagonal entries to the leading block, preserving their relative order.
    pub fn reorder(&mut self, select: &[bool]) {
        let n = self.t.nrows();
        assert_eq!(select.len(), n);
        let mut sel = select.to_vec();
        let mut target = 0;
        for i in 0..n {
            if sel[i] {
                let mut pos = i;
                while pos > target {
                    self.swap(pos - 1);
                    sel.swap(pos - 1, pos);
                    pos -= 1;
                }
                target += 1;
            }
        }
    }

    /// Eigenvectors of `T` (columns, unit norm) by back substitution.
    pub fn triangular_eigenvectors(&self) -> Mat<C64> {
        let n = self.t.nrows();
        let norm = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).map(|(i, j)| self.t[(i, j)].norm()).fold(0.0, f64::max);
        let small = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
        let mut v = Mat::<C64>::zeros(n, n);
        for i in 0..n {
            let lam = self.t[(i, i)];
            v[(i, i)] = C64::new(1.0, 0.0);
            for r in (0..i).rev() {
                let mut acc = ZERO;
                for c in r + 1..=i {
                    acc += self.t[(r, c)] * v[(c, i)];
                }
                let mut d = self.t[(r, r)] - lam;
                if d.norm() < small {
                    d = C64::new(small, 0.0);
                }
                v[(r, i)] = -acc / d;
            }
            let nrm = (0..=i).map(|r| v[(r, i)].norm_sqr()).sum::<f64>().sqrt();
            for r in 0..=i {
                v[(r, i)] /= nrm;
            }
        }
        v
    }
}

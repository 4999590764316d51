use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;

/// Largest dimension accepted by the dense paths.
pub const DENSE_CAP: usize = 3000;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec<C64>,
}

/// Full eigendecomposition, sorted by real part then imaginary part.
pub fn dense_spectrum(h: &SparseOperator) -> Result<Vec<EigenPair>> {
    dense_spectrum_with_cap(h, DENSE_CAP)
}

pub fn dense_spectrum_with_cap(h: &SparseOperator, cap: usize) -> Result<Vec<EigenPair>> {
    let n = h.dim();
    if n > cap {
        return Err(Error::Capacity { dim: n, cap });
    }
    let a = h.to_dense();
    let evd = a.eigen().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let mut vector: Vec<C64> = (0..n).map(|i| u[(i, k)]).collect();
            crate::linalg::normalize(&mut vector);
            EigenPair { value: s[k], vector }
        })
        .collect();
    pairs.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok(pairs)
}

/// Eigenvalues only.
pub fn dense_eigenvalues(h: &SparseOperator) -> Result<Vec<C64>> {
    let n = h.dim();
    if n > DENSE_CAP {
        return Err(Error::Capacity { dim: n, cap: DENSE_CAP });
    }
    let mut v = h.to_dense().eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(v)
}

/// Spectral decomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

impl HermitianSpectrum {
    pub fn new(h: &SparseOperator) -> Result<Self> {
        let n = h.dim();
        if n > DENSE_CAP {
            return Err(Error::Capacity { dim: n, cap: DENSE_CAP });
        }
        let evd = h.to_dense().self_adjoint_eigen(faer::Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let values = (0..n).map(|k| evd.S().column_vector()[k].re).collect();
        Ok(Self { values, vectors: evd.U().to_owned() })
    }

    /// Expansion coefficients `<e_n, psi>`.
    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.values.len();
        (0..n).map(|k| (0..n).map(|i| self.vectors[(i, k)].conj() * psi[i]).sum()).collect()
    }

    /// `sum_n c_n f(E_n) e_n`.
    pub fn apply(&self, psi: &[C64], f: impl Fn(f64) -> C64) -> Vec<C64> {
        let c = self.coefficients(psi);
        let n = self.values.len();
        let weights: Vec<C64> = c.iter().zip(&self.values).map(|(c, &e)| c * f(e)).collect();
        (0..n).map(|i| (0..n).map(|k| self.vectors[(i, k)] * weights[k]).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_sorted() {
        let d: Vec<C64> = [3.0, -1.0, 2.0].iter().map(|&x| C64::new(x, 0.5)).collect();
        let pairs = dense_spectrum(&SparseOperator::diagonal(&d)).unwrap();
        let vals: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn cap_enforced() {
        let h = SparseOperator::identity(10);
        assert!(matches!(dense_spectrum_with_cap(&h, 5), Err(Error::Capacity { .. })));
    }
}

use num_complex::Complex64 as C64;

use super::basis::FockBasis;
use super::sparse::SparseOperator;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Truncated creation or annihilation operator for one mode.
///
/// Creation out of the top shell is dropped, so `a^dagger` is the adjoint of `a`
/// restricted to the truncated space.
pub fn ladder(basis: &FockBasis, mode: usize, kind: Ladder) -> Result<SparseOperator> {
    if mode >= basis.grid().len() {
        return Err(Error::OutOfBounds { what: "mode", index: mode, len: basis.grid().len() });
    }
    let mut trip = Vec::new();
    for (s, state) in basis.states().iter().enumerate() {
        let m = state.occupation(mode);
        if m == 0 {
            continue;
        }
        let t = basis.index_of(&state.without(mode).expect("occupied")).expect("lower shell present");
        let amp = C64::new((m as f64).sqrt(), 0.0);
        match kind {
            Ladder::Annihilate => trip.push((t, s, amp)),
            Ladder::Create => trip.push((s, t, amp)),
        }
    }
    Ok(SparseOperator::from_triplets(basis.dim(), trip))
}

/// Diagonal of `sum_n f(k_n) a_n^dagger a_n`.
pub fn second_quantized_diagonal(basis: &FockBasis, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let values: Vec<f64> = basis.grid().modes().iter().map(|m| f(m.k)).collect();
    basis.states().iter().map(|s| s.sum_over(&values)).collect()
}

/// `scale * dGamma(omega)` with `omega(k) = k`; `scale = exp(-theta)` gives the deformed field energy.
pub fn field_energy(basis: &FockBasis, scale: C64) -> SparseOperator {
    let d: Vec<C64> = second_quantized_diagonal(basis, |k| k).into_iter().map(|x| scale * x).collect();
    SparseOperator::diagonal(&d).with_hermitian_hint(scale.im == 0.0)
}

/// `dGamma(omega^p)`.
pub fn dgamma_power(basis: &FockBasis, exponent: f64) -> SparseOperator {
    let d: Vec<C64> =
        second_quantized_diagonal(basis, |k| k.powf(exponent)).into_iter().map(|x| C64::new(x, 0.0)).collect();
    SparseOperator::diagonal(&d).with_hermitian_hint(true)
}

pub fn number_operator(basis: &FockBasis) -> SparseOperator {
    dgamma_power(basis, 0.0)
}

/// `a(g) + a^dagger(g')` for the discretized one-boson coupling `g`.
///
/// With `conjugate_on_create` the creation part uses `conj(g)` and the operator is
/// the usual Hermitian field for real deformation. Without it both parts use `g`,
/// which is the analytic continuation in the deformation parameter.
pub fn field_phi(basis: &FockBasis, coupling: &[C64], conjugate_on_create: bool) -> Result<SparseOperator> {
    let m = basis.grid().len();
    if coupling.len() != m {
        return Err(Error::LengthMismatch { what: "coupling", expected: m, got: coupling.len() });
    }
    let mut trip = Vec::new();
    for (s, state) in basis.states().iter().enumerate() {
        for (mode, occ) in state.runs() {
            let t = basis.index_of(&state.without(mode).expect("occupied")).expect("lower shell present");
            let root = (occ as f64).sqrt();
            let g = coupling[mode];
            let gc = if conjugate_on_create { g.conj() } else { g };
            trip.push((t, s, g * root));
            trip.push((s, t, gc * root));
        }
    }
    Ok(SparseOperator::from_triplets(basis.dim(), trip))
}

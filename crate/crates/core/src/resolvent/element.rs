use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::linalg::{dot, ShiftedLu};
use crate::model::{Model, ProductSpace};

/// Condition estimate at which a resolvent solve is rejected.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug)]
pub struct ResolventValue {
    pub value: C64,
    pub condition: f64,
}

/// `<left, (H - z)^{-1} right>`, conjugate-linear in `left`.
pub fn resolvent_element(h: &SparseOperator, left: &[C64], right: &[C64], z: C64) -> Result<ResolventValue> {
    let n = h.dim();
    for v in [left, right] {
        if v.len() != n {
            return Err(Error::LengthMismatch { what: "state", expected: n, got: v.len() });
        }
    }
    let lu = ShiftedLu::new(h, z)?;
    let condition = lu.condition_estimate();
    if !(condition < COND_LIMIT) {
        return Err(Error::Singular { z, cond: condition });
    }
    let x = lu.solve(right);
    Ok(ResolventValue { value: dot(left, &x), condition })
}

/// `|| dGamma(omega^{-1/2}) (1 - P_vacuum) psi ||` on the product space.
pub fn dprime_norm(space: &ProductSpace, psi: &[C64]) -> f64 {
    let fock = space.fock();
    let inv_sqrt: Vec<f64> = fock.grid().modes().iter().map(|m| m.k.powf(-0.5)).collect();
    let weights: Vec<f64> = fock.states().iter().map(|s| s.sum_over(&inv_sqrt)).collect();
    psi.iter()
        .enumerate()
        .map(|(i, c)| {
            let (_, f) = space.split(i);
            if f == 0 {
                0.0
            } else {
                (weights[f] * c).norm_sqr()
            }
        })
        .sum::<f64>()
        .sqrt()
}

/// Analytic one-boson amplitude `f(k)`, evaluated at complex momenta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `amp * k^power * exp(-(k / scale)^2)`.
    Gaussian { amp: f64, power: f64, scale: f64 },
}

impl Profile {
    pub fn eval(&self, k: C64) -> C64 {
        match *self {
            Profile::Gaussian { amp, power, scale } => {
                let q = k / scale;
                amp * k.powf(power) * (-(q * q)).exp()
            }
        }
    }
}

/// Dilation-analytic vector: vacuum amplitudes per level plus one-boson profiles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TestVector {
    pub vacuum: Vec<(usize, f64)>,
    pub one_boson: Vec<(usize, Profile)>,
}

impl TestVector {
    /// `|j> (x) |vacuum>`.
    pub fn level(j: usize) -> Self {
        Self { vacuum: vec![(j, 1.0)], one_boson: Vec::new() }
    }

    pub fn with_boson(mut self, level: usize, profile: Profile) -> Self {
        self.one_boson.push((level, profile));
        self
    }

    fn raw(&self, model: &Model, theta: C64) -> Vec<C64> {
        let space = model.space();
        let mut v = vec![C64::new(0.0, 0.0); space.dim()];
        for &(l, a) in &self.vacuum {
            v[space.index(l, 0)] += a;
        }
        let scale = (-theta).exp();
        let pre = (-0.5 * theta).exp();
        for &(l, p) in &self.one_boson {
            for (n, m) in model.grid().modes().iter().enumerate() {
                let idx = space.fock().one_boson(n).expect("one-boson shell present");
                v[space.index(l, idx)] += pre * p.eval(scale * m.k) * m.weight.sqrt();
            }
        }
        v
    }

    /// Deformed vector `U_theta psi`, scaled so the undeformed vector has unit norm.
    pub fn deformed(&self, model: &Model, theta: C64) -> Vec<C64> {
        let n0 = crate::linalg::norm(&self.raw(model, C64::new(0.0, 0.0)));
        self.raw(model, theta).into_iter().map(|x| x / n0).collect()
    }
}

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::GridLayout;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Linear coupling `g C (x) phi(h)`.
    Nelson,
    /// Minimal-coupling toy: `g e^{-theta} P (x) phi(f) + g^2/2 (phi(f)^2 - const)`.
    QedToy,
}

/// Finite-level particle: energies, field coupling matrix and (toy model only) momentum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSystem {
    pub levels: Vec<f64>,
    /// Hermitian coupling matrix; entries are `[re, im]` pairs in config files.
    pub coupling: Vec<Vec<C64>>,
    /// Real antisymmetric `A`; the momentum matrix is `P = iA`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<Vec<Vec<f64>>>,
}

impl ParticleSystem {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn coupling_entry(&self, l: usize, m: usize) -> C64 {
        self.coupling[l][m]
    }

    /// `P = iA` as a complex matrix.
    pub fn momentum_matrix(&self) -> Option<Vec<Vec<C64>>> {
        self.momentum
            .as_ref()
            .map(|a| a.iter().map(|row| row.iter().map(|&x| C64::new(0.0, x)).collect()).collect())
    }

    /// Distance from level `j` to the rest of the particle spectrum.
    pub fn isolation(&self, j: usize) -> f64 {
        self.levels
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &l)| (l - self.levels[j]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.levels.len();
        if n == 0 {
            return Err(Error::invalid("particle", "at least one level required"));
        }
        if self.levels.iter().any(|l| !l.is_finite()) || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("particle.levels", "levels must be finite and strictly increasing"));
        }
        if self.coupling.len() != n || self.coupling.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("particle.coupling", format!("expected a {n}x{n} matrix")));
        }
        for i in 0..n {
            for j in 0..n {
                if self.coupling[i][j] != self.coupling[j][i].conj() {
                    return Err(Error::invalid("particle.coupling", format!("not hermitian at ({i}, {j})")));
                }
            }
        }
        if let Some(a) = &self.momentum {
            if a.len() != n || a.iter().any(|r| r.len() != n) {
                return Err(Error::invalid("particle.momentum", format!("expected a {n}x{n} matrix")));
            }
            for i in 0..n {
                for j in 0..n {
                    if a[i][j] != -a[j][i] {
                        return Err(Error::invalid("particle.momentum", format!("not antisymmetric at ({i}, {j})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Gaussian ultraviolet form factor `chi(k) = exp(-k^2 / lambda^2)` with infrared exponent `mu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFactor {
    pub lambda: f64,
    pub mu: f64,
}

impl FormFactor {
    pub fn chi(&self, k: C64) -> C64 {
        (-(k * k) / (self.lambda * self.lambda)).exp()
    }
}

fn default_theta_max() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub nmax: usize,
    /// Ionization threshold marker; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Largest admissible `|theta|`.
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    pub particle: ParticleSystem,
    pub form: FormFactor,
    pub grid: GridLayout,
}

impl ModelSpec {
    /// Two levels at 0 and 1, 24 geometric modes on `[1e-4, 6] * lambda`, two bosons, `lambda = 2`, `mu = 1/2`.
    pub fn default_nelson() -> Self {
        let one = C64::new(1.0, 0.0);
        Self {
            kind: ModelKind::Nelson,
            nmax: 2,
            threshold: None,
            theta_max: default_theta_max(),
            particle: ParticleSystem { levels: vec![0.0, 1.0], coupling: vec![vec![one, one], vec![one, one]], momentum: None },
            form: FormFactor { lambda: 2.0, mu: 0.5 },
            grid: GridLayout::geometric(2e-4, 12.0, 24),
        }
    }

    /// Default toy instance: same levels and grid, `mu = 0`, `P = [[0, -i], [i, 0]]`.
    pub fn default_qed_toy() -> Self {
        let mut s = Self::default_nelson();
        s.kind = ModelKind::QedToy;
        s.form.mu = 0.0;
        s.particle.momentum = Some(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.particle.validate()?;
        self.grid.validate()?;
        if !(self.form.lambda > 0.0) {
            return Err(Error::invalid("form.lambda", "must be positive"));
        }
        if !(self.form.mu >= 0.0) {
            return Err(Error::invalid("form.mu", "must be non-negative"));
        }
        if !(self.theta_max > 0.0) {
            return Err(Error::invalid("theta_max", "must be positive"));
        }
        match self.kind {
            ModelKind::Nelson if self.form.mu <= 0.0 => Err(Error::invalid("form.mu", "the Nelson model needs mu > 0")),
            ModelKind::QedToy if self.form.mu != 0.0 => Err(Error::invalid("form.mu", "the toy model runs at mu = 0")),
            ModelKind::QedToy if self.particle.momentum.is_none() => {
                Err(Error::invalid("particle.momentum", "required for the toy model"))
            }
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::element::{resolvent_element, TestVector};
use crate::error::{Error, Result};
use crate::model::{Model, Part};
use crate::table::{fmt_f64, Table};

/// Wedge-annulus sample set around a resonance.
#[derive(Clone, Debug)]
pub struct ContinuationDomain {
    pub center: C64,
    pub phi1: f64,
    pub phi2: f64,
    pub radius_factor: f64,
    /// Length the radii are measured in; `|Im center|` unless set explicitly.
    pub scale: f64,
    pub samples: Vec<C64>,
}

/// Angle of `w` in `[phi1, phi1 + 2 pi)`, allowing rounding just below `phi1`.
fn angle_from(w: C64, phi1: f64) -> f64 {
    let mut a = w.arg();
    while a < phi1 - 1e-12 {
        a += 2.0 * PI;
    }
    while a >= phi1 + 2.0 * PI {
        a -= 2.0 * PI;
    }
    a
}

impl ContinuationDomain {
    /// Three rays over `[phi1, phi2]` with six radii geometric from `0.045` to `0.45` of `|Im center|`.
    pub fn standard(center: C64, phi1: f64, phi2: f64) -> Result<Self> {
        Self::rays(center, phi1, phi2, 3, 6, 0.045, 0.45)
    }

    pub fn rays(center: C64, phi1: f64, phi2: f64, rays: usize, radii: usize, r_lo: f64, r_hi: f64) -> Result<Self> {
        Self::rays_scaled(center, center.im.abs(), phi1, phi2, rays, radii, r_lo, r_hi)
    }

    /// As [`ContinuationDomain::standard`] with radii in units of `scale`, for centers on the real axis.
    pub fn standard_scaled(center: C64, scale: f64, phi1: f64, phi2: f64) -> Result<Self> {
        Self::rays_scaled(center, scale, phi1, phi2, 3, 6, 0.045, 0.45)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn rays_scaled(
        center: C64,
        scale: f64,
        phi1: f64,
        phi2: f64,
        rays: usize,
        radii: usize,
        r_lo: f64,
        r_hi: f64,
    ) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("domain", format!("radius scale {scale} must be positive")));
        }
        let mut samples = Vec::with_capacity(rays * radii);
        for a in 0..rays {
            let phi = if rays == 1 { phi1 } else { phi1 + (phi2 - phi1) * a as f64 / (rays - 1) as f64 };
            for r in 0..radii {
                let frac = if radii == 1 { r_lo } else { r_lo * (r_hi / r_lo).powf(r as f64 / (radii - 1) as f64) };
                samples.push(center + C64::from_polar(frac * scale, phi));
            }
        }
        let d = Self { center, phi1, phi2, radius_factor: 0.5, scale, samples };
        d.validate()?;
        Ok(d)
    }

    /// `count` points on the circle `|z - center| = frac |Im center|`; not a wedge domain.
    pub fn circle(center: C64, frac: f64, count: usize) -> Self {
        let scale = center.im.abs();
        let r = frac * scale;
        let samples = (0..count).map(|i| center + C64::from_polar(r, 2.0 * PI * i as f64 / count as f64)).collect();
        Self { center, phi1: -PI, phi2: PI, radius_factor: frac.max(0.5), scale, samples }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi1 < PI / 2.0 && self.phi2 > PI && self.phi2 - self.phi1 < 2.0 * PI) {
            return Err(Error::invalid("domain", format!("need phi1 < pi/2 < pi < phi2, got [{}, {}]", self.phi1, self.phi2)));
        }
        let limit = self.radius_factor * self.scale;
        for &z in &self.samples {
            let w = z - self.center;
            let a = angle_from(w, self.phi1);
            if !(w.norm() < limit && a <= self.phi2 + 1e-12) {
                return Err(Error::invalid("domain", format!("sample {z} outside the wedge-annulus")));
            }
        }
        Ok(())
    }
}

/// `Re(e^theta (lambda - z)) >= 0`.
pub fn wedge_ok(theta: C64, lambda: C64, z: C64) -> bool {
    (theta.exp() * (lambda - z)).re >= 0.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaSchedule {
    Fixed(f64),
    /// `r^beta g^{-1/(3/2 + mu)}` with `r = |z - center|`.
    PowerLaw,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanSample {
    pub z: C64,
    pub value: Option<C64>,
    pub condition: f64,
    pub sigma_used: f64,
    pub wedge_ok: bool,
}

#[derive(Clone, Debug)]
pub struct ContinuationScan {
    pub theta: C64,
    pub samples: Vec<ScanSample>,
}

impl ContinuationScan {
    /// Evaluated samples as `(z, F(z))`.
    pub fn values(&self) -> Vec<(C64, C64)> {
        self.samples.iter().filter_map(|s| s.value.map(|v| (s.z, v))).collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["z_re", "z_im", "F_re", "F_im", "cond_estimate", "sigma_used", "wedge_ok"]);
        for s in &self.samples {
            let (fr, fi) = s.value.map_or((String::new(), String::new()), |v| (fmt_f64(v.re), fmt_f64(v.im)));
            t.push(vec![fmt_f64(s.z.re), fmt_f64(s.z.im), fr, fi, fmt_f64(s.condition), fmt_f64(s.sigma_used), s.wedge_ok.to_string()]);
        }
        t
    }
}

/// Continued matrix element `F(z) = <psi_conj(theta), (H_theta - z)^{-1} psi_theta>` on the domain samples.
pub fn continuation_scan(
    model: &Model,
    g: f64,
    theta: C64,
    psi: &TestVector,
    domain: &ContinuationDomain,
    schedule: SigmaSchedule,
) -> Result<ContinuationScan> {
    let h = model.hamiltonian(theta, g, None, Part::Full)?;
    let right = psi.deformed(model, theta);
    let left = psi.deformed(model, theta.conj());
    let mu = model.spec().form.mu;
    let beta = 1.0 / (1.0 + 2.0 * mu / 3.0);
    let mut samples = Vec::with_capacity(domain.samples.len());
    for &z in &domain.samples {
        let sigma_used = match schedule {
            SigmaSchedule::Fixed(s) => s,
            SigmaSchedule::PowerLaw => (z - domain.center).norm().powf(beta) * g.powf(-1.0 / (1.5 + mu)),
        };
        if !wedge_ok(theta, domain.center, z) {
            samples.push(ScanSample { z, value: None, condition: f64::NAN, sigma_used, wedge_ok: false });
            continue;
        }
        let r = resolvent_element(&h.matrix, &left, &right, z)?;
        samples.push(ScanSample { z, value: Some(r.value), condition: r.condition, sigma_used, wedge_ok: true });
    }
    Ok(ContinuationScan { theta, samples })
}

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::model::{coupling_profile, Model, ModelSpec};
use crate::table::{fmt_f64, Table};

/// Default number of symmetric nodes for the principal-value part.
pub const PV_NODES: usize = 400;
/// Simpson panels for the regular parts.
const REGULAR_PANELS: usize = 4000;

/// Second-order coefficients of the resonance, with `lambda ~ lambda_j - g^2 (z_od + z_d)`.
#[derive(Clone, Debug)]
pub struct FgrCoefficients {
    pub z_od: C64,
    pub z_d: f64,
    pub z: C64,
    pub channels: Vec<Channel>,
    /// True when no lower level is reachable by emitting one boson on the grid support.
    pub stable: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Channel {
    pub level: usize,
    /// Resonant momentum `lambda_j - lambda_m`; `None` for closed channels.
    pub k_star: Option<f64>,
    /// `pi |C_jm|^2 h(k*)^2`, zero for closed channels.
    pub width: f64,
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `int_a^b f(k) dk` by Simpson's rule in `u = ln k`.
fn integrate_log(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    simpson(|u| {
        let k = u.exp();
        f(k) * k
    }, a.ln(), b.ln(), REGULAR_PANELS)
}

/// Principal value of `int_{c-a}^{c+a} f(k) / (k - c) dk` on `n` symmetric midpoint nodes.
fn symmetric_pv(f: &impl Fn(f64) -> f64, c: f64, a: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = 2.0 * a / n as f64;
    (0..n / 2)
        .map(|i| {
            let d = (i as f64 + 0.5) * h;
            (f(c + d) - f(c - d)) / d
        })
        .sum::<f64>()
        * h
}

/// Principal value of `int_{kmin}^{kmax} f(k)/(k - c) dk` for `c` inside the interval.
pub fn principal_value(f: impl Fn(f64) -> f64, c: f64, kmin: f64, kmax: f64, nodes: usize) -> f64 {
    let a = (c - kmin).min(kmax - c);
    let coarse = symmetric_pv(&f, c, a, nodes);
    let fine = symmetric_pv(&f, c, a, 2 * nodes);
    let central = (4.0 * fine - coarse) / 3.0;
    let g = |k: f64| f(k) / (k - c);
    let left = if c - a > kmin { integrate_log(g, kmin, c - a) } else { 0.0 };
    let right = if c + a < kmax { simpson(g, c + a, kmax, REGULAR_PANELS) } else { 0.0 };
    central + left + right
}

pub fn fgr(model: &Model, j: usize) -> Result<FgrCoefficients> {
    fgr_with_nodes(model, j, PV_NODES)
}

pub fn fgr_with_nodes(model: &Model, j: usize, pv_nodes: usize) -> Result<FgrCoefficients> {
    model.check_level(j)?;
    let spec: &ModelSpec = model.spec();
    let (kmin, kmax) = (spec.grid.kmin, spec.grid.kmax);
    let h2 = |k: f64| coupling_profile(spec, C64::new(0.0, 0.0), k).norm_sqr();
    let levels = &spec.particle.levels;
    let mut z_od = C64::new(0.0, 0.0);
    let mut channels = Vec::new();
    for (m, &lm) in levels.iter().enumerate() {
        if m == j {
            continue;
        }
        let c2 = spec.particle.coupling[j][m].norm_sqr();
        let gap = levels[j] - lm;
        let (contrib, k_star, width) = if gap > kmin && gap < kmax {
            let width = PI * c2 * h2(gap);
            (C64::new(c2 * principal_value(h2, gap, kmin, kmax, pv_nodes), width), Some(gap), width)
        } else {
            (C64::new(c2 * integrate_log(|k| h2(k) / (k - gap), kmin, kmax), 0.0), None, 0.0)
        };
        z_od += contrib;
        channels.push(Channel { level: m, k_star, width });
    }
    let cjj = spec.particle.coupling[j][j].norm_sqr();
    let z_d = if cjj == 0.0 { 0.0 } else { cjj * integrate_log(|k| h2(k) / k, kmin, kmax) };
    let stable = channels.iter().all(|c| c.k_star.is_none());
    Ok(FgrCoefficients { z_od, z_d, z: z_od + z_d, channels, stable })
}

impl FgrCoefficients {
    pub fn channel_table(&self) -> Table {
        let mut t = Table::new(&["level_m", "k_star", "channel_width", "Z_od_re", "Z_od_im", "Z_d"]);
        for c in &self.channels {
            t.push(vec![
                c.level.to_string(),
                c.k_star.map(fmt_f64).unwrap_or_default(),
                fmt_f64(c.width),
                fmt_f64(self.z_od.re),
                fmt_f64(self.z_od.im),
                fmt_f64(self.z_d),
            ]);
        }
        t
    }
}

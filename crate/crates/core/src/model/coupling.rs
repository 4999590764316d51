use num_complex::Complex64 as C64;

use super::spec::{ModelKind, ModelSpec};
use crate::fock::ModeGrid;

/// Sharp infrared window applied at grid nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    All,
    /// Modes with `k >= sigma` (after snapping sigma to a cell edge).
    Above(f64),
    /// Modes with `k < sigma`.
    Below(f64),
}

/// First mode index above the snapped cutoff; clamps to the grid ends.
pub fn cut_index(grid: &ModeGrid, sigma: f64) -> usize {
    let layout = grid.layout();
    if sigma <= layout.kmin {
        0
    } else if sigma >= layout.kmax {
        grid.len()
    } else {
        grid.snap_edge(sigma).expect("sigma inside grid range")
    }
}

impl Window {
    pub fn mode_range(&self, grid: &ModeGrid) -> std::ops::Range<usize> {
        match *self {
            Window::All => 0..grid.len(),
            Window::Above(s) => cut_index(grid, s)..grid.len(),
            Window::Below(s) => 0..cut_index(grid, s),
        }
    }
}

fn sqrt_4pi() -> f64 {
    (4.0 * std::f64::consts::PI).sqrt()
}

/// Deformed radial coupling `h_theta(k)` without the quadrature weight.
pub fn coupling_profile(spec: &ModelSpec, theta: C64, k: f64) -> C64 {
    let e = (-theta).exp();
    let chi = spec.form.chi(e * k);
    match spec.kind {
        ModelKind::Nelson => {
            let mu = spec.form.mu;
            sqrt_4pi() * (-(1.0 + mu) * theta).exp() * chi * k.powf(0.5 + mu)
        }
        ModelKind::QedToy => sqrt_4pi() * e * chi * (k / 2.0).sqrt(),
    }
}

/// `d h_theta(k) / d theta` in closed form.
pub fn coupling_profile_dtheta(spec: &ModelSpec, theta: C64, k: f64) -> C64 {
    let ek = (-theta).exp() * k;
    let lam2 = spec.form.lambda * spec.form.lambda;
    let prefactor = match spec.kind {
        ModelKind::Nelson => -(1.0 + spec.form.mu),
        ModelKind::QedToy => -1.0,
    };
    coupling_profile(spec, theta, k) * (prefactor + 2.0 * ek * ek / lam2)
}

/// Discretized coupling `h_theta(k_n) sqrt(w_n)` restricted to `window`.
pub fn radial_coupling(spec: &ModelSpec, grid: &ModeGrid, theta: C64, window: Window) -> Vec<C64> {
    let range = window.mode_range(grid);
    grid.modes()
        .iter()
        .enumerate()
        .map(|(n, m)| {
            if range.contains(&n) {
                coupling_profile(spec, theta, m.k) * m.weight.sqrt()
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Normal-ordering constant `sum_n |f_0(k_n)|^2` over the window.
pub fn normal_ordering_constant(spec: &ModelSpec, grid: &ModeGrid, window: Window) -> f64 {
    radial_coupling(spec, grid, C64::new(0.0, 0.0), window).iter().map(|c| c.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{GridLayout, ModeGrid};

    #[test]
    fn unit_node_value() {
        let mut spec = ModelSpec::default_nelson();
        spec.form.lambda = 1.0;
        let h = coupling_profile(&spec, C64::new(0.0, 0.0), 1.0);
        assert!((h.re - 1.30410).abs() < 1e-5 && h.im == 0.0, "{h}");
    }

    #[test]
    fn windows_partition_the_grid() {
        let spec = ModelSpec::default_nelson();
        let grid = ModeGrid::new(spec.grid).unwrap();
        let theta = C64::new(0.0, 0.3);
        let all = radial_coupling(&spec, &grid, theta, Window::All);
        let hi = radial_coupling(&spec, &grid, theta, Window::Above(0.1));
        let lo = radial_coupling(&spec, &grid, theta, Window::Below(0.1));
        for n in 0..grid.len() {
            assert_eq!(all[n], hi[n] + lo[n]);
            assert!(hi[n] == C64::new(0.0, 0.0) || lo[n] == C64::new(0.0, 0.0));
        }
        let empty = radial_coupling(&spec, &grid, theta, Window::Below(1e-5));
        assert!(empty.iter().all(|c| *c == C64::new(0.0, 0.0)));
    }

    #[test]
    fn conjugation_symmetry() {
        let spec = ModelSpec::default_nelson();
        let grid = ModeGrid::new(GridLayout::geometric(1e-3, 10.0, 30)).unwrap();
        let theta = C64::new(0.1, 0.35);
        let a = radial_coupling(&spec, &grid, theta, Window::All);
        let b = radial_coupling(&spec, &grid, theta.conj(), Window::All);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.conj() - y).norm() <= 1e-15 * x.norm());
        }
    }

    #[test]
    fn closed_form_derivative() {
        for spec in [ModelSpec::default_nelson(), ModelSpec::default_qed_toy()] {
            let theta = C64::new(0.05, 0.3);
            let step = 1e-5;
            for k in [1e-3, 0.3, 1.0, 4.0] {
                let fd = (coupling_profile(&spec, theta + step, k) - coupling_profile(&spec, theta - step, k)) / (2.0 * step);
                let exact = coupling_profile_dtheta(&spec, theta, k);
                assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1e-300), "{k}: {fd} vs {exact}");
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFamily {
    /// Log-midpoint rule: nodes equally spaced in `ln k`.
    Geometric,
    /// Midpoint rule on `[kmin, kmax]`.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridLayout {
    pub kind: GridFamily,
    pub kmin: f64,
    pub kmax: f64,
    pub count: usize,
}

impl GridLayout {
    pub fn geometric(kmin: f64, kmax: f64, count: usize) -> Self {
        Self { kind: GridFamily::Geometric, kmin, kmax, count }
    }

    pub fn linear(kmin: f64, kmax: f64, count: usize) -> Self {
        Self { kind: GridFamily::Linear, kmin, kmax, count }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("grid", "count must be positive"));
        }
        if !(self.kmin.is_finite() && self.kmax.is_finite()) || self.kmax <= self.kmin {
            return Err(Error::invalid("grid", format!("need kmin < kmax, got [{}, {}]", self.kmin, self.kmax)));
        }
        match self.kind {
            GridFamily::Geometric if self.kmin <= 0.0 => {
                Err(Error::invalid("grid", "geometric grid needs kmin > 0"))
            }
            GridFamily::Linear if self.kmin < 0.0 => Err(Error::invalid("grid", "linear grid needs kmin >= 0")),
            _ => Ok(()),
        }
    }
}

/// One discrete boson mode: the node `k` and its quadrature weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: f64,
    pub weight: f64,
}

/// Discretization of the one-boson momentum half-line.
///
/// Nodes are stored in increasing order. Cell `n` spans `[edges[n], edges[n+1]]`,
/// the node is its (log-)midpoint and the weight approximates `dk` over the cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeGrid {
    layout: GridLayout,
    modes: Vec<Mode>,
    edges: Vec<f64>,
}

impl ModeGrid {
    pub fn new(layout: GridLayout) -> Result<Self> {
        layout.validate()?;
        let m = layout.count;
        let (modes, edges) = match layout.kind {
            GridFamily::Geometric => {
                let du = (layout.kmax / layout.kmin).ln() / m as f64;
                let edges: Vec<f64> = (0..=m)
                    .map(|n| if n == m { layout.kmax } else { layout.kmin * (n as f64 * du).exp() })
                    .collect();
                let modes = (0..m)
                    .map(|n| {
                        let k = layout.kmin * ((n as f64 + 0.5) * du).exp();
                        Mode { k, weight: k * du }
                    })
                    .collect();
                (modes, edges)
            }
            GridFamily::Linear => {
                let h = (layout.kmax - layout.kmin) / m as f64;
                let edges: Vec<f64> = (0..=m)
                    .map(|n| if n == m { layout.kmax } else { layout.kmin + n as f64 * h })
                    .collect();
                let modes = (0..m)
                    .map(|n| Mode { k: layout.kmin + (n as f64 + 0.5) * h, weight: h })
                    .collect();
                (modes, edges)
            }
        };
        Ok(Self { layout, modes, edges })
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn k(&self, n: usize) -> f64 {
        self.modes[n].k
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.modes[n].weight
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Log spacing `du` of a geometric grid.
    pub fn log_step(&self) -> Option<f64> {
        match self.layout.kind {
            GridFamily::Geometric => Some((self.layout.kmax / self.layout.kmin).ln() / self.len() as f64),
            GridFamily::Linear => None,
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    /// Closed form of `weight_sum`, used as a consistency check on the construction.
    pub fn weight_sum_closed_form(&self) -> f64 {
        let GridLayout { kind, kmin, kmax, count } = self.layout;
        match kind {
            GridFamily::Linear => kmax - kmin,
            GridFamily::Geometric => {
                let du = (kmax / kmin).ln() / count as f64;
                let r = du.exp();
                kmin * du * (0.5 * du).exp() * (r.powi(count as i32) - 1.0) / (r - 1.0)
            }
        }
    }

    /// Index of the cell edge nearest to `sigma` (in log distance on geometric grids).
    /// Modes `n >= edge` lie above the snapped cutoff.
    pub fn snap_edge(&self, sigma: f64) -> Result<usize> {
        if !(sigma > self.layout.kmin && sigma <= self.layout.kmax) {
            return Err(Error::CutoffOutOfRange { sigma, kmin: self.layout.kmin, kmax: self.layout.kmax });
        }
        let dist = |e: f64| match self.layout.kind {
            GridFamily::Geometric => (e.ln() - sigma.ln()).abs(),
            GridFamily::Linear => (e - sigma).abs(),
        };
        let (idx, _) = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (i, dist(e)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        Ok(idx)
    }

    /// Snapped cutoff value.
    pub fn snap(&self, sigma: f64) -> Result<f64> {
        Ok(self.edges[self.snap_edge(sigma)?])
    }

    /// Grid restricted to the contiguous mode range `start..end`.
    pub fn sub_grid(&self, start: usize, end: usize) -> Result<ModeGrid> {
        if start >= end || end > self.len() {
            return Err(Error::invalid("sub_grid", format!("range {start}..{end} for {} modes", self.len())));
        }
        let layout = GridLayout {
            kind: self.layout.kind,
            kmin: self.edges[start],
            kmax: self.edges[end],
            count: end - start,
        };
        Ok(ModeGrid {
            layout,
            modes: self.modes[start..end].to_vec(),
            edges: self.edges[start..=end].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_weights_match_closed_form() {
        let g = ModeGrid::new(GridLayout::geometric(2e-4, 12.0, 24)).unwrap();
        let rel = (g.weight_sum() - g.weight_sum_closed_form()).abs() / g.weight_sum_closed_form();
        assert!(rel < 1e-13, "{rel}");
        assert!(g.modes().windows(2).all(|w| w[0].k < w[1].k));
    }

    #[test]
    fn linear_weights_sum_to_length() {
        let g = ModeGrid::new(GridLayout::linear(0.0, 3.0, 7)).unwrap();
        assert!((g.weight_sum() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn snapping_picks_nearest_edge() {
        let g = ModeGrid::new(GridLayout::linear(0.0, 1.0, 10)).unwrap();
        assert_eq!(g.snap_edge(0.34).unwrap(), 3);
        assert_eq!(g.snap_edge(0.36).unwrap(), 4);
        assert!(g.snap_edge(1.5).is_err());
        assert!(g.snap_edge(0.0).is_err());
    }

    #[test]
    fn sub_grid_keeps_nodes() {
        let g = ModeGrid::new(GridLayout::geometric(1e-3, 1.0, 12)).unwrap();
        let s = g.sub_grid(3, 9).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.k(0), g.k(3));
        assert!((s.log_step().unwrap() - g.log_step().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(ModeGrid::new(GridLayout::geometric(0.0, 1.0, 4)).is_err());
        assert!(ModeGrid::new(GridLayout::linear(1.0, 1.0, 4)).is_err());
        assert!(ModeGrid::new(GridLayout::linear(0.0, 1.0, 0)).is_err());
    }
}

use std::collections::HashMap;
use std::sync::Arc;

use super::grid::ModeGrid;
use crate::error::{Error, Result};

/// Default bound on the truncated Fock dimension.
pub const DEFAULT_FOCK_CAP: usize = 200_000;

/// Occupation-number state, stored as the sorted multiset of occupied mode indices.
///
/// `[0, 0, 3]` means two bosons in mode 0 and one in mode 3.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState {
    modes: Box<[u32]>,
}

impl OccupationState {
    pub fn vacuum() -> Self {
        Self { modes: Box::new([]) }
    }

    pub fn from_modes(mut modes: Vec<u32>) -> Self {
        modes.sort_unstable();
        Self { modes: modes.into_boxed_slice() }
    }

    pub fn total(&self) -> usize {
        self.modes.len()
    }

    pub fn occupied_modes(&self) -> &[u32] {
        &self.modes
    }

    pub fn occupation(&self, mode: usize) -> usize {
        let m = mode as u32;
        let lo = self.modes.partition_point(|&x| x < m);
        let hi = self.modes.partition_point(|&x| x <= m);
        hi - lo
    }

    /// Dense occupation vector over `n_modes` modes.
    pub fn occupations(&self, n_modes: usize) -> Vec<usize> {
        let mut occ = vec![0; n_modes];
        for &m in self.modes.iter() {
            occ[m as usize] += 1;
        }
        occ
    }

    /// Distinct occupied modes with their multiplicities.
    pub fn runs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.modes.len() {
                return None;
            }
            let m = self.modes[i];
            let start = i;
            while i < self.modes.len() && self.modes[i] == m {
                i += 1;
            }
            Some((m as usize, i - start))
        })
    }

    pub fn without(&self, mode: usize) -> Option<Self> {
        let m = mode as u32;
        let pos = self.modes.iter().position(|&x| x == m)?;
        let mut v = self.modes.to_vec();
        v.remove(pos);
        Some(Self { modes: v.into_boxed_slice() })
    }

    pub fn with(&self, mode: usize) -> Self {
        let m = mode as u32;
        let pos = self.modes.partition_point(|&x| x <= m);
        let mut v = self.modes.to_vec();
        v.insert(pos, m);
        Self { modes: v.into_boxed_slice() }
    }

    /// `sum_n occupation(n) * values[n]`.
    pub fn sum_over(&self, values: &[f64]) -> f64 {
        self.modes.iter().map(|&m| values[m as usize]).sum()
    }
}

/// Truncated bosonic Fock basis in graded lexicographic order.
///
/// States are grouped by total boson number; within a shell they are ordered
/// lexicographically by their sorted mode-index tuple. The vacuum is index 0.
#[derive(Clone, Debug)]
pub struct FockBasis {
    grid: Arc<ModeGrid>,
    n_max: usize,
    states: Vec<OccupationState>,
    index: HashMap<OccupationState, usize>,
}

fn shell_size(modes: usize, n: usize) -> u128 {
    // C(modes + n - 1, n)
    let mut acc: u128 = 1;
    for i in 0..n as u128 {
        acc = acc * (modes as u128 + i) / (i + 1);
    }
    acc
}

/// Dimension of the truncated Fock space with `modes` modes and at most `n_max` bosons.
pub fn fock_dimension(modes: usize, n_max: usize) -> u128 {
    (0..=n_max).map(|n| shell_size(modes, n)).sum()
}

pub fn enumerate_basis(grid: Arc<ModeGrid>, n_max: usize) -> Result<FockBasis> {
    enumerate_basis_with_cap(grid, n_max, DEFAULT_FOCK_CAP)
}

pub fn enumerate_basis_with_cap(grid: Arc<ModeGrid>, n_max: usize, cap: usize) -> Result<FockBasis> {
    let m = grid.len();
    let dim = fock_dimension(m, n_max);
    if dim > cap as u128 {
        return Err(Error::Capacity { dim: dim.min(usize::MAX as u128) as usize, cap });
    }
    let mut states = Vec::with_capacity(dim as usize);
    states.push(OccupationState::vacuum());
    for n in 1..=n_max {
        let mut tuple = vec![0u32; n];
        loop {
            states.push(OccupationState { modes: tuple.clone().into_boxed_slice() });
            // next non-decreasing tuple
            let mut i = n;
            while i > 0 && tuple[i - 1] as usize == m - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            let v = tuple[i - 1] + 1;
            for t in tuple[i - 1..].iter_mut() {
                *t = v;
            }
        }
    }
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(FockBasis { grid, n_max, states, index })
}

impl FockBasis {
    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<ModeGrid> {
        &self.grid
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &OccupationState {
        &self.states[i]
    }

    pub fn index_of(&self, s: &OccupationState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Index of the one-boson state in `mode`.
    pub fn one_boson(&self, mode: usize) -> Option<usize> {
        (mode < self.grid.len() && self.n_max >= 1).then_some(1 + mode)
    }

    /// True if every occupied mode of state `i` lies in `range`.
    pub fn supported_in(&self, i: usize, range: std::ops::Range<usize>) -> bool {
        self.states[i].occupied_modes().iter().all(|&m| range.contains(&(m as usize)))
    }
}

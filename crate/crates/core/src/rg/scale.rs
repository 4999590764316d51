use crate::error::{Error, Result};
use crate::fock::{GridFamily, GridLayout, ModeGrid, SparseOperator};

/// An operator after the dilatation `A_rho` and the relabeling `S_rho`.
#[derive(Clone, Debug)]
pub struct ScaledOperator {
    pub matrix: SparseOperator,
    /// Grid whose node `n` sits at `k_n / rho`.
    pub grid: ModeGrid,
    pub rho: f64,
    /// `rho = ratio^shift` for the geometric grid ratio.
    pub shift: i32,
}

/// Integer `s` with `rho = ratio^s`, if one exists.
pub fn grid_power(grid: &ModeGrid, rho: f64) -> Result<i32> {
    let step = match (grid.layout().kind, grid.log_step()) {
        (GridFamily::Geometric, Some(step)) => step,
        _ => return Err(Error::invalid("grid", "scaling needs a geometric grid")),
    };
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid("rho", format!("{rho} is not a positive scale")));
    }
    let s = rho.ln() / step;
    let rounded = s.round();
    if (s - rounded).abs() > 1e-9 {
        return Err(Error::invalid("rho", format!("{rho} is not an integer power of the grid ratio {}", step.exp())));
    }
    Ok(rounded as i32)
}

/// Dilatation `A_rho(H) = H / rho`.
pub fn dilate(h: &SparseOperator, rho: f64) -> SparseOperator {
    h.scale(rho.recip().into())
}

/// `A_rho(S_rho(H))`: mode `n` is relabeled to momentum `k_n / rho` and the operator is divided by `rho`.
///
/// Modes carry normalized cell amplitudes, so the relabeling leaves matrix entries in the
/// occupation basis unchanged; only the momentum attached to each index moves.
pub fn scale_transform(h: &SparseOperator, grid: &ModeGrid, rho: f64) -> Result<ScaledOperator> {
    let shift = grid_power(grid, rho)?;
    let l = grid.layout();
    let relabeled = ModeGrid::new(GridLayout { kind: l.kind, kmin: l.kmin / rho, kmax: l.kmax / rho, count: l.count })?;
    Ok(ScaledOperator { matrix: dilate(h, rho), grid: relabeled, rho, shift })
}

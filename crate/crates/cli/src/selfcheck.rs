use std::sync::Arc;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reslab::dynamics::{propagate_survival_dense, propagate_survival_krylov, PropagationOptions};
use reslab::feshbach::SchurReduction;
use reslab::fock::{enumerate_basis, fock_dimension, ladder, GridLayout, Ladder, ModeGrid, SparseOperator};
use reslab::model::{Model, ModelSpec, Part};
use reslab::resolvent::{resolvent_element, Profile, TestVector};
use reslab::rg::Decimator;
use reslab::spectral::{dense_eigenvalues, resonance_at};
use reslab::table::Table;
use reslab::C64;

use crate::config::{Experiment, ExperimentConfig, Parameters};

/// Largest eigenvalue mismatch allowed by the Feshbach isospectrality check.
pub const ISOSPECTRAL_TOL: f64 = 1e-8;
/// Relative tolerance of the Combes identity at real `theta`.
pub const COMBES_TOL: f64 = 1e-10;
/// Tolerance of the `g = 0` exactness checks.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "passed", "detail"]);
    for c in checks {
        t.push(vec![c.name.to_string(), c.passed.to_string(), c.detail.replace(',', ";")]);
    }
    t
}

fn check(name: &'static str, result: Result<(bool, String), reslab::Error>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Outcome of one isospectrality trial.
#[derive(Clone, Copy, Debug)]
pub struct IsospectralTrial {
    /// Largest `min |spec F_P(H - z)|` over eigenvalues `z` of `H` with an invertible complementary block.
    pub forward: f64,
    /// Relative defect of `det(H - z) = det F_P(H - z) det(Hbar - z)` at a random `z`.
    pub determinant: f64,
    /// Eigenvalues skipped because the complementary block was ill-conditioned there.
    pub skipped: usize,
}

fn det(m: &Mat<C64>) -> Result<C64, reslab::Error> {
    Ok(dense_eigenvalues(&SparseOperator::from_dense(m))?.into_iter().product())
}

/// Random `n x n` complex `H` and a random oblique projection of rank 1 to 3.
pub fn isospectral_trial(rng: &mut impl Rng, n: usize) -> Result<IsospectralTrial, reslab::Error> {
    let h = Mat::from_fn(n, n, |_, _| c64(rng));
    let r = rng.gen_range(1..=3);
    let v = Mat::from_fn(n, r, |_, _| c64(rng));
    let w = Mat::from_fn(n, r, |i, k| if i == k { C64::new(2.0, 0.0) } else { 0.3 * c64(rng) });
    let red = SchurReduction::with_basis(&h, &v, &w)?;
    let p = v.clone() * reslab::linalg::DenseLu::new(&(w.adjoint() * &v))?.solve_mat(&w.adjoint().to_owned());
    let full = SchurReduction::new(&h, &p)?;
    let mut forward: f64 = 0.0;
    let mut skipped = 0;
    for z in dense_eigenvalues(&SparseOperator::from_dense(&h))? {
        match red.map_of(z) {
            Ok(f) if f.condition < 1e8 => {
                let mu = dense_eigenvalues(&SparseOperator::from_dense(&f.matrix))?;
                let closest = mu.iter().map(|m| m.norm()).fold(f64::INFINITY, f64::min);
                forward = forward.max(closest);
            }
            _ => skipped += 1,
        }
    }
    // determinant route, in the orthonormal-range basis where det(Q^{-1} (H - z) Q) = det(H - z)
    let z = 3.0 * c64(rng);
    let f = full.map_of(z)?;
    let shifted = Mat::from_fn(n, n, |i, k| h[(i, k)] - if i == k { z } else { C64::new(0.0, 0.0) });
    let lhs = det(&shifted)?;
    let q = full.range_basis();
    let ran = q.ncols();
    let bar = {
        let basis = full.basis();
        let lu = reslab::linalg::DenseLu::new(basis)?;
        let blocks = lu.solve_mat(&(&shifted * basis));
        Mat::from_fn(n - ran, n - ran, |i, k| blocks[(ran + i, ran + k)])
    };
    let rhs = det(&f.matrix)? * det(&bar)?;
    Ok(IsospectralTrial { forward, determinant: (lhs - rhs).norm() / lhs.norm(), skipped })
}

fn ccr() -> Result<(bool, String), reslab::Error> {
    let grid = Arc::new(ModeGrid::new(GridLayout::geometric(0.01, 4.0, 4))?);
    let b = enumerate_basis(grid, 3)?;
    let mut worst: f64 = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            let a = ladder(&b, m, Ladder::Annihilate)?;
            let ad = ladder(&b, n, Ladder::Create)?;
            let comm = a.matmul(&ad).sub(&ad.matmul(&a));
            for (s, st) in b.states().iter().enumerate() {
                if st.total() >= b.n_max() {
                    continue;
                }
                for t in 0..b.dim() {
                    let expect = if m == n && s == t { 1.0 } else { 0.0 };
                    worst = worst.max((comm.get(t, s) - expect).norm());
                }
            }
        }
    }
    Ok((worst <= 1e-13, format!("max defect {worst:.3e}")))
}

fn hermitian(model: &Model) -> Result<(bool, String), reslab::Error> {
    let h = model.hamiltonian(C64::new(0.0, 0.0), 0.05, None, Part::Full)?.matrix;
    let d = h.max_abs_diff(&h.adjoint());
    Ok((d <= 1e-12, format!("max |H - H*| {d:.3e}")))
}

fn splitting(model: &Model) -> Result<(bool, String), reslab::Error> {
    let theta = C64::new(0.0, 0.3);
    let sigma = 0.2f64.clamp(model.grid().edges()[1], model.spec().grid.kmax);
    let full = model.hamiltonian(theta, 0.05, None, Part::Full)?.matrix;
    let cut = model.hamiltonian(theta, 0.05, Some(sigma), Part::Cutoff)?.matrix;
    let below = model.hamiltonian(theta, 0.05, Some(sigma), Part::BelowInteraction)?.matrix;
    let d = full.max_abs_diff(&cut.add(&below));
    Ok((d <= 1e-13, format!("max |H - H_cut - W_below| {d:.3e}")))
}

fn conjugation(model: &Model) -> Result<(bool, String), reslab::Error> {
    let real = model.spec().particle.coupling.iter().flatten().all(|c| c.im == 0.0);
    if !real {
        return Ok((true, "skipped: complex coupling".into()));
    }
    let theta = C64::new(0.1, 0.3);
    let a = model.hamiltonian(theta, 0.05, None, Part::Full)?.matrix;
    let b = model.hamiltonian(theta.conj(), 0.05, None, Part::Full)?.matrix;
    let d = b.max_abs_diff(&a.map_values(|v| v.conj()));
    Ok((d <= 1e-13, format!("max |H(conj theta) - conj H(theta)| {d:.3e}")))
}

fn unitarity(model: &Model) -> Result<(bool, String), reslab::Error> {
    let h = model.hamiltonian(C64::new(0.0, 0.0), 0.05, None, Part::Full)?.matrix;
    let psi = model.space().level_vacuum(model.space().levels() - 1);
    let times = [0.0, 0.5, 2.0, 10.0, 40.0];
    let lambda = C64::new(0.0, 0.0);
    let dense = propagate_survival_dense(&h, &psi, &times, lambda)?;
    let krylov = propagate_survival_krylov(&h, &psi, &times, lambda, &PropagationOptions::default())?;
    let over = dense.amplitude.iter().map(|a| a.norm() - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let gap = dense.amplitude.iter().zip(&krylov.amplitude).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let start = (dense.amplitude[0] - 1.0).norm();
    Ok((over <= 1e-12 && gap <= 1e-8 && start <= 1e-12, format!("max |amp| - 1 {over:.3e}; dense vs Krylov {gap:.3e}")))
}

fn basis_determinism(model: &Model) -> Result<(bool, String), reslab::Error> {
    let grid = Arc::new(ModeGrid::new(model.spec().grid)?);
    let a = enumerate_basis(grid.clone(), model.spec().nmax)?;
    let b = enumerate_basis(grid, model.spec().nmax)?;
    let same = a.states() == b.states();
    let count = fock_dimension(model.grid().len(), model.spec().nmax) == a.dim() as u128;
    let indexed = a.states().iter().enumerate().all(|(i, s)| a.index_of(s) == Some(i));
    Ok((same && count && indexed, format!("dim {}", a.dim())))
}

fn config_roundtrip(spec: &ModelSpec) -> Result<(bool, String), reslab::Error> {
    let params = Parameters { seed: Some(7), ..Default::default() };
    let cfg = ExperimentConfig::new(Experiment::Selfcheck, spec.clone(), params);
    let ok = (|| {
        let text = cfg.to_toml().ok()?;
        let back = ExperimentConfig::from_toml(&text).ok()?;
        Some(back == cfg && back.to_toml().ok()? == text)
    })()
    .unwrap_or(false);
    Ok((ok, "parse . serialize . parse".into()))
}

fn isospectrality(seed: u64) -> Result<(bool, String), reslab::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut forward, mut determinant): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        let t = isospectral_trial(&mut rng, 6 + i % 3)?;
        forward = forward.max(t.forward);
        determinant = determinant.max(t.determinant);
    }
    Ok((forward <= ISOSPECTRAL_TOL && determinant <= 1e-9, format!("forward {forward:.3e}; determinant {determinant:.3e}")))
}

/// Largest relative Combes defect over the standard probe set at `theta = +-du`.
pub fn combes_defect(model: &Model, g: f64) -> Result<(f64, usize), reslab::Error> {
    let du = model.grid().log_step().ok_or_else(|| reslab::Error::Invalid {
        what: "grid",
        reason: "the real-theta Combes check needs a geometric grid".into(),
    })?;
    let top = model.space().levels() - 1;
    let vectors = [
        TestVector::level(top).with_boson(0, Profile::Gaussian { amp: 0.7, power: 1.5, scale: 1.0 }),
        TestVector::level(0).with_boson(top, Profile::Gaussian { amp: 0.4, power: 2.0, scale: 0.6 }),
    ];
    let zs = [C64::new(0.5, 0.1), C64::new(1.0, 0.2), C64::new(-0.3, 0.5), C64::new(1.6, 0.3), C64::new(0.2, 1.0)];
    let zero = C64::new(0.0, 0.0);
    let h0 = model.hamiltonian(zero, g, None, Part::Full)?.matrix;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for sign in [1.0, -1.0] {
        let theta = C64::new(sign * du, 0.0);
        let ht = model.hamiltonian(theta, g, None, Part::Full)?.matrix;
        for psi in &vectors {
            let plain = psi.deformed(model, zero);
            let right = psi.deformed(model, theta);
            let left = psi.deformed(model, theta.conj());
            for &z in &zs {
                let a = resolvent_element(&h0, &plain, &plain, z)?.value;
                let b = resolvent_element(&ht, &left, &right, z)?.value;
                worst = worst.max((a - b).norm() / a.norm().max(1.0));
                pairs += 1;
            }
        }
    }
    Ok((worst, pairs))
}

fn combes(model: &Model) -> Result<(bool, String), reslab::Error> {
    let (d, pairs) = combes_defect(model, 0.05)?;
    Ok((d <= COMBES_TOL, format!("{pairs} pairs; max relative defect {d:.3e}")))
}

fn exactness(model: &Model) -> Result<(bool, String), reslab::Error> {
    let theta = C64::new(0.0, 0.3);
    let j = model.space().levels() - 1;
    let lj = model.level(j);
    let est = resonance_at(model, theta, 0.0, j, None)?;
    let track = (est.value - lj).norm();
    let h = model.hamiltonian(C64::new(0.0, 0.0), 0.0, None, Part::Full)?.matrix;
    let times = [0.0, 1.0, 10.0, 100.0];
    let trace = propagate_survival_dense(&h, &model.space().level_vacuum(j), &times, C64::new(lj, 0.0))?;
    let survival = trace.sup_deviation();
    let sigma = 0.2f64.clamp(model.grid().edges()[1], model.spec().grid.kmax);
    let d = Decimator::new(model, theta, 0.0, j, sigma, sigma)?;
    let z = C64::new(lj + 0.01, -0.02);
    let e = (d.at(z)?.e_z - (lj - z)).norm();
    let worst = track.max(survival).max(e);
    Ok((worst <= EXACT_TOL, format!("tracker {track:.1e}; survival {survival:.1e}; E_z {e:.1e}")))
}

/// Runs every invariant check on `spec`; never panics on numerical failure.
pub fn run_suite(spec: &ModelSpec, seed: u64) -> Vec<Check> {
    let mut out = vec![check("ccr_below_top_shell", ccr())];
    let model = match Model::new(spec.clone()) {
        Ok(m) => m,
        Err(e) => {
            out.push(Check { name: "model", passed: false, detail: format!("error: {e}") });
            return out;
        }
    };
    out.push(check("hermitian_at_zero_theta", hermitian(&model)));
    out.push(check("splitting_identity", splitting(&model)));
    out.push(check("conjugation_symmetry", conjugation(&model)));
    out.push(check("propagation_unitarity", unitarity(&model)));
    out.push(check("basis_determinism", basis_determinism(&model)));
    out.push(check("config_round_trip", config_roundtrip(spec)));
    out.push(check("feshbach_isospectrality", isospectrality(seed)));
    out.push(check("combes_real_theta", combes(&model)));
    out.push(check("g0_exactness", exactness(&model)));
    out
}

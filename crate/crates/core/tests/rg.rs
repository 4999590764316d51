use std::sync::Arc;

use reslab::fock::{enumerate_basis, field_energy, number_operator, GridLayout, ModeGrid};
use reslab::model::{Model, ModelSpec};
use reslab::rg::{decimate, ez_root, grid_power, ir_gap_experiment, scale_transform, Decimator};
use reslab::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn default_model() -> Model {
    Model::new(ModelSpec::default_nelson()).unwrap()
}

#[test]
fn decoupled_gap_vanishes() {
    let model = default_model();
    let rep = ir_gap_experiment(&model, c(0.0, 0.3), 0.0, 1, &[0.05, 0.1, 0.2]).unwrap();
    for row in &rep.rows {
        assert_eq!(row.diff_abs, 0.0);
        assert!(!row.resolvable);
    }
}

#[test]
fn cutoff_above_every_mode_decouples() {
    let model = default_model();
    let theta = c(0.0, 0.3);
    let rep = ir_gap_experiment(&model, theta, 0.05, 1, &[20.0]).unwrap();
    let row = &rep.rows[0];
    assert_eq!(row.lambda_cut, c(1.0, 0.0));
    assert!((row.diff_abs - (row.lambda_full - 1.0).norm()).abs() < 1e-15);
}

#[test]
fn scale_transform_relabels_the_grid() {
    let layout = GridLayout::geometric(0.01, 5.0, 6);
    let grid = Arc::new(ModeGrid::new(layout).unwrap());
    let basis = enumerate_basis(grid.clone(), 2).unwrap();
    let rho = (layout.kmax / layout.kmin).powf(2.0 / layout.count as f64);
    assert_eq!(grid_power(&grid, rho).unwrap(), 2);
    assert!(grid_power(&grid, 1.3 * rho).is_err());

    let hf = field_energy(&basis, c(1.0, 0.0));
    let scaled = scale_transform(&hf, &grid, rho).unwrap();
    for n in 0..layout.count {
        assert!((scaled.grid.k(n) - grid.k(n) / rho).abs() < 1e-14 * grid.k(n));
    }
    let relabeled = enumerate_basis(Arc::new(scaled.grid.clone()), 2).unwrap();
    let want = field_energy(&relabeled, c(1.0, 0.0));
    assert!(scaled.matrix.max_abs_diff(&want) < 1e-12);

    let n = number_operator(&basis);
    let sn = scale_transform(&n, &grid, rho).unwrap();
    assert!(sn.matrix.scale(c(rho, 0.0)).max_abs_diff(&n) < 1e-14);
}

#[test]
fn decoupled_decimation_is_trivial() {
    let model = default_model();
    let z = c(1.01, 0.005);
    let d = decimate(&model, c(0.0, 0.3), 0.0, 1, z, 0.1, 0.05).unwrap();
    assert!((d.e_z - (c(1.0, 0.0) - z)).norm() < 1e-14);
    assert_eq!(d.w_norm, 0.0);
    assert_eq!(d.lambda_cut, c(1.0, 0.0));
    assert!(d.delta_e().norm() < 1e-14);
    assert_eq!(ez_root(&model, c(0.0, 0.3), 0.0, 0.1, 0.05, 1).unwrap(), c(1.0, 0.0));
}

#[test]
fn vacuum_entry_matches_full_map() {
    let model = default_model();
    let dec = Decimator::new(&model, c(0.0, 0.3), 0.05, 1, 0.1, 0.05).unwrap();
    assert!(dec.rank() > 1);
    let lc = dec.lambda_cut();
    for z in [lc, lc + c(0.01, 0.0), lc + c(-0.005, 0.01)] {
        let full = dec.at(z).unwrap();
        let (e, _) = dec.vacuum_entry(z).unwrap();
        assert!((full.e_z - e).norm() < 1e-12);
        assert_eq!(full.h_eff.dim(), dec.rank());
    }
    assert!(dec.at(lc + c(dec.sigma(), 0.0)).is_err());
}

#[test]
fn root_agrees_with_secant_on_the_full_map() {
    let model = default_model();
    let theta = c(0.0, 0.3);
    let (g, sigma, rho0) = (0.05, 0.1, 0.05);
    let root = ez_root(&model, theta, g, sigma, rho0, 1).unwrap();
    let e = |z: C64| decimate(&model, theta, g, 1, z, sigma, rho0).unwrap().e_z;
    let lc = Decimator::new(&model, theta, g, 1, sigma, rho0).unwrap().lambda_cut();
    let (mut z0, mut z1) = (lc, lc + c(1e-3, 0.0));
    let (mut f0, mut f1) = (e(z0), e(z1));
    for _ in 0..30 {
        if f1.norm() < 1e-14 {
            break;
        }
        let z2 = z1 - f1 * (z1 - z0) / (f1 - f0);
        (z0, f0) = (z1, f1);
        z1 = z2;
        f1 = e(z1);
    }
    assert!((root - z1).norm() < 1e-10, "{root} vs {z1}");
}

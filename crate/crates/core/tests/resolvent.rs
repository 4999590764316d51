use proptest::prelude::*;
use reslab::fock::{GridLayout, SparseOperator};
use reslab::model::{Model, ModelSpec, Part};
use reslab::resolvent::{
    continuation_scan, dprime_norm, pole_fit, predicted_beta, resolvent_element, ContinuationDomain, Profile,
    SigmaSchedule, TestVector, COND_LIMIT,
};
use reslab::spectral::resonance_at;
use reslab::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn dressed(j: usize, level: usize) -> TestVector {
    TestVector::level(j).with_boson(level, Profile::Gaussian { amp: 0.7, power: 1.5, scale: 1.0 })
}

fn element(model: &Model, g: f64, theta: C64, psi: &TestVector, z: C64) -> C64 {
    let h = model.hamiltonian(theta, g, None, Part::Full).unwrap().matrix;
    let right = psi.deformed(model, theta);
    let left = psi.deformed(model, theta.conj());
    resolvent_element(&h, &left, &right, z).unwrap().value
}

#[test]
fn diagonal_resolvent() {
    let d = [c(0.3, -0.1), c(1.0, 0.0), c(2.0, -0.4)];
    let h = SparseOperator::diagonal(&d);
    let e1 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let z = c(0.5, 0.7);
    let f = resolvent_element(&h, &e1, &e1, z).unwrap().value;
    assert!((f - 1.0 / (d[0] - z)).norm() < 1e-14);
}

#[test]
fn real_deformation_by_a_grid_step_is_unitary() {
    let model = Model::new(ModelSpec::default_nelson()).unwrap();
    let du = model.grid().log_step().unwrap();
    let zero = c(0.0, 0.0);
    for psi in [dressed(1, 0), dressed(0, 1)] {
        for z in [c(0.5, 0.1), c(1.0, 0.2), c(1.6, 0.3)] {
            let plain = element(&model, 0.05, zero, &psi, z);
            for sign in [1.0, -1.0] {
                let shifted = element(&model, 0.05, c(sign * du, 0.0), &psi, z);
                assert!((plain - shifted).norm() <= 1e-10 * plain.norm().max(1.0), "z = {z}");
            }
        }
    }
}

#[test]
fn deformation_invariance_off_the_spectrum() {
    let theta_a = c(0.0, 0.25);
    let theta_b = c(0.0, 0.35);
    let psi = dressed(1, 0);
    let zs = [c(0.9, 0.05), c(0.5, 0.2), c(1.4, 0.1)];
    let at = |count: usize, theta: C64, z: C64| {
        let mut spec = ModelSpec::default_nelson();
        spec.grid.count = count;
        spec.nmax = 1;
        element(&Model::new(spec).unwrap(), 0.05, theta, &psi, z)
    };
    for z in zs {
        // grid tolerance: change of each value under grid doubling
        let tol = (at(48, theta_a, z) - at(96, theta_a, z)).norm().max((at(48, theta_b, z) - at(96, theta_b, z)).norm());
        let spread = (at(96, theta_a, z) - at(96, theta_b, z)).norm();
        assert!(spread <= tol.max(1e-12 * at(96, theta_a, z).norm()), "z = {z}: spread {spread} vs grid tolerance {tol}");
    }
}

#[test]
fn dprime_norm_examples() {
    let mut spec = ModelSpec::default_nelson();
    spec.grid = GridLayout::geometric(0.01, 4.0, 6);
    let model = Model::new(spec).unwrap();
    let space = model.space();
    let mut vac = vec![c(0.0, 0.0); space.dim()];
    vac[space.index(1, 0)] = c(1.0, 0.0);
    assert_eq!(dprime_norm(space, &vac), 0.0);

    let mut total = 0.0;
    let mut sum = vec![c(0.0, 0.0); space.dim()];
    for n in [1, 4] {
        let mut v = vec![c(0.0, 0.0); space.dim()];
        let i = space.index(0, space.fock().one_boson(n).unwrap());
        v[i] = c(1.0, 0.0);
        sum[i] = c(0.0, 1.0);
        let d = dprime_norm(space, &v);
        assert!((d - model.grid().k(n).powf(-0.5)).abs() < 1e-14);
        total += d * d;
    }
    assert!((dprime_norm(space, &sum).powi(2) - total).abs() < 1e-12 * total);
}

#[test]
fn decoupled_scan_is_a_pure_pole() {
    let model = Model::new(ModelSpec::default_nelson()).unwrap();
    let theta = c(0.0, 0.3);
    let center = c(1.0, 0.0);
    let domain = ContinuationDomain::standard_scaled(center, 0.1, std::f64::consts::FRAC_PI_2 - 0.1, std::f64::consts::PI + 0.2).unwrap();
    let scan = continuation_scan(&model, 0.0, theta, &TestVector::level(1), &domain, SigmaSchedule::Fixed(0.1)).unwrap();
    let values = scan.values();
    assert!(!values.is_empty());
    for &(z, f) in &values {
        assert!((f - 1.0 / (center - z)).norm() <= 1e-12 * f.norm());
    }
    let fit = pole_fit(&values, center).unwrap();
    assert!((fit.residue - 1.0).norm() < 1e-10);
    assert!(fit.degenerate);
}

#[test]
fn values_on_a_circle_around_the_resonance() {
    let model = Model::new(ModelSpec::default_nelson()).unwrap();
    let theta = c(0.0, 0.3);
    let lambda = resonance_at(&model, theta, 0.05, 1, None).unwrap().value;
    let h = model.hamiltonian(theta, 0.05, None, Part::Full).unwrap().matrix;
    let psi = TestVector::level(1);
    let (left, right) = (psi.deformed(&model, theta.conj()), psi.deformed(&model, theta));
    for z in ContinuationDomain::circle(lambda, 0.3, 24).samples {
        let r = resolvent_element(&h, &left, &right, z).unwrap();
        assert!(r.value.is_finite() && r.condition < COND_LIMIT);
    }
}

#[test]
fn synthetic_pole_and_branch() {
    let lambda = c(0.9, -0.05);
    let domain = ContinuationDomain::standard(lambda, std::f64::consts::FRAC_PI_2 - 0.1, std::f64::consts::PI + 0.2).unwrap();
    let samples: Vec<(C64, C64)> = domain
        .samples
        .iter()
        .map(|&z| (z, 2.0 / (lambda - z) + 0.1 * (lambda - z).powf(-0.75)))
        .collect();
    let fit = pole_fit(&samples, lambda).unwrap();
    assert!((fit.residue - 2.0).norm() < 0.02, "p = {}", fit.residue);
    assert!((fit.fitted_beta - 0.75).abs() < 0.05, "beta = {}", fit.fitted_beta);
    assert!((predicted_beta(0.5) - 0.75).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conjugate_symmetry(re in -0.1f64..0.1, im in 0.1f64..0.4, zr in -0.5f64..2.0, zi in 0.05f64..1.0, g in 0.0f64..0.1) {
        let mut spec = ModelSpec::default_nelson();
        spec.grid.count = 12;
        let model = Model::new(spec).unwrap();
        let theta = c(re, im);
        let z = c(zr, zi);
        let psi = dressed(1, 0);
        let a = element(&model, g, theta, &psi, z);
        let b = element(&model, g, theta.conj(), &psi, z.conj());
        prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
    }
}

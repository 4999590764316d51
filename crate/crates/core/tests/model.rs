use faer::Mat;
use proptest::prelude::*;
use reslab::fock::{GridLayout, SparseOperator};
use reslab::model::{coupling_profile, coupling_profile_dtheta, Model, ModelSpec, Part, Window};
use reslab::spectral::{dense_eigenvalues, dense_spectrum};
use reslab::C64;

fn small_spec(count: usize, nmax: usize) -> ModelSpec {
    let mut s = ModelSpec::default_nelson();
    s.grid = GridLayout::geometric(2e-3, 6.0, count);
    s.nmax = nmax;
    s
}

fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

#[test]
fn unit_node_coupling_by_hand() {
    let mut spec = ModelSpec::default_nelson();
    spec.form.lambda = 1.0;
    let by_hand = (4.0 * std::f64::consts::PI).sqrt() * (-1.0f64).exp();
    let h = coupling_profile(&spec, C64::new(0.0, 0.0), 1.0);
    assert!((h.re - by_hand).abs() < 1e-14 && h.im == 0.0);
    assert!((h.re - 1.30410).abs() < 1e-5);
}

#[test]
fn empty_infrared_window() {
    let model = Model::new(ModelSpec::default_nelson()).unwrap();
    let below = model.radial_coupling(C64::new(0.0, 0.2), Window::Below(1e-4));
    assert!(below.iter().all(|c| c.norm() == 0.0));
}

#[test]
fn decoupled_spectrum_is_analytic() {
    let model = Model::new(small_spec(5, 2)).unwrap();
    let theta = C64::new(0.05, 0.3);
    let h = model.hamiltonian(theta, 0.0, None, Part::Full).unwrap();
    let space = model.space();
    let mut expected = Vec::new();
    for l in 0..space.levels() {
        for s in space.fock().states() {
            let e: f64 = s.occupied_modes().iter().map(|&n| model.grid().k(n as usize)).sum();
            expected.push(model.level(l) + (-theta).exp() * e);
        }
    }
    for (r, c, v) in h.matrix.iter() {
        assert!(r == c || v.norm() == 0.0);
    }
    let got = sorted(h.matrix.diagonal_entries());
    for (a, b) in got.iter().zip(sorted(expected)) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn renormalized_cutoff_trivial_cases() {
    let model = Model::new(small_spec(6, 2)).unwrap();
    let theta = C64::new(0.0, 0.3);
    let cut = model.hamiltonian(theta, 0.1, Some(0.1), Part::Cutoff).unwrap().matrix;
    let zero = SparseOperator::zero(model.dim());
    let mut id = vec![C64::new(0.0, 0.0); model.dim()];
    id[0] = C64::new(1.0, 0.0);
    let e0 = SparseOperator::diagonal(&id);
    let a = model.renormalized_cutoff_hamiltonian(theta, 0.1, 0.1, C64::new(0.0, 0.0), &e0).unwrap();
    let b = model.renormalized_cutoff_hamiltonian(theta, 0.1, 0.1, C64::new(0.3, -0.1), &zero).unwrap();
    assert_eq!(a.matrix.max_abs_diff(&cut), 0.0);
    assert_eq!(b.matrix.max_abs_diff(&cut), 0.0);
}

#[test]
fn renormalized_cutoff_moves_one_eigenvalue() {
    let mut spec = small_spec(4, 2);
    spec.grid = GridLayout::geometric(0.05, 6.0, 4);
    let model = Model::new(spec).unwrap();
    let theta = C64::new(0.0, 0.3);
    let g = 0.2;
    let cut = model.hamiltonian(theta, g, Some(0.3), Part::Cutoff).unwrap().matrix;
    let right = dense_spectrum(&cut).unwrap();
    let left = dense_spectrum(&cut.adjoint()).unwrap();

    let target = right.iter().min_by(|a, b| (a.value - 1.0).norm().total_cmp(&(b.value - 1.0).norm())).unwrap();
    let partner = left.iter().min_by(|a, b| (a.value - target.value.conj()).norm().total_cmp(&(b.value - target.value.conj()).norm())).unwrap();
    let r = &target.vector;
    let l = &partner.vector;
    let norm: C64 = l.iter().zip(r).map(|(a, b)| a.conj() * b).sum();
    let p = Mat::from_fn(model.dim(), model.dim(), |i, j| r[i] * l[j].conj() / norm);
    let proj = SparseOperator::from_dense(&p);

    let shift = C64::new(0.013, -0.004);
    let moved = model.renormalized_cutoff_hamiltonian(theta, g, 0.3, shift, &proj).unwrap();
    let before = dense_eigenvalues(&cut).unwrap();
    let mut after = dense_eigenvalues(&moved.matrix).unwrap();
    for e in &before {
        let want = if (e - target.value).norm() < 1e-12 { e + shift } else { *e };
        let (i, d) = after
            .iter()
            .enumerate()
            .map(|(i, a)| (i, (a - want).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(d < 1e-9, "eigenvalue {e} not found after the shift ({d})");
        after.swap_remove(i);
    }
}

fn op_norm(m: &Mat<C64>) -> f64 {
    m.singular_values().unwrap().into_iter().fold(0.0, f64::max)
}

#[test]
fn soft_interaction_relative_bound_scales() {
    let model = Model::new(ModelSpec::default_nelson()).unwrap();
    let g = 0.05;
    let lambda = model.spec().form.lambda;
    let zero = C64::new(0.0, 0.0);
    let resolvent: Vec<C64> = model
        .hamiltonian(zero, 0.0, None, Part::Full)
        .unwrap()
        .matrix
        .diagonal_entries()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let (_, f) = model.space().split(i);
            let e: f64 = model.space().fock().state(f).occupied_modes().iter().map(|&n| model.grid().k(n as usize)).sum();
            C64::new(1.0 / (e + 1.0), 0.0)
        })
        .collect();
    let d = SparseOperator::diagonal(&resolvent);
    let c = &model.spec().particle.coupling;
    let c_norm = op_norm(&Mat::from_fn(c.len(), c.len(), |i, j| c[i][j]));
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut ratio = Vec::new();
    for f in [0.02, 0.05, 0.1, 0.2] {
        let w = model.hamiltonian(zero, g, Some(f * lambda), Part::BelowInteraction).unwrap();
        let sigma = w.sigma.unwrap();
        x.push(sigma.ln());
        let norm = op_norm(&w.matrix.matmul(&d).to_dense());
        y.push(norm.ln());
        let h = model.radial_coupling(zero, Window::Below(sigma));
        ratio.push(norm / (g * c_norm * h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()));
    }
    let (slope, _, _) = reslab::dynamics::linear_fit(&x, &y);
    let mu = model.spec().form.mu;
    assert!(slope >= 0.5 + mu - 0.15, "slope {slope}");
    // Creation on the vacuum gives the lower bound; ||a|| and ||a^dagger|| are at most sqrt(n_max) ||h||.
    let upper = 2.0 * (model.spec().nmax as f64).sqrt();
    assert!(ratio.iter().all(|&r| (1.0 - 1e-12..=upper).contains(&r)), "{ratio:?}");
}

#[test]
fn real_deformation_converges_with_the_grid() {
    let theta = C64::new(0.1, 0.0);
    let displacement = |count: usize| {
        let mut spec = small_spec(count, 1);
        spec.grid = GridLayout::geometric(0.02, 8.0, count);
        let model = Model::new(spec).unwrap();
        let lowest = |t: C64| {
            let h = model.hamiltonian(t, 0.3, None, Part::Full).unwrap();
            dense_eigenvalues(&h.matrix).unwrap().into_iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
        };
        (lowest(theta) - lowest(C64::new(0.0, 0.0))).abs()
    };
    let coarse = displacement(20);
    let fine = displacement(40);
    assert!(fine <= 0.5 * coarse, "{coarse} -> {fine}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermitian_at_real_theta(t in -0.4f64..0.4, g in 0.0f64..0.5) {
        let model = Model::new(small_spec(6, 2)).unwrap();
        let h = model.hamiltonian(C64::new(t, 0.0), g, None, Part::Full).unwrap().matrix;
        let scale = h.max_abs();
        prop_assert!(h.max_abs_diff(&h.adjoint()) <= 1e-12 * scale);
    }

    #[test]
    fn conjugation_symmetry(re in -0.3f64..0.3, im in -0.4f64..0.4, g in 0.0f64..0.5, sigma in 0.01f64..1.0) {
        let model = Model::new(small_spec(6, 2)).unwrap();
        let theta = C64::new(re, im);
        for (part, s) in [(Part::Full, None), (Part::Cutoff, Some(sigma)), (Part::BelowInteraction, Some(sigma))] {
            let a = model.hamiltonian(theta, g, s, part).unwrap().matrix;
            let b = model.hamiltonian(theta.conj(), g, s, part).unwrap().matrix;
            prop_assert!(b.max_abs_diff(&a.adjoint()) <= 1e-14 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn splitting_identity(re in -0.3f64..0.3, im in -0.4f64..0.4, g in 0.0f64..0.5, sigma in 0.01f64..1.0) {
        let model = Model::new(small_spec(6, 2)).unwrap();
        let theta = C64::new(re, im);
        let full = model.hamiltonian(theta, g, None, Part::Full).unwrap().matrix;
        let cut = model.hamiltonian(theta, g, Some(sigma), Part::Cutoff).unwrap().matrix;
        let below = model.hamiltonian(theta, g, Some(sigma), Part::BelowInteraction).unwrap().matrix;
        prop_assert_eq!(full.max_abs_diff(&cut.add(&below)), 0.0);
    }

    #[test]
    fn entries_are_analytic_in_theta(re in -0.2f64..0.2, im in -0.3f64..0.3, k in 0.01f64..4.0) {
        let spec = ModelSpec::default_nelson();
        let theta = C64::new(re, im);
        let h = 1e-5;
        let fd = (coupling_profile(&spec, theta + h, k) - coupling_profile(&spec, theta - h, k)) / (2.0 * h);
        let exact = coupling_profile_dtheta(&spec, theta, k);
        prop_assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1e-300));
    }

    #[test]
    fn decoupled_matrix_is_diagonal(re in -0.3f64..0.3, im in -0.4f64..0.4) {
        let model = Model::new(small_spec(6, 2)).unwrap();
        let h = model.hamiltonian(C64::new(re, im), 0.0, None, Part::Full).unwrap().matrix;
        prop_assert!(h.iter().all(|(r, c, v)| r == c || v.norm() == 0.0));
    }
}

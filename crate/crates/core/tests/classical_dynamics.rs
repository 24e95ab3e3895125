//! Chain dynamics against invariants that hold independently of the
//! integrator: manifold closure, energy, and the IS precession period.

mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scars_core::classical::integrator::chain_rhs;
use scars_core::classical::{
    floquet_averaged_coupling, integrate_chain, lyapunov_of_anchor, orbit_period, rotation, MonodromyOptions,
    StepControl,
};
use scars_core::{classical_energy, SpinConfiguration, Manifold, ManifoldPoint, Mat3, SpinChainModel, SpinMagnitude, Vec3};
use std::f64::consts::{PI, TAU};

fn anchor(theta: f64, phi: f64, manifold: Manifold) -> ManifoldPoint {
    ManifoldPoint::new(theta, phi, manifold).unwrap()
}

#[test]
fn equations_of_motion_follow_heisenberg_evolution() {
    // d<sigma_j>/dt = i<[H, sigma_j]> is exact for product states at t = 0,
    // which fixes the sign of the cross product
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let coupling = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let model = SpinChainModel::new(Vec3::new(0.7, -1.1, 0.4), coupling, n, SpinMagnitude::HALF).unwrap();
    let h = full_hamiltonian(&model);
    let config = SpinConfiguration::new((0..n).map(|_| random_anchor(&mut rng, Manifold::Ti).unit_vector()).collect()).unwrap();
    let psi = DMatrix::from_column_slice(1 << n, 1, &product_vector(&config));
    let mut rhs = vec![Vec3::zeros(); n];
    chain_rhs(&model, config.spins(), &mut rhs);
    for j in 0..n {
        for a in 0..3 {
            let mut sigma = DMatrix::zeros(1 << n, 1 << n);
            add_term(&mut sigma, n, &[(j, pauli(a))], 1.0);
            let commutator = &h * &sigma - &sigma * &h;
            let rate = (psi.adjoint() * commutator * &psi)[(0, 0)] * C64::i();
            assert!(rate.im.abs() < 1e-12);
            assert!((rate.re - rhs[j][a]).abs() < 1e-12, "site {j}, component {a}: {} vs {}", rate.re, rhs[j][a]);
        }
    }
}

#[test]
fn is_orbits_precess_with_the_bare_field() {
    // neighbour fields cancel on the (+, +, -, -) pattern, leaving |mu|
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for model in models(12) {
        for _ in 0..5 {
            let a = random_anchor(&mut rng, Manifold::Is);
            let t = orbit_period(&a, &model).unwrap();
            assert!((t - TAU / model.mu().norm()).abs() < 1e-6 * t, "T = {t}");
        }
    }
}

#[test]
fn orbits_return_after_one_period() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for model in models(8) {
        for manifold in [Manifold::Ti, Manifold::Is] {
            let a = random_anchor(&mut rng, manifold);
            let start = a.configuration(8).unwrap();
            let t = orbit_period(&a, &model).unwrap();
            let traj = integrate_chain(&start, &model, t, StepControl::for_period(t)).unwrap();
            assert!(traj.last().distance(&start) < 1e-7, "{manifold:?}");
        }
    }
}

#[test]
fn ti_energy_is_that_of_a_single_rotor() {
    let model = SpinChainModel::ising(Vec3::from(MU), -1.8, 16).unwrap();
    let a = anchor(1.1, 0.3, Manifold::Ti);
    let s = a.unit_vector();
    let per_site = 0.5 * (Vec3::from(MU).dot(&s) + s.dot(&(model.coupling() * s)));
    let e = classical_energy(&a.configuration(16).unwrap(), &model);
    assert!((e - 16.0 * per_site).abs() < 1e-12);
}

#[test]
fn stable_longitudinal_orbits_have_unit_multipliers() {
    let model = SpinChainModel::ising(Vec3::new(0.0, 0.0, 2.0), -0.3, 32).unwrap();
    let report = lyapunov_of_anchor(&anchor(PI / 2.0, 0.0, Manifold::Is), &model, MonodromyOptions::default()).unwrap();
    assert_eq!(report.result.lambda, 0.0);
    assert!(report.eigenvalues.iter().all(|z| (z.norm() - 1.0).abs() < 1e-5));
    assert!((report.determinant - 1.0).abs() < 1e-6);
}

#[test]
fn dynamics_are_covariant_under_global_rotations() {
    // rotating spins and field by R, with J -> R J R^T, maps solutions onto solutions
    let r = rotation(&Vec3::new(1.0, -2.0, 0.5).normalize(), 0.8);
    let base = SpinChainModel::xxz(Vec3::from(MU), -0.4, -1.8, 8).unwrap();
    let rotated = SpinChainModel::new(r * base.mu(), r * base.coupling() * r.transpose(), 8, SpinMagnitude::HALF).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let start = random_anchor(&mut rng, Manifold::Is).configuration(8).unwrap();
    let turned = scars_core::SpinConfiguration::new(start.spins().iter().map(|s| r * s).collect()).unwrap();
    let a = integrate_chain(&start, &base, 5.0, StepControl::for_period(5.0)).unwrap();
    let b = integrate_chain(&turned, &rotated, 5.0, StepControl::for_period(5.0)).unwrap();
    for (x, y) in a.last().spins().iter().zip(b.last().spins()) {
        assert!((r * x - y).norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn manifolds_are_invariant(theta in 0.05f64..3.09, phi in 0.0f64..TAU, is in any::<bool>(), which in 0usize..3) {
        let manifold = if is { Manifold::Is } else { Manifold::Ti };
        let model = models(8).swap_remove(which);
        let start = anchor(theta, phi, manifold).configuration(8).unwrap();
        let control = StepControl { dt: 0.002, sample_every: 50, energy_tolerance: 1e-8 };
        let traj = integrate_chain(&start, &model, 5.0, control).unwrap();
        for s in traj.states() {
            let dev = if is { s.is_deviation() } else { s.ti_deviation() };
            prop_assert!(dev < 1e-10);
            prop_assert!(s.max_norm_error() < 1e-10);
        }
        prop_assert!(traj.energy_drift(&model) < 1e-8);
    }

    #[test]
    fn averaged_coupling_commutes_with_field_rotations(
        f in prop::array::uniform3(-2.0f64..2.0),
        c in prop::array::uniform6(-1.5f64..1.5),
        angle in 0.0f64..TAU,
    ) {
        let field = Vec3::from(f);
        prop_assume!(field.norm() > 0.1);
        let j = Mat3::new(c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5]);
        let model = SpinChainModel::new(field, j, 8, SpinMagnitude::HALF).unwrap();
        let fc = floquet_averaged_coupling(&model).unwrap();
        let r = rotation(&field.normalize(), angle);
        prop_assert!((r.transpose() * fc.jbar * r - fc.jbar).amax() < 1e-12);
        prop_assert!((fc.jbar - fc.jbar.transpose()).amax() < 1e-12);
    }
}

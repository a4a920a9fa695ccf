//! Randomized invariants of the quantum and classical kernels.

use proptest::prelude::*;
use trotterlab_core::classical::{kicked_map_step, map_trajectory, tangent_map, ClassicalState};
use trotterlab_core::dynamics::{average_ipr, dissimilarity, floquet_operator, spectral_decompose, target_unitary, trotter_error, trotter_error_bound};
use trotterlab_core::linalg::{commutator, max_abs};
use trotterlab_core::observables::{error_ez_infinity_exact, otoc_series};
use trotterlab_core::spin::{spin_coherent_state, CollectiveOperators, ModelParams, SpinSector};

fn ops(n: usize) -> CollectiveOperators {
    CollectiveOperators::new(SpinSector::new(n).unwrap())
}

fn on_sphere() -> impl Strategy<Value = ClassicalState> {
    (0.0..std::f64::consts::PI, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(t, p)| ClassicalState::from_angles(t, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn trotter_bound_holds(p in 2u32..=4, n in 1usize..=64, s in 0.0..=1.0f64, t in 0.01..6.0f64, steps in 1u64..=40) {
        let ops = ops(n);
        let params = ModelParams::new(p, s, t / steps as f64).unwrap();
        let err = trotter_error(&params, &ops, t, steps).unwrap();
        let bound = trotter_error_bound(&params, &ops, t, steps).unwrap();
        prop_assert!(err <= bound * (1.0 + 1e-9) + 1e-12, "err {} > bound {}", err, bound);
    }

    #[test]
    fn floquet_operator_is_unitary(p in 2u32..=5, n in 1usize..=40, s in 0.0..=1.0f64, tau in 0.01..8.0f64) {
        let u = floquet_operator(&ModelParams::new(p, s, tau).unwrap(), &ops(n)).unwrap();
        prop_assert!(u.unitarity_residual() < 1e-10);
        prop_assert_eq!(u.dim(), n + 1);
    }

    #[test]
    fn spectral_decomposition_reconstructs(p in 2u32..=4, n in 1usize..=32, s in 0.0..=1.0f64, tau in 0.01..8.0f64) {
        let u = floquet_operator(&ModelParams::new(p, s, tau).unwrap(), &ops(n)).unwrap();
        let spec = spectral_decompose(&u).unwrap();
        prop_assert!(max_abs(&(spec.reconstruct() - u.matrix())) < 1e-8);
        let gram = spec.eigenvectors.adjoint() * &spec.eigenvectors;
        prop_assert!(max_abs(&(gram - trotterlab_core::linalg::CMatrix::identity(n + 1, n + 1))) < 1e-10);
        prop_assert!(spec.eigenphases.iter().all(|&x| x > -std::f64::consts::PI && x <= std::f64::consts::PI));
    }

    #[test]
    fn even_kick_preserves_parity(p in prop::sample::select(vec![2u32, 4, 6]), n in 1usize..=40, s in 0.0..=1.0f64, tau in 0.01..8.0f64) {
        let ops = ops(n);
        let u = floquet_operator(&ModelParams::new(p, s, tau).unwrap(), &ops).unwrap();
        prop_assert!(max_abs(&commutator(u.matrix(), &ops.parity())) < 1e-10);
    }

    #[test]
    fn ipr_is_symmetric(n in 1usize..=24, s1 in 0.0..=1.0f64, s2 in 0.0..=1.0f64, tau in 0.1..6.0f64) {
        let ops = ops(n);
        let a = spectral_decompose(&floquet_operator(&ModelParams::new(2, s1, tau).unwrap(), &ops).unwrap()).unwrap();
        let b = spectral_decompose(&floquet_operator(&ModelParams::new(3, s2, tau).unwrap(), &ops).unwrap()).unwrap();
        let ab = average_ipr(&a, &b).unwrap();
        let ba = average_ipr(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab > 0.0 && ab <= 1.0 + 1e-12);
    }

    #[test]
    fn dissimilarity_with_itself_vanishes(p in 2u32..=4, n in 1usize..=24, s in 0.0..=1.0f64, tau in 0.1..6.0f64) {
        let ops = ops(n);
        let u = target_unitary(&ModelParams::new(p, s, tau).unwrap(), &ops, tau).unwrap();
        prop_assert!(dissimilarity(&u, &u, n).unwrap().abs() < 1e-10);
    }

    #[test]
    fn coherent_states_are_normalized(n in 1usize..=64, theta in 0.0..=std::f64::consts::PI, phi in -10.0..10.0f64) {
        let state = spin_coherent_state(SpinSector::new(n).unwrap(), theta, phi).unwrap();
        prop_assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn map_preserves_norm(p in 2u32..=5, s in 0.0..=1.0f64, tau in 0.01..8.0f64, x in on_sphere()) {
        let params = ModelParams::new(p, s, tau).unwrap();
        let next = kicked_map_step(x, &params);
        prop_assert!((next.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_map_is_an_isometry(tau in 0.01..8.0f64, a in on_sphere(), b in on_sphere()) {
        let params = ModelParams::new(3, 0.0, tau).unwrap();
        let before = a.distance(&b);
        let after = kicked_map_step(a, &params).distance(&kicked_map_step(b, &params));
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn tangent_map_matches_finite_differences(p in 2u32..=5, s in 0.0..=1.0f64, tau in 0.01..6.0f64, x in on_sphere()) {
        let params = ModelParams::new(p, s, tau).unwrap();
        let analytic = tangent_map(x, &params);
        let h = 1e-6;
        let v = x.as_vector();
        for j in 0..3 {
            let mut plus = v;
            let mut minus = v;
            plus[j] += h;
            minus[j] -= h;
            let fp = kicked_map_step(ClassicalState::from_vector(&plus), &params).as_vector();
            let fm = kicked_map_step(ClassicalState::from_vector(&minus), &params).as_vector();
            let column = (fp - fm) / (2.0 * h);
            for i in 0..3 {
                prop_assert!((column[i] - analytic[(i, j)]).abs() < 1e-5, "entry ({}, {}): {} vs {}", i, j, column[i], analytic[(i, j)]);
            }
        }
        prop_assert!((analytic.determinant().abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn magnetization_error_is_periodic_in_azimuth(p in 2u32..=4, n in 2usize..=24, s in 0.0..=0.5f64, tau in 0.1..6.0f64, theta in 0.1..3.0f64, phi in -3.0..3.0f64) {
        let ops = ops(n);
        let params = ModelParams::new(p, s, tau).unwrap();
        let a = spin_coherent_state(ops.sector(), theta, phi).unwrap();
        let b = spin_coherent_state(ops.sector(), theta, phi + std::f64::consts::TAU).unwrap();
        let ea = error_ez_infinity_exact(&params, &ops, &a).unwrap().value;
        let eb = error_ez_infinity_exact(&params, &ops, &b).unwrap().value;
        prop_assert!((ea - eb).abs() < 1e-8);
    }

    #[test]
    fn otoc_is_nonnegative(p in 2u32..=4, n in 1usize..=16, s in 0.0..=1.0f64, tau in 0.1..6.0f64) {
        let series = otoc_series(&ModelParams::new(p, s, tau).unwrap(), &ops(n), 20).unwrap();
        prop_assert!(series.values[0].abs() < 1e-12);
        prop_assert!(series.values.iter().all(|&c| c >= -1e-12));
    }
}

#[test]
fn long_runs_stay_on_the_sphere() {
    let params = ModelParams::new(2, 0.8, 6.0).unwrap();
    let trajectory = map_trajectory(ClassicalState::from_angles(1.0, 0.5), &params, 1_000_000);
    let drift = trajectory.iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-9, "{drift}");
}

#[test]
fn casimir_and_commutators_across_sizes() {
    for n in [1, 2, 7, 64, 255] {
        let ops = ops(n);
        assert!(ops.casimir_residual() < 1e-10);
        let i = trotterlab_core::linalg::c64(0.0, 1.0);
        assert!(max_abs(&(commutator(&ops.jx, &ops.jy) - &ops.jz * i)) < 1e-12 * ops.j().max(1.0));
        assert!(max_abs(&(commutator(&ops.jy, &ops.jz) - &ops.jx * i)) < 1e-12 * ops.j().max(1.0));
        assert!(max_abs(&(commutator(&ops.jz, &ops.jx) - &ops.jy * i)) < 1e-12 * ops.j().max(1.0));
    }
}

mod common;

use common::*;
use fourlevel::atom::{liouvillian, rhs, vec_index};
use fourlevel::steady::{
    max_stable_step, relaxation_horizon, residual, steady_state, susceptibility_element,
    time_evolve, RESIDUAL_TOLERANCE,
};
use fourlevel::{AtomicSystem, DensityMatrix, DriveSet, Scheme, C64};
use nalgebra::Matrix4;
use proptest::prelude::*;

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Ladder4), Just(Scheme::Ypsilon4)]
}

prop_compose! {
    fn complex(scale: f64)(re in -scale..scale, im in -scale..scale) -> C64 {
        C64::new(re, im)
    }
}

prop_compose! {
    /// Hermitian, not necessarily positive or normalised.
    fn hermitian()(entries in prop::collection::vec(complex(1.0), 16)) -> DensityMatrix {
        let a = Matrix4::from_iterator(entries);
        DensityMatrix((a + a.adjoint()) * C64::new(0.5, 0.0))
    }
}

prop_compose! {
    fn setup()(
        scheme in scheme(),
        rates in prop::array::uniform3(0.0..3.0f64),
        coll in 0.0..0.5f64,
        amps in prop::array::uniform3(complex(15.0)),
        dets in prop::array::uniform3(-30.0..30.0f64),
    ) -> (AtomicSystem, DriveSet) {
        let sys = AtomicSystem::new(scheme, rates, coll).unwrap();
        let coupling = if scheme == Scheme::Ladder4 { amps[0] } else { C64::new(0.0, 0.0) };
        let drives = DriveSet {
            coupling,
            probe: amps[1],
            control: amps[2],
            delta1: dets[0],
            delta2: dets[1],
            delta: dets[2],
        };
        (sys, drives)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generator_preserves_trace_and_hermiticity((sys, f) in setup(), rho in hermitian()) {
        let d = rhs(&sys, &f, &rho);
        prop_assert!(d.trace().norm() < 1e-12);
        prop_assert!((d - d.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn diagonal_columns_sum_to_zero((sys, f) in setup()) {
        let l = liouvillian(&sys, &f);
        for col in 0..16 {
            let s: C64 = (0..4).map(|k| l[(vec_index(k, k), col)]).sum();
            prop_assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn steady_state_is_a_valid_fixed_point((sys, f) in setup()) {
        prop_assume!(sys.rates().iter().all(|&r| r > 0.05));
        let rho = steady_state(&sys, &f).unwrap();
        rho.validate().unwrap();
        prop_assert!(residual(&liouvillian(&sys, &f), &rho) < RESIDUAL_TOLERANCE);
        let eig = rho.matrix().symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&e| e >= -1e-6), "{eig}");
    }
}

#[test]
fn ladder_without_control_decouples_level_four() {
    let mut rng = rng(21);
    for _ in 0..20 {
        let sys = system(&mut rng, Scheme::Ladder4);
        let mut f = drives(&mut rng, Scheme::Ladder4);
        f.control = C64::new(0.0, 0.0);
        let mut rho = density_matrix(&mut rng);
        for k in 0..4 {
            rho.0[(3, k)] = C64::new(0.0, 0.0);
            rho.0[(k, 3)] = C64::new(0.0, 0.0);
        }
        let tr = rho.trace();
        rho.0 /= tr;
        let d = rhs(&sys, &f, &rho);
        for k in 0..4 {
            assert!(d[(3, k)].norm() < 1e-14 && d[(k, 3)].norm() < 1e-14);
        }
    }
}

#[test]
fn steady_state_is_unique_and_attracting() {
    let mut rng = rng(22);
    for scheme in [Scheme::Ladder4, Scheme::Ypsilon4] {
        for _ in 0..20 {
            let sys = system(&mut rng, scheme);
            let f = drives(&mut rng, scheme);
            let ss = steady_state(&sys, &f).unwrap();
            let t = relaxation_horizon(&sys).unwrap();
            let dt = max_stable_step(&sys, &f);
            let a = time_evolve(&sys, &f, &density_matrix(&mut rng), t, dt).unwrap();
            let b = time_evolve(&sys, &f, &density_matrix(&mut rng), t, dt).unwrap();
            assert!(max_abs_diff(&a.0, &b.0) < 1e-6);
            assert!(max_abs_diff(&a.0, &ss.0) < 1e-6);
        }
    }
}

#[test]
fn probe_detuning_sign_mirrors_the_coherence() {
    let sys = sodium();
    for d2 in [0.5, 3.0, 10.0, 17.3] {
        let f = DriveSet::ladder(10.0, 1.0, 10.0);
        let plus = steady_state(&sys, &f.with_detunings(0.0, d2, 0.0)).unwrap();
        let minus = steady_state(&sys, &f.with_detunings(0.0, -d2, 0.0)).unwrap();
        assert!((plus.get(3, 2).norm() - minus.get(3, 2).norm()).abs() < 1e-10);
        for k in 1..=4 {
            assert!((plus.population(k) - minus.population(k)).abs() < 1e-10);
        }
    }
}

#[test]
fn weak_probe_response_is_linear() {
    let sys = sodium();
    for g in [0.0, 10.0] {
        let chi = |g2: f64| {
            let f = DriveSet::ladder(10.0, g2, g).with_detunings(0.0, 2.0, 0.0);
            susceptibility_element(&sys, &f).unwrap() / g2
        };
        let (a, b) = (chi(1e-4), chi(1e-3));
        assert!((a - b).norm() / a.norm() < 1e-3);
    }
}

#[test]
fn autler_townes_peaks_at_coupling_strength() {
    let sys = sodium();
    let grid: Vec<f64> = (-300..=300).map(|k| k as f64 * 0.1).collect();
    let absorption: Vec<f64> = grid
        .iter()
        .map(|&d2| {
            let f = DriveSet::ladder(10.0, 1.0, 0.0).with_detunings(0.0, d2, 0.0);
            susceptibility_element(&sys, &f).unwrap().im.abs()
        })
        .collect();
    for target in [-10.0, 10.0] {
        let k = grid
            .iter()
            .position(|&d| (d - target).abs() < 1e-9)
            .unwrap();
        let window = &absorption[k - 20..=k + 20];
        let best = window.iter().cloned().fold(f64::MIN, f64::max);
        let at = window.iter().position(|&v| v == best).unwrap() as isize - 20;
        assert!(at.abs() <= 1, "peak offset {at} grid steps from {target}");
    }
}

//! Invariants of propagation, sweeps, the cavity and the pulse module.

mod common;

use common::*;
use fourlevel::atom::liouvillian;
use fourlevel::cavity::{
    bistability_thresholds, cavity_sweep, cooperation_to_mirror, default_x_grid,
    solve_input_output, CavitySetup,
};
use fourlevel::experiments::{linspace, probe_spectrum, SweepConfig};
#[cfg(feature = "parallel")]
use fourlevel::parallel::{map_parallel, map_sequential};
use fourlevel::propagation::{local_state, propagate, MediumSpec, PumpMode};
use fourlevel::pulse::{energies, pulse_transmission, PulseSpec};
use fourlevel::steady::residual;
use fourlevel::{DriveSet, C64};
use rand::seq::SliceRandom;
use rand::Rng;
use std::f64::consts::PI;

fn medium(steps: usize) -> MediumSpec {
    MediumSpec::new(1.0, [12.0, 16.0, 0.2], steps).unwrap()
}

fn fig2(g: f64, g2: f64, steps: usize) -> SweepConfig {
    SweepConfig {
        system: sodium(),
        drives: DriveSet::ladder(10.0, g2, g),
        medium: medium(steps),
    }
}

#[test]
fn spectrum_is_symmetric_in_probe_detuning() {
    for g in [0.0, 10.0] {
        let grid = linspace(-25.0, 25.0, 51);
        let r = probe_spectrum(&fig2(g, 1.0, 200), &grid).unwrap();
        let t = r.column("T2").unwrap();
        for k in 0..t.len() {
            assert!((t[k] - t[t.len() - 1 - k]).abs() < 1e-8);
        }
    }
}

#[test]
fn permuted_grid_gives_identical_bits() {
    let cfg = fig2(10.0, 1.0, 200);
    let grid = linspace(-20.0, 20.0, 41);
    let mut shuffled = grid.clone();
    shuffled.shuffle(&mut rng(31));
    let a = probe_spectrum(&cfg, &grid).unwrap();
    let b = probe_spectrum(&cfg, &shuffled).unwrap();
    assert_eq!(a, b);
}

#[cfg(feature = "parallel")]
#[test]
fn sequential_and_parallel_maps_agree_bitwise() {
    let cfg = fig2(10.0, 1.0, 200);
    let grid = linspace(-5.0, 5.0, 16);
    let f = |d2: f64| {
        let d = cfg.drives.with_detunings(0.0, d2, 0.0);
        propagate(&cfg.system, &d, &cfg.medium)
            .unwrap()
            .exit()
            .probe
    };
    assert_eq!(map_sequential(&grid, f), map_parallel(&grid, f));
}

#[test]
fn local_states_along_the_medium_are_stationary() {
    let cfg = fig2(10.0, 1.0, 400);
    let drives = cfg.drives.with_detunings(0.0, 3.0, 0.0);
    let medium = cfg.medium.with_pumps(PumpMode::Depleted);
    let profile = propagate(&cfg.system, &drives, &medium).unwrap();
    let mut rng = rng(32);
    for _ in 0..10 {
        let k = rng.random_range(0..profile.len());
        let fields = profile.at(k);
        let rho = local_state(&cfg.system, &drives, &fields).unwrap();
        let local = fourlevel::DriveSet {
            coupling: fields.coupling,
            probe: fields.probe,
            control: fields.control,
            ..drives
        };
        assert!(residual(&liouvillian(&cfg.system, &local), &rho) < 1e-10);
    }
}

#[test]
fn weak_probe_is_never_amplified() {
    for g in [0.0, 10.0] {
        let grid = linspace(-30.0, 30.0, 61);
        let r = probe_spectrum(&fig2(g, 1.0, 200), &grid).unwrap();
        assert!(r.column("T2").unwrap().iter().all(|&t| t <= 1.0 + 1e-6));
    }
}

fn cavity_setup(g1: f64, g: f64, medium: MediumSpec, cooperation: f64) -> CavitySetup {
    CavitySetup {
        system: sodium(),
        drives: DriveSet::ladder(g1, 0.0, g),
        medium,
        cavity: cooperation_to_mirror(cooperation, &medium, 1.0, 0.0).unwrap(),
    }
}

#[test]
fn empty_cavity_transmits_everything() {
    let vacuum = MediumSpec {
        eta: [0.0; 3],
        ..medium(100)
    };
    // Mirrors come from the loaded medium; the atoms are then removed.
    let setup = CavitySetup {
        medium: vacuum,
        ..cavity_setup(5.0, 0.0, medium(100), 400.0)
    };
    let curve = cavity_sweep(&setup, &default_x_grid()).unwrap();
    for (i, o) in curve.input.iter().zip(&curve.output) {
        assert!((i.sqrt() - o.sqrt()).abs() <= 1e-12 * i.sqrt().max(1.0));
    }
}

#[test]
fn weak_cooperation_gives_single_valued_response() {
    // C = 16 is the mirrorless limit for η₂₃L = 16.
    let setup = cavity_setup(5.0, 0.0, medium(200), 16.0);
    let curve = cavity_sweep(&setup, &default_x_grid()).unwrap();
    assert!(curve.input.windows(2).all(|w| w[1] > w[0]));
    assert!(bistability_thresholds(&curve).unwrap().is_none());
}

#[test]
fn cavity_points_solve_the_self_consistency_condition() {
    let setup = cavity_setup(5.0, 0.0, medium(400), 400.0);
    let grid = default_x_grid();
    let curve = cavity_sweep(&setup, &grid).unwrap();
    let t = bistability_thresholds(&curve)
        .unwrap()
        .expect("S-curve at G1 = 5");
    // Lower branch below the switch-up point, upper branch beyond switch-down.
    let lower_x = t.lower_x.unwrap();
    let picks = [
        t.upper_x * 0.1,
        t.upper_x * 0.3,
        t.upper_x * 0.6,
        lower_x * 2.0,
        lower_x * 5.0,
    ];
    for x in picks {
        let p = setup.point(x.into()).unwrap();
        let q = solve_input_output(&setup, p.input, C64::from(x * 1.01), 1e-12, 60).unwrap();
        assert!((q.x - p.x).norm() / x < 1e-6);
        assert!((q.output.norm_sqr() / p.output.norm_sqr() - 1.0).abs() < 1e-6);
    }
    // Lowest branch: output never exceeds input.
    for (k, &x) in grid.iter().enumerate() {
        if x < t.upper_x {
            assert!(curve.output[k] <= curve.input[k] + 1e-6);
        }
    }
}

#[test]
fn narrowband_pulse_follows_carrier_transfer() {
    let spec = PulseSpec {
        sigma: 2.0 * PI * 5e3,
        peak_amplitude: 0.1,
        gamma_rad_per_s: 2.0 * PI * 6e6,
        points: 4096,
        span_sigmas: 32.0,
    };
    let r = pulse_transmission(
        &spec,
        &sodium(),
        &DriveSet::ladder(10.0, 0.1, 0.0),
        &medium(200),
    )
    .unwrap();
    let h0 = r.transfer_at_carrier.norm_sqr();
    assert!((r.peak_ratio / h0 - 1.0).abs() < 1e-4);
    let (t, w) = energies(&spec, &r.output_spectrum, &r.output_trace);
    assert!((t / w - 1.0).abs() < 1e-8);
    assert!(r.regime_warning.is_none());
}

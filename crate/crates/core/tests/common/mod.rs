#![allow(dead_code)]

use fourlevel::{AtomicSystem, DensityMatrix, DriveSet, Scheme, C64};
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng, scale: f64) -> C64 {
    C64::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

/// Random positive unit-trace density matrix A·A† / tr(A·A†).
pub fn density_matrix(rng: &mut impl Rng) -> DensityMatrix {
    let a = Matrix4::from_fn(|_, _| complex(rng, 1.0));
    let m = a * a.adjoint();
    let tr = m.trace();
    DensityMatrix(m / tr)
}

pub fn drives(rng: &mut impl Rng, scheme: Scheme) -> DriveSet {
    DriveSet {
        coupling: match scheme {
            Scheme::Ladder4 => complex(rng, 10.0),
            Scheme::Ypsilon4 => C64::new(0.0, 0.0),
        },
        probe: complex(rng, 10.0),
        control: complex(rng, 10.0),
        delta1: rng.random_range(-20.0..20.0),
        delta2: rng.random_range(-20.0..20.0),
        delta: rng.random_range(-20.0..20.0),
    }
}

pub fn system(rng: &mut impl Rng, scheme: Scheme) -> AtomicSystem {
    let rates = [(); 3].map(|_| rng.random_range(0.1..3.0));
    AtomicSystem::new(scheme, rates, rng.random_range(0.0..0.5)).unwrap()
}

pub fn sodium() -> AtomicSystem {
    AtomicSystem::ladder(1.0, 1.0, 0.005 / 6.0).unwrap()
}

pub fn max_abs_diff(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

//! Stationary solutions of the master equation and a time-integration oracle.

use nalgebra::{SMatrix, SVector};

use crate::atom::{
    dephasing_rates, liouvillian, rhs, vec_index, AtomicSystem, DensityMatrix, DriveSet,
    Liouvillian, Scheme, C64,
};
use crate::error::{Error, Result};

/// Largest admissible ‖L·vec(ρ_ss)‖∞.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Largest admissible |tr ρ(t) − tr ρ(0)| during time evolution.
pub const TRACE_DRIFT_TOLERANCE: f64 = 1e-9;

type RealGenerator = SMatrix<f64, 16, 16>;

/// Strictly lower coherences, zero-based, in the order used by the real coordinates.
const LOWER: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// Real coordinates of a Hermitian matrix: four populations followed by
/// (Re, Im) of each strictly-lower coherence.
fn real_coords(v: &SVector<C64, 16>) -> SVector<f64, 16> {
    let mut x = SVector::<f64, 16>::zeros();
    for k in 0..4 {
        x[k] = v[vec_index(k, k)].re;
    }
    for (n, &(i, j)) in LOWER.iter().enumerate() {
        let z = v[vec_index(i, j)];
        x[4 + 2 * n] = z.re;
        x[5 + 2 * n] = z.im;
    }
    x
}

fn from_real_coords(x: &SVector<f64, 16>) -> DensityMatrix {
    let mut v = SVector::<C64, 16>::zeros();
    for k in 0..4 {
        v[vec_index(k, k)] = x[k].into();
    }
    for (n, &(i, j)) in LOWER.iter().enumerate() {
        let z = C64::new(x[4 + 2 * n], x[5 + 2 * n]);
        v[vec_index(i, j)] = z;
        v[vec_index(j, i)] = z.conj();
    }
    DensityMatrix::from_vec(&v)
}

/// Restriction of a Hermiticity-preserving generator to real coordinates.
fn real_generator(l: &Liouvillian) -> RealGenerator {
    // Column sources: populations map to one vec entry; a coherence pair
    // (i, j) contributes through both vec(ρ)_ij and vec(ρ)_ji.
    let mut m = RealGenerator::zeros();
    let write_row = |out: usize, src: &dyn Fn(usize) -> C64, m: &mut RealGenerator| {
        for k in 0..4 {
            m[(k, out)] = src(vec_index(k, k)).re;
        }
        for (n, &(i, j)) in LOWER.iter().enumerate() {
            let z = src(vec_index(i, j));
            m[(4 + 2 * n, out)] = z.re;
            m[(5 + 2 * n, out)] = z.im;
        }
    };
    for k in 0..4 {
        let col = vec_index(k, k);
        write_row(k, &|row| l[(row, col)], &mut m);
    }
    for (n, &(i, j)) in LOWER.iter().enumerate() {
        let (lo, up) = (vec_index(i, j), vec_index(j, i));
        // Re part: basis |i⟩⟨j| + |j⟩⟨i|; Im part: i|i⟩⟨j| − i|j⟩⟨i|.
        write_row(4 + 2 * n, &|row| l[(row, lo)] + l[(row, up)], &mut m);
        write_row(
            5 + 2 * n,
            &|row| {
                let d = l[(row, lo)] - l[(row, up)];
                C64::new(-d.im, d.re)
            },
            &mut m,
        );
    }
    m
}

/// ‖L·vec(ρ)‖∞.
pub fn residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    (l * rho.to_vec())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// ‖·‖∞ of the complex matrix whose real coordinates are `r`.
fn real_residual(r: &SVector<f64, 16>) -> f64 {
    let diag = r.iter().take(4).fold(0.0_f64, |m, v| m.max(v.abs()));
    (0..6).fold(diag, |m, n| m.max(r[4 + 2 * n].hypot(r[5 + 2 * n])))
}

/// Solves L·vec(ρ) = 0 with the ρ̇₁₁ row replaced by tr ρ = 1.
///
/// The solve is done in the 16 real coordinates of a Hermitian matrix with an
/// LU factorisation (partial pivoting); the residual ‖L·vec(ρ)‖∞ is checked
/// before returning.
pub fn steady_state(system: &AtomicSystem, drives: &DriveSet) -> Result<DensityMatrix> {
    if system.min_nonzero_decay().is_none() {
        return Err(Error::DegenerateSteadyState);
    }
    let full = real_generator(&liouvillian(system, drives));
    let mut m = full;
    m.row_mut(0).fill(0.0);
    for k in 0..4 {
        m[(0, k)] = 1.0;
    }
    let mut b = SVector::<f64, 16>::zeros();
    b[0] = 1.0;
    let x = m.lu().solve(&b).ok_or(Error::DegenerateSteadyState)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSteadyState);
    }
    let res = real_residual(&(full * x));
    if res.is_nan() || res >= RESIDUAL_TOLERANCE {
        return Err(Error::Convergence {
            residual: res,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(from_real_coords(&x))
}

/// The coherence combination that sources the probe propagation equation:
/// ρ₃₂ for the ladder, ρ₂₁ + ρ₃₂ for the Y scheme.
pub fn susceptibility_element(system: &AtomicSystem, drives: &DriveSet) -> Result<C64> {
    let rho = steady_state(system, drives)?;
    Ok(probe_coherence(system.scheme(), &rho))
}

pub(crate) fn probe_coherence(scheme: Scheme, rho: &DensityMatrix) -> C64 {
    match scheme {
        Scheme::Ladder4 => rho.get(3, 2),
        Scheme::Ypsilon4 => rho.get(2, 1) + rho.get(3, 2),
    }
}

/// Integration horizon `50/γ_min` used to compare against the steady state.
pub fn relaxation_horizon(system: &AtomicSystem) -> Option<f64> {
    system.min_nonzero_decay().map(|g| 50.0 / g)
}

/// Largest step accepted by [`time_evolve`].
pub fn max_stable_step(system: &AtomicSystem, drives: &DriveSet) -> f64 {
    let scale = drives
        .max_amplitude()
        .max(dephasing_rates(system).max())
        .max(1.0);
    1e-2 / scale
}

/// One classical RK4 step as a matrix: for a linear right-hand side the four
/// stages collapse to `I + hM + (hM)²/2 + (hM)³/6 + (hM)⁴/24`.
fn rk4_step_matrix(m: &RealGenerator, h: f64) -> RealGenerator {
    let hm = m * h;
    let mut term = RealGenerator::identity();
    let mut step = RealGenerator::identity();
    for k in 1..=4 {
        term = term * hm / k as f64;
        step += term;
    }
    step
}

/// Replaces ρ₁₁ by the trace as the first real coordinate. In these
/// coordinates a trace-preserving step matrix has first row `e₀ᵀ`.
fn to_trace_coords(x: &SVector<f64, 16>) -> SVector<f64, 16> {
    let mut y = *x;
    y[0] = x[0] + x[1] + x[2] + x[3];
    y
}

fn from_trace_coords(y: &SVector<f64, 16>) -> SVector<f64, 16> {
    let mut x = *y;
    x[0] = y[0] - y[1] - y[2] - y[3];
    x
}

/// One explicit RK4 step evaluated on [`rhs`].
pub fn rk4_step(
    system: &AtomicSystem,
    drives: &DriveSet,
    rho: &DensityMatrix,
    h: f64,
) -> DensityMatrix {
    let f = |r: &DensityMatrix| rhs(system, drives, r);
    let k1 = f(rho);
    let k2 = f(&DensityMatrix(rho.0 + k1 * C64::from(h / 2.0)));
    let k3 = f(&DensityMatrix(rho.0 + k2 * C64::from(h / 2.0)));
    let k4 = f(&DensityMatrix(rho.0 + k3 * C64::from(h)));
    DensityMatrix(
        rho.0 + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0),
    )
}

/// ρ(t_final) by classical RK4 with a uniform step no larger than `dt`.
///
/// The generator is constant, so `n` RK4 steps equal the `n`-th power of the
/// one-step matrix; the power is taken by repeated squaring, which makes long
/// horizons (`50/γ_min` with γ_min ≪ 1) affordable.
pub fn time_evolve(
    system: &AtomicSystem,
    drives: &DriveSet,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    rho0.validate()?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::parameter("t_final", "must be finite and >= 0"));
    }
    let limit = max_stable_step(system, drives);
    if dt.is_nan() || dt <= 0.0 || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize(format!(
            "dt = {dt} outside (0, {limit}] required for stable RK4"
        )));
    }
    let steps = (t_final / dt).ceil().max(1.0) as u64;
    let h = t_final / steps as f64;

    let step = rk4_step_matrix(&real_generator(&liouvillian(system, drives)), h);
    // Conjugate into trace coordinates and pin the trace row to exactly e₀ᵀ,
    // which repeated squaring then preserves bit for bit.
    let to_trace = RealGenerator::from_fn(|r, c| f64::from(r == c || (r == 0 && c < 4)));
    let from_trace = RealGenerator::from_fn(|r, c| {
        if r == c {
            1.0
        } else if r == 0 && c < 4 {
            -1.0
        } else {
            0.0
        }
    });
    let mut power = to_trace * step * from_trace;
    power.row_mut(0).fill(0.0);
    power[(0, 0)] = 1.0;

    let mut y = to_trace_coords(&real_coords(&rho0.to_vec()));
    let mut n = steps;
    while n > 0 {
        if n & 1 == 1 {
            y = power * y;
        }
        n >>= 1;
        if n > 0 {
            power = power * power;
        }
    }
    let v = from_real_coords(&from_trace_coords(&y)).to_vec();
    let rho = DensityMatrix::from_vec(&v);
    let drift = (rho.trace() - rho0.trace()).norm();
    let norm = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if drift.is_nan() || drift >= TRACE_DRIFT_TOLERANCE || norm.is_nan() || norm > 1.0 + 1e-6 {
        return Err(Error::StepSize(format!(
            "integration unstable: trace drift {drift:e}, max element {norm:e}"
        )));
    }
    Ok(rho)
}

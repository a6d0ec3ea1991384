//! Level schemes, drive fields and the rotating-frame master-equation generator.
//!
//! All rates, Rabi amplitudes and detunings are in units of a reference rate γ.
//! Levels are numbered 1..=4 in the public API, matching the usual `ρ_ij`
//! notation; storage is zero-based.
//!
//! The generator acts on the row-major vectorisation of ρ, `vec(ρ)[4(i-1) + (j-1)] = ρ_ij`.
//! It is assembled from three pieces:
//!
//! * the coherent part `-i[H, ρ]` with the rotating-frame Hamiltonian of the scheme,
//! * population transfer `ρ_jj → ρ_ii` at rate γ_ij for every decay channel,
//! * damping: populations lose their total out-rate, coherences decay at Γ_ij.

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Generator acting on the row-major vectorised density matrix.
pub type Liouvillian = SMatrix<C64, 16, 16>;

const I: C64 = C64::new(0.0, 1.0);

/// Row-major index of `ρ_ij` (zero-based levels) in `vec(ρ)`.
#[inline]
pub const fn vec_index(i: usize, j: usize) -> usize {
    4 * i + j
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// `|1⟩ ↔ |2⟩ ↔ |3⟩ ↔ |4⟩`: coupling, probe and control on successive rungs.
    #[serde(rename = "ladder")]
    Ladder4,
    /// `|1⟩ ↔ |2⟩ ↔ |3⟩` driven by one probe, control on `|2⟩ ↔ |4⟩`.
    #[serde(rename = "ytype")]
    Ypsilon4,
}

impl Scheme {
    /// Decay channels `(i, j)`: spontaneous emission from `|j⟩` to `|i⟩`.
    pub const fn channels(self) -> [(usize, usize); 3] {
        match self {
            Scheme::Ladder4 => [(1, 2), (2, 3), (3, 4)],
            Scheme::Ypsilon4 => [(1, 2), (2, 3), (2, 4)],
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Scheme::Ladder4 => "ladder",
            Scheme::Ypsilon4 => "ytype",
        }
    }
}

/// A four-level atom: scheme, its three decay rates and a collisional rate.
///
/// `rates[k]` belongs to `scheme.channels()[k]`, so the channel set of each
/// scheme is fixed by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomicSystem {
    scheme: Scheme,
    rates: [f64; 3],
    gamma_coll: f64,
}

impl AtomicSystem {
    pub fn new(scheme: Scheme, rates: [f64; 3], gamma_coll: f64) -> Result<Self> {
        for (k, &rate) in rates.iter().enumerate() {
            let (i, j) = scheme.channels()[k];
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::parameter(
                    format!("gamma_{i}{j}"),
                    format!("decay rate must be finite and >= 0, got {rate}"),
                ));
            }
        }
        if !gamma_coll.is_finite() || gamma_coll < 0.0 {
            return Err(Error::parameter(
                "gamma_coll",
                format!("collisional rate must be finite and >= 0, got {gamma_coll}"),
            ));
        }
        Ok(Self {
            scheme,
            rates,
            gamma_coll,
        })
    }

    pub fn ladder(gamma12: f64, gamma23: f64, gamma34: f64) -> Result<Self> {
        Self::new(Scheme::Ladder4, [gamma12, gamma23, gamma34], 0.0)
    }

    pub fn ytype(gamma12: f64, gamma23: f64, gamma24: f64) -> Result<Self> {
        Self::new(Scheme::Ypsilon4, [gamma12, gamma23, gamma24], 0.0)
    }

    pub fn with_collisions(mut self, gamma_coll: f64) -> Result<Self> {
        self = Self::new(self.scheme, self.rates, gamma_coll)?;
        Ok(self)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn rates(&self) -> [f64; 3] {
        self.rates
    }

    pub fn gamma_coll(&self) -> f64 {
        self.gamma_coll
    }

    /// γ_ij, the emission rate from `|j⟩` to `|i⟩`; zero for absent channels.
    pub fn decay(&self, i: usize, j: usize) -> f64 {
        self.scheme
            .channels()
            .iter()
            .zip(self.rates)
            .find(|(&ch, _)| ch == (i, j))
            .map_or(0.0, |(_, rate)| rate)
    }

    /// Total emission rate out of level `i` (1-based).
    pub fn out_rate(&self, i: usize) -> f64 {
        self.scheme
            .channels()
            .iter()
            .zip(self.rates)
            .filter(|(&(_, upper), _)| upper == i)
            .map(|(_, rate)| rate)
            .sum()
    }

    /// Smallest nonzero decay rate, or `None` for a system without decay.
    pub fn min_nonzero_decay(&self) -> Option<f64> {
        self.rates
            .iter()
            .copied()
            .filter(|&r| r > 0.0)
            .min_by(f64::total_cmp)
    }
}

/// Coherence damping rates Γ_ij (symmetric, zero diagonal).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dephasing([[f64; 4]; 4]);

impl Dephasing {
    /// Γ_ij for 1-based levels.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i - 1][j - 1]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Γ_ij = ½(out-rate of |i⟩ + out-rate of |j⟩) + γ_coll for every pair i ≠ j.
pub fn dephasing_rates(system: &AtomicSystem) -> Dephasing {
    let mut table = [[0.0; 4]; 4];
    for i in 1..=4 {
        for j in 1..=4 {
            if i != j {
                table[i - 1][j - 1] =
                    0.5 * (system.out_rate(i) + system.out_rate(j)) + system.gamma_coll;
            }
        }
    }
    Dephasing(table)
}

/// Complex Rabi half-amplitudes and detunings (units of γ).
///
/// For [`Scheme::Ypsilon4`] the `probe` amplitude g drives both `|1⟩ ↔ |2⟩`
/// and `|2⟩ ↔ |3⟩`; `coupling` is not used by that scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveSet {
    pub coupling: C64,
    pub probe: C64,
    pub control: C64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta: f64,
}

impl DriveSet {
    pub fn ladder(coupling: f64, probe: f64, control: f64) -> Self {
        Self {
            coupling: coupling.into(),
            probe: probe.into(),
            control: control.into(),
            ..Self::default()
        }
    }

    pub fn ytype(probe: f64, control: f64) -> Self {
        Self {
            probe: probe.into(),
            control: control.into(),
            ..Self::default()
        }
    }

    pub fn with_detunings(mut self, delta1: f64, delta2: f64, delta: f64) -> Self {
        self.delta1 = delta1;
        self.delta2 = delta2;
        self.delta = delta;
        self
    }

    /// Largest drive magnitude.
    pub fn max_amplitude(&self) -> f64 {
        self.coupling
            .norm()
            .max(self.probe.norm())
            .max(self.control.norm())
    }
}

/// 4×4 density matrix in the rotating frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(pub Matrix4<C64>);

impl DensityMatrix {
    /// `|k⟩⟨k|` for a 1-based level.
    pub fn pure_level(k: usize) -> Self {
        let mut m = Matrix4::zeros();
        m[(k - 1, k - 1)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn ground() -> Self {
        Self::pure_level(1)
    }

    /// ρ_ij for 1-based levels.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i - 1, j - 1)]
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[(k - 1, k - 1)].re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn to_vec(&self) -> SMatrix<C64, 16, 1> {
        SMatrix::from_fn(|k, _| self.0[(k / 4, k % 4)])
    }

    pub fn from_vec(v: &SMatrix<C64, 16, 1>) -> Self {
        Self(Matrix4::from_fn(|i, j| v[vec_index(i, j)]))
    }

    /// Checks the trace, Hermiticity and population-range invariants.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::parameter(
                "rho",
                format!("not Hermitian (deviation {herm:e})"),
            ));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::parameter("rho", format!("trace {tr} != 1")));
        }
        for k in 1..=4 {
            let p = self.population(k);
            if !(-1e-8..=1.0 + 1e-8).contains(&p) {
                return Err(Error::parameter(
                    "rho",
                    format!("population rho_{k}{k} = {p} outside [0, 1]"),
                ));
            }
        }
        Ok(())
    }
}

/// Rotating-frame Hamiltonian (ħ = 1).
///
/// The frame energies are minus the accumulated detunings along each path
/// from `|1⟩`; the couplings enter as `H_21 = -G₁`, `H_32 = -G₂`, `H_43 = -G`
/// (ladder) or `H_21 = H_32 = -g`, `H_42 = -G` (Y-type).
pub fn hamiltonian(system: &AtomicSystem, drives: &DriveSet) -> Matrix4<C64> {
    let mut h = Matrix4::<C64>::zeros();
    let d1 = drives.delta1;
    let d2 = drives.delta2;
    let dc = drives.delta;
    let mut couple = |upper: usize, lower: usize, amp: C64| {
        h[(upper - 1, lower - 1)] = -amp;
        h[(lower - 1, upper - 1)] = -amp.conj();
    };
    let energies = match system.scheme() {
        Scheme::Ladder4 => {
            couple(2, 1, drives.coupling);
            couple(3, 2, drives.probe);
            couple(4, 3, drives.control);
            [0.0, -d1, -(d1 + d2), -(d1 + d2 + dc)]
        }
        Scheme::Ypsilon4 => {
            couple(2, 1, drives.probe);
            couple(3, 2, drives.probe);
            couple(4, 2, drives.control);
            [0.0, -d1, -(d1 + d2), -(d1 + dc)]
        }
    };
    for (k, e) in energies.into_iter().enumerate() {
        h[(k, k)] = e.into();
    }
    h
}

/// Generator L with `d vec(ρ)/dt = L · vec(ρ)`.
pub fn liouvillian(system: &AtomicSystem, drives: &DriveSet) -> Liouvillian {
    let h = hamiltonian(system, drives);
    let gamma = dephasing_rates(system);
    let mut l = Liouvillian::zeros();

    // -i(Hρ - ρH)
    for i in 0..4 {
        for j in 0..4 {
            let row = vec_index(i, j);
            for k in 0..4 {
                l[(row, vec_index(k, j))] -= I * h[(i, k)];
                l[(row, vec_index(i, k))] += I * h[(k, j)];
            }
        }
    }

    for (k, &(lower, upper)) in system.scheme().channels().iter().enumerate() {
        let rate = system.rates()[k];
        l[(
            vec_index(lower - 1, lower - 1),
            vec_index(upper - 1, upper - 1),
        )] += rate;
    }
    for i in 0..4 {
        for j in 0..4 {
            let row = vec_index(i, j);
            let damping = if i == j {
                system.out_rate(i + 1)
            } else {
                gamma.get(i + 1, j + 1)
            };
            l[(row, row)] -= damping;
        }
    }
    l
}

/// dρ/dt evaluated with 4×4 matrix algebra (no 16×16 generator).
pub fn rhs(system: &AtomicSystem, drives: &DriveSet, rho: &DensityMatrix) -> Matrix4<C64> {
    let h = hamiltonian(system, drives);
    let gamma = dephasing_rates(system);
    let r = &rho.0;
    let mut d = (h * r - r * h) * (-I);
    for (k, &(lower, upper)) in system.scheme().channels().iter().enumerate() {
        d[(lower - 1, lower - 1)] += system.rates()[k] * r[(upper - 1, upper - 1)];
    }
    for i in 0..4 {
        for j in 0..4 {
            let damping = if i == j {
                system.out_rate(i + 1)
            } else {
                gamma.get(i + 1, j + 1)
            };
            d[(i, j)] -= damping * r[(i, j)];
        }
    }
    d
}

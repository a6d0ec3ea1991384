//! Quasi-static propagation of the driving fields through the medium.
//!
//! Along z the atoms sit in the steady state of the local fields, so each
//! derivative evaluation is one steady-state solve. Detunings are held fixed.
//!
//! Ladder: dG₁/dz = iη₁₂ρ₂₁, dG₂/dz = iη₂₃ρ₃₂, dG/dz = iη₃₄ρ₄₃.
//! Y-type: dg/dz = i(η₁₂ρ₂₁ + η₂₃ρ₃₂), dG/dz = iη₂₄ρ₄₃ (or ρ₄₂, see [`ControlSource`]).

use serde::{Deserialize, Serialize};

use crate::atom::{AtomicSystem, DensityMatrix, DriveSet, Scheme, C64};
use crate::error::{Error, Result};
use crate::steady::steady_state;

pub const MIN_STEPS: usize = 100;
pub const DEFAULT_STEPS: usize = 2000;

/// Whether the coupling and control fields evolve along z.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpMode {
    /// Coupling and control keep their entry values; only the probe propagates.
    #[default]
    Fixed,
    /// Every field follows its propagation equation.
    Depleted,
}

/// Coherence used as the source of the Y-type control-field equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlSource {
    #[default]
    Rho43,
    Rho42,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldId {
    Coupling,
    Probe,
    Control,
}

impl FieldId {
    pub const fn name(self) -> &'static str {
        match self {
            FieldId::Coupling => "coupling",
            FieldId::Probe => "probe",
            FieldId::Control => "control",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    /// Medium length in cm.
    pub length: f64,
    /// Coupling constants η in γ/cm, ordered like `Scheme::channels()`.
    pub eta: [f64; 3],
    pub steps: usize,
    #[serde(default)]
    pub pumps: PumpMode,
    #[serde(default)]
    pub control_source: ControlSource,
}

impl MediumSpec {
    pub fn new(length: f64, eta: [f64; 3], steps: usize) -> Result<Self> {
        let medium = Self {
            length,
            eta,
            steps,
            pumps: PumpMode::Fixed,
            control_source: ControlSource::Rho43,
        };
        medium.validate()?;
        Ok(medium)
    }

    /// The same medium with all η = 0.
    pub fn vacuum(length: f64, steps: usize) -> Self {
        Self {
            length,
            eta: [0.0; 3],
            steps,
            pumps: PumpMode::Fixed,
            control_source: ControlSource::Rho43,
        }
    }

    pub fn with_pumps(mut self, pumps: PumpMode) -> Self {
        self.pumps = pumps;
        self
    }

    pub fn with_control_source(mut self, source: ControlSource) -> Self {
        self.control_source = source;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::parameter("length", "medium length must be > 0"));
        }
        if let Some(e) = self.eta.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
            return Err(Error::parameter(
                "eta",
                format!("coupling constants must be >= 0, got {e}"),
            ));
        }
        if self.steps < MIN_STEPS {
            return Err(Error::parameter(
                "steps",
                format!(
                    "need at least {MIN_STEPS} spatial steps, got {}",
                    self.steps
                ),
            ));
        }
        Ok(())
    }
}

/// Field amplitudes at one z position.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Fields {
    pub coupling: C64,
    pub probe: C64,
    pub control: C64,
}

impl Fields {
    pub fn from_drives(drives: &DriveSet) -> Self {
        Self {
            coupling: drives.coupling,
            probe: drives.probe,
            control: drives.control,
        }
    }

    pub fn get(&self, field: FieldId) -> C64 {
        match field {
            FieldId::Coupling => self.coupling,
            FieldId::Probe => self.probe,
            FieldId::Control => self.control,
        }
    }

    fn apply(&self, drives: &DriveSet) -> DriveSet {
        DriveSet {
            coupling: self.coupling,
            probe: self.probe,
            control: self.control,
            ..*drives
        }
    }

    fn axpy(&self, h: f64, d: &Fields) -> Fields {
        Fields {
            coupling: self.coupling + d.coupling * h,
            probe: self.probe + d.probe * h,
            control: self.control + d.control * h,
        }
    }
}

/// Field amplitudes on the z grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldProfile {
    pub z: Vec<f64>,
    pub coupling: Vec<C64>,
    pub probe: Vec<C64>,
    pub control: Vec<C64>,
}

impl FieldProfile {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn at(&self, k: usize) -> Fields {
        Fields {
            coupling: self.coupling[k],
            probe: self.probe[k],
            control: self.control[k],
        }
    }

    pub fn entry(&self) -> Fields {
        self.at(0)
    }

    pub fn exit(&self) -> Fields {
        self.at(self.len() - 1)
    }

    pub fn series(&self, field: FieldId) -> &[C64] {
        match field {
            FieldId::Coupling => &self.coupling,
            FieldId::Probe => &self.probe,
            FieldId::Control => &self.control,
        }
    }
}

/// Local steady state and field derivatives at the given amplitudes.
fn local_derivative(
    system: &AtomicSystem,
    drives: &DriveSet,
    medium: &MediumSpec,
    fields: &Fields,
) -> Result<(Fields, DensityMatrix)> {
    let rho = steady_state(system, &fields.apply(drives))?;
    let i = C64::new(0.0, 1.0);
    let [e1, e2, e3] = medium.eta;
    let mut d = match system.scheme() {
        Scheme::Ladder4 => Fields {
            coupling: i * e1 * rho.get(2, 1),
            probe: i * e2 * rho.get(3, 2),
            control: i * e3 * rho.get(4, 3),
        },
        Scheme::Ypsilon4 => {
            let source = match medium.control_source {
                ControlSource::Rho43 => rho.get(4, 3),
                ControlSource::Rho42 => rho.get(4, 2),
            };
            Fields {
                coupling: C64::new(0.0, 0.0),
                probe: i * (e1 * rho.get(2, 1) + e2 * rho.get(3, 2)),
                control: i * e3 * source,
            }
        }
    };
    if medium.pumps == PumpMode::Fixed {
        d.coupling = C64::new(0.0, 0.0);
        d.control = C64::new(0.0, 0.0);
    }
    Ok((d, rho))
}

fn rk4(
    system: &AtomicSystem,
    drives: &DriveSet,
    medium: &MediumSpec,
    mut visit: impl FnMut(usize, f64, &Fields),
) -> Result<Fields> {
    medium.validate()?;
    let h = medium.length / medium.steps as f64;
    let mut y = Fields::from_drives(drives);
    visit(0, 0.0, &y);
    for k in 0..medium.steps {
        let z = k as f64 * h;
        let at = |dz: f64, f: &Fields| {
            local_derivative(system, drives, medium, f)
                .map(|(d, _)| d)
                .map_err(|e| Error::Propagation {
                    z: z + dz,
                    source: Box::new(e),
                })
        };
        let k1 = at(0.0, &y)?;
        let k2 = at(h / 2.0, &y.axpy(h / 2.0, &k1))?;
        let k3 = at(h / 2.0, &y.axpy(h / 2.0, &k2))?;
        let k4 = at(h, &y.axpy(h, &k3))?;
        y = Fields {
            coupling: y.coupling
                + (k1.coupling + 2.0 * k2.coupling + 2.0 * k3.coupling + k4.coupling) * (h / 6.0),
            probe: y.probe + (k1.probe + 2.0 * k2.probe + 2.0 * k3.probe + k4.probe) * (h / 6.0),
            control: y.control
                + (k1.control + 2.0 * k2.control + 2.0 * k3.control + k4.control) * (h / 6.0),
        };
        let z_next = if k + 1 == medium.steps {
            medium.length
        } else {
            (k + 1) as f64 * h
        };
        visit(k + 1, z_next, &y);
    }
    Ok(y)
}

/// Integrates the propagation equations with classical RK4 in z and records
/// the full profile.
pub fn propagate(
    system: &AtomicSystem,
    drives: &DriveSet,
    medium: &MediumSpec,
) -> Result<FieldProfile> {
    let n = medium.steps + 1;
    let mut profile = FieldProfile {
        z: Vec::with_capacity(n),
        coupling: Vec::with_capacity(n),
        probe: Vec::with_capacity(n),
        control: Vec::with_capacity(n),
    };
    rk4(system, drives, medium, |_, z, f| {
        profile.z.push(z);
        profile.coupling.push(f.coupling);
        profile.probe.push(f.probe);
        profile.control.push(f.control);
    })?;
    Ok(profile)
}

/// Exit fields only; same arithmetic as [`propagate`].
pub fn propagate_exit(
    system: &AtomicSystem,
    drives: &DriveSet,
    medium: &MediumSpec,
) -> Result<Fields> {
    rk4(system, drives, medium, |_, _, _| {})
}

/// Local steady state at a point of a propagated profile.
pub fn local_state(
    system: &AtomicSystem,
    drives: &DriveSet,
    fields: &Fields,
) -> Result<DensityMatrix> {
    steady_state(system, &fields.apply(drives))
}

/// Largest relative difference between two sets of exit amplitudes.
pub fn relative_change(a: &Fields, b: &Fields) -> f64 {
    [FieldId::Coupling, FieldId::Probe, FieldId::Control]
        .into_iter()
        .map(|f| {
            let (x, y) = (a.get(f), b.get(f));
            let scale = x.norm().max(y.norm());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Propagates with `medium.steps` and keeps doubling the step count until the
/// exit amplitudes change by less than `tolerance` (relative).
pub fn propagate_converged(
    system: &AtomicSystem,
    drives: &DriveSet,
    medium: &MediumSpec,
    tolerance: f64,
    max_doublings: u32,
) -> Result<(Fields, usize)> {
    let mut steps = medium.steps;
    let mut coarse = propagate_exit(system, drives, medium)?;
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        steps *= 2;
        let fine = propagate_exit(system, drives, &medium.with_steps(steps))?;
        change = relative_change(&coarse, &fine);
        if change < tolerance {
            return Ok((fine, steps));
        }
        coarse = fine;
    }
    Err(Error::Accuracy {
        doublings: max_doublings,
        change,
    })
}

/// |X(L)|² / |X(0)|².
pub fn transmission(profile: &FieldProfile, field: FieldId) -> Result<f64> {
    transmission_between(&profile.entry(), &profile.exit(), field)
}

pub fn transmission_between(entry: &Fields, exit: &Fields, field: FieldId) -> Result<f64> {
    let a0 = entry.get(field).norm_sqr();
    if a0 == 0.0 {
        return Err(Error::UndefinedTransmission(field.name()));
    }
    Ok(exit.get(field).norm_sqr() / a0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sodium() -> AtomicSystem {
        AtomicSystem::ladder(1.0, 1.0, 0.005 / 6.0).unwrap()
    }

    fn fig2_medium() -> MediumSpec {
        MediumSpec::new(1.0, [12.0, 16.0, 0.2], 200).unwrap()
    }

    #[test]
    fn vacuum_leaves_fields_unchanged() {
        let drives = DriveSet::ladder(10.0, 1.0, 10.0).with_detunings(0.0, 3.0, 0.0);
        let medium = MediumSpec::vacuum(1.0, 100).with_pumps(PumpMode::Depleted);
        let profile = propagate(&sodium(), &drives, &medium).unwrap();
        assert_eq!(profile.len(), 101);
        assert_eq!(profile.z[100], 1.0);
        for f in [FieldId::Coupling, FieldId::Probe, FieldId::Control] {
            assert!(profile
                .series(f)
                .iter()
                .all(|&a| a == profile.entry().get(f)));
            assert_eq!(transmission(&profile, f).unwrap(), 1.0);
        }
    }

    #[test]
    fn fixed_pumps_keep_entry_values() {
        let drives = DriveSet::ladder(10.0, 1.0, 10.0);
        let profile = propagate(&sodium(), &drives, &fig2_medium()).unwrap();
        assert!(profile.coupling.iter().all(|&a| a == drives.coupling));
        assert!(profile.control.iter().all(|&a| a == drives.control));
        assert!(transmission(&profile, FieldId::Probe).unwrap() < 1.0);
    }

    #[test]
    fn depleted_pumps_are_absorbed() {
        let drives = DriveSet::ladder(10.0, 1.0, 0.0);
        let medium = fig2_medium().with_pumps(PumpMode::Depleted);
        let profile = propagate(&sodium(), &drives, &medium).unwrap();
        assert!(profile.exit().coupling.norm() < 10.0);
    }

    #[test]
    fn zero_entry_amplitude_has_no_transmission() {
        let drives = DriveSet::ladder(10.0, 1.0, 0.0);
        let profile = propagate(&sodium(), &drives, &fig2_medium()).unwrap();
        assert!(matches!(
            transmission(&profile, FieldId::Control),
            Err(Error::UndefinedTransmission("control"))
        ));
    }

    #[test]
    fn invalid_medium_is_rejected() {
        assert!(MediumSpec::new(0.0, [1.0; 3], 200).is_err());
        assert!(MediumSpec::new(1.0, [1.0, -1.0, 0.0], 200).is_err());
        assert!(MediumSpec::new(1.0, [1.0; 3], 99).is_err());
    }

    #[test]
    fn failing_steady_state_reports_position() {
        let sys = AtomicSystem::ladder(0.0, 0.0, 0.0).unwrap();
        let err = propagate(&sys, &DriveSet::ladder(1.0, 1.0, 0.0), &fig2_medium()).unwrap_err();
        match err {
            Error::Propagation { z, source } => {
                assert_eq!(z, 0.0);
                assert!(matches!(*source, Error::DegenerateSteadyState));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strong_control_switches_off_the_probe() {
        let medium = MediumSpec::new(1.0, [12.0, 16.0, 0.2], 400).unwrap();
        let t = |g: f64| {
            let p = propagate_exit(&sodium(), &DriveSet::ladder(10.0, 0.01, g), &medium).unwrap();
            (p.probe / 0.01).norm_sqr()
        };
        assert!(t(10.0) < 0.01);
        assert!(t(0.0) > 100.0 * t(10.0));
    }

    #[test]
    fn ytype_control_source_matters_only_when_depleted() {
        let sys = AtomicSystem::ytype(5.0, 11.0, 0.97).unwrap();
        let drives = DriveSet::ytype(2.0, 3.0);
        let base = MediumSpec::new(1.0, [88.0, 1.5, 8.8], 200).unwrap();
        let a = propagate_exit(&sys, &drives, &base).unwrap();
        let b = propagate_exit(
            &sys,
            &drives,
            &base.with_control_source(ControlSource::Rho42),
        )
        .unwrap();
        assert_eq!(a, b);
        let dep = base.with_pumps(PumpMode::Depleted);
        let a = propagate_exit(&sys, &drives, &dep).unwrap();
        let b = propagate_exit(
            &sys,
            &drives,
            &dep.with_control_source(ControlSource::Rho42),
        )
        .unwrap();
        assert_ne!(a.control, b.control);
    }
}

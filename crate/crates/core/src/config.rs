//! JSON run configuration.
//!
//! Every quantity is in units of γ (rates, amplitudes, detunings), γ/cm (η)
//! or cm (length); a document must say so with `"units": "gamma"`. The pulse
//! block is the exception and carries its widths in rad/s.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::atom::{AtomicSystem, DriveSet, Scheme, C64};
use crate::cavity::{cooperation_to_mirror, CavitySpec};
use crate::error::{Error, Result};
use crate::experiments::{linspace, logspace};
use crate::propagation::{ControlSource, MediumSpec, PumpMode, DEFAULT_STEPS};
use crate::pulse::PulseSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Spectrum,
    Switch,
    Cavity,
    Pulse,
    SaRsa,
    SteadyState,
}

impl SweepKind {
    pub const ALL: [SweepKind; 6] = [
        SweepKind::Spectrum,
        SweepKind::Switch,
        SweepKind::Cavity,
        SweepKind::Pulse,
        SweepKind::SaRsa,
        SweepKind::SteadyState,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            SweepKind::Spectrum => "spectrum",
            SweepKind::Switch => "switch",
            SweepKind::Cavity => "cavity",
            SweepKind::Pulse => "pulse",
            SweepKind::SaRsa => "sa-rsa",
            SweepKind::SteadyState => "steady-state",
        }
    }

    pub fn needs_grid(self) -> bool {
        !matches!(self, SweepKind::Pulse | SweepKind::SteadyState)
    }
}

/// A complex amplitude written either as a number or as `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Amplitude(pub C64);

impl From<f64> for Amplitude {
    fn from(v: f64) -> Self {
        Amplitude(v.into())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AmplitudeRepr {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Serialize for Amplitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = if self.0.im == 0.0 {
            AmplitudeRepr::Real(self.0.re)
        } else {
            AmplitudeRepr::Complex {
                re: self.0.re,
                im: self.0.im,
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Amplitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match AmplitudeRepr::deserialize(d)? {
            AmplitudeRepr::Real(re) => Amplitude(re.into()),
            AmplitudeRepr::Complex { re, im } => Amplitude(C64::new(re, im)),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivesConfig {
    /// G₁ (ladder only).
    #[serde(default)]
    pub coupling: Amplitude,
    /// G₂ (ladder) or g (Y-type).
    #[serde(default)]
    pub probe: Amplitude,
    /// G.
    #[serde(default)]
    pub control: Amplitude,
    #[serde(default)]
    pub delta1: f64,
    #[serde(default)]
    pub delta2: f64,
    #[serde(default)]
    pub delta: f64,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub length_cm: f64,
    /// η per channel, keyed like the decay rates ("12", "23", "34" or "24").
    pub eta: BTreeMap<String, f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub pumps: PumpMode,
    #[serde(default)]
    pub ytype_control_source: ControlSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linspace(self.start, self.stop, self.points),
            Spacing::Log => logspace(self.start, self.stop, self.points),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::Validation(
                "sweep.grid: need finite start < stop".into(),
            ));
        }
        if self.points < 2 {
            return Err(Error::Validation("sweep.grid.points must be >= 2".into()));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::Validation(
                "sweep.grid.start must be > 0 for log spacing".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    /// Cooperation parameter C; the mirror transmittance follows from η₂₃L.
    pub cooperation: f64,
    #[serde(default)]
    pub delta0: f64,
}

fn default_pulse_points() -> usize {
    crate::pulse::MIN_POINTS
}

fn default_span() -> f64 {
    32.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    /// σ in rad/s.
    pub sigma_rad_per_s: f64,
    /// The unit γ in rad/s.
    pub gamma_rad_per_s: f64,
    #[serde(default = "default_pulse_points")]
    pub points: usize,
    #[serde(default = "default_span")]
    pub span_sigmas: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub units: Units,
    pub scheme: Scheme,
    /// γ_ij keyed by "ij": "12", "23", "34" (ladder) or "12", "23", "24" (Y-type).
    pub decay_rates: BTreeMap<String, f64>,
    #[serde(default)]
    pub gamma_coll: f64,
    pub drives: DrivesConfig,
    pub medium: MediumConfig,
    pub sweep: SweepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

pub const REQUIRED_KEYS: [&str; 6] = [
    "units",
    "scheme",
    "decay_rates",
    "drives",
    "medium",
    "sweep",
];

fn channel_key((i, j): (usize, usize)) -> String {
    format!("{i}{j}")
}

/// Values of a channel map in `scheme.channels()` order.
fn channel_values(scheme: Scheme, map: &BTreeMap<String, f64>, field: &str) -> Result<[f64; 3]> {
    let keys = scheme.channels().map(channel_key);
    if let Some(extra) = map.keys().find(|k| !keys.contains(k)) {
        return Err(Error::Validation(format!(
            "{field}: channel \"{extra}\" does not exist in the {} scheme (expected {})",
            scheme.name(),
            keys.join(", ")
        )));
    }
    let mut out = [0.0; 3];
    for (slot, key) in out.iter_mut().zip(&keys) {
        *slot = *map
            .get(key)
            .ok_or_else(|| Error::Validation(format!("{field}: missing channel \"{key}\"")))?;
    }
    Ok(out)
}

fn validation(field: &str, e: Error) -> Error {
    match e {
        Error::Parameter { name, reason } => {
            Error::Validation(format!("{field}: {name}: {reason}"))
        }
        Error::Validation(m) => Error::Validation(m),
        other => Error::Validation(format!("{field}: {other}")),
    }
}

impl RunConfig {
    pub fn system(&self) -> Result<AtomicSystem> {
        let rates = channel_values(self.scheme, &self.decay_rates, "decay_rates")?;
        AtomicSystem::new(self.scheme, rates, self.gamma_coll)
            .map_err(|e| validation("decay_rates", e))
    }

    pub fn drive_set(&self) -> DriveSet {
        let d = &self.drives;
        DriveSet {
            coupling: d.coupling.0,
            probe: d.probe.0,
            control: d.control.0,
            delta1: d.delta1,
            delta2: d.delta2,
            delta: d.delta,
        }
    }

    pub fn medium_spec(&self) -> Result<MediumSpec> {
        let m = &self.medium;
        let eta = channel_values(self.scheme, &m.eta, "medium.eta")?;
        Ok(MediumSpec::new(m.length_cm, eta, m.steps)
            .map_err(|e| validation("medium", e))?
            .with_pumps(m.pumps)
            .with_control_source(m.ytype_control_source))
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = self.sweep.grid.ok_or_else(|| {
            Error::Validation(format!(
                "sweep.grid is required for kind \"{}\"",
                self.sweep.kind.name()
            ))
        })?;
        g.validate()?;
        Ok(g.values())
    }

    pub fn cavity_spec(&self) -> Result<CavitySpec> {
        let c = self.cavity.ok_or_else(|| {
            Error::Validation("the cavity block is required for kind \"cavity\"".into())
        })?;
        let gamma23 = self.system()?.decay(2, 3);
        cooperation_to_mirror(c.cooperation, &self.medium_spec()?, gamma23, c.delta0)
            .map_err(|e| validation("cavity", e))
    }

    pub fn pulse_spec(&self) -> Result<PulseSpec> {
        let p = self.pulse.ok_or_else(|| {
            Error::Validation("the pulse block is required for kind \"pulse\"".into())
        })?;
        let probe = self.drives.probe.0;
        if probe.im != 0.0 || probe.re <= 0.0 {
            return Err(Error::Validation(
                "drives.probe: the pulse peak amplitude must be real and > 0".into(),
            ));
        }
        let spec = PulseSpec {
            sigma: p.sigma_rad_per_s,
            peak_amplitude: probe.re,
            gamma_rad_per_s: p.gamma_rad_per_s,
            points: p.points,
            span_sigmas: p.span_sigmas,
        };
        spec.validate().map_err(|e| validation("pulse", e))?;
        Ok(spec)
    }

    /// Checks that every block the sweep kind needs is present and valid.
    pub fn validate(&self) -> Result<()> {
        self.system()?;
        self.medium_spec()?;
        let d = &self.drives;
        let finite = [d.delta1, d.delta2, d.delta]
            .into_iter()
            .chain(
                [d.coupling.0, d.probe.0, d.control.0]
                    .iter()
                    .flat_map(|c| [c.re, c.im]),
            )
            .all(f64::is_finite);
        if !finite {
            return Err(Error::Validation("drives: values must be finite".into()));
        }
        if self.scheme == Scheme::Ypsilon4 && d.coupling.0 != C64::new(0.0, 0.0) {
            return Err(Error::Validation(
                "drives.coupling: the ytype scheme has no separate coupling field; use drives.probe".into(),
            ));
        }
        if self.sweep.kind.needs_grid() {
            self.grid()?;
        }
        match self.sweep.kind {
            SweepKind::Cavity => {
                self.cavity_spec()?;
            }
            SweepKind::Pulse => {
                self.pulse_spec()?;
            }
            SweepKind::SaRsa if self.scheme != Scheme::Ypsilon4 => {
                return Err(Error::Validation(
                    "sweep.kind: sa-rsa needs the ytype scheme".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Pretty JSON with every default filled in.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn syntax(e: &serde_json::Error) -> Error {
    Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a JSON run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    if text.trim().is_empty() {
        return Err(Error::Validation(format!(
            "empty document; required keys: {}",
            REQUIRED_KEYS.join(", ")
        )));
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| syntax(&e))?;
    let Some(object) = value.as_object() else {
        return Err(Error::Validation(
            "the document must be a JSON object".into(),
        ));
    };
    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .copied()
        .filter(|k| !object.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "missing required keys: {}",
            missing.join(", ")
        )));
    }
    let config: RunConfig = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => {
            Error::Validation(format!("{} (line {}, column {})", e, e.line(), e.column()))
        }
        _ => syntax(&e),
    })?;
    config.validate()?;
    Ok(config)
}

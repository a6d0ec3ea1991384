//! Named parameter sets, one per reproduced experiment.
//!
//! Ladder presets use the sodium rates with γ = γ₁₂ = γ₂₃ = 2π×6 MHz as the
//! unit, so γ₃₄ = 2π×0.005 MHz becomes 0.005/6. Y-type presets use γ = 1 MHz
//! and the rates γ_ij/2π given in MHz, hence the factors of 2π.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::atom::Scheme;
use crate::config::{
    Amplitude, CavityConfig, DrivesConfig, GridSpec, MediumConfig, PulseConfig, RunConfig, Spacing,
    SweepKind, SweepSpec, Units,
};
use crate::propagation::{ControlSource, FieldId, PumpMode, DEFAULT_STEPS};

pub const PRESET_NAMES: [&str; 10] = [
    "fig2a",
    "fig2b",
    "fig3",
    "fig4a",
    "fig4b",
    "fig6a",
    "fig6b",
    "fig8a",
    "fig8a-text",
    "fig8b",
];

/// Control amplitude for the SA/RSA presets, a chosen value.
pub const SA_RSA_CONTROL: f64 = 30.0;

/// γ₃₄ of sodium in units of γ = 2π×6 MHz.
pub const SODIUM_GAMMA34: f64 = 0.005 / 6.0;

fn channels(scheme: Scheme, values: [f64; 3]) -> BTreeMap<String, f64> {
    scheme
        .channels()
        .iter()
        .zip(values)
        .map(|(&(i, j), v)| (format!("{i}{j}"), v))
        .collect()
}

fn linear(start: f64, stop: f64, points: usize) -> Option<GridSpec> {
    Some(GridSpec {
        start,
        stop,
        points,
        spacing: Spacing::Linear,
    })
}

fn log(start: f64, stop: f64, points: usize) -> Option<GridSpec> {
    Some(GridSpec {
        spacing: Spacing::Log,
        ..linear(start, stop, points).unwrap()
    })
}

fn ladder(g1: f64, g2: f64, g: f64, kind: SweepKind, grid: Option<GridSpec>) -> RunConfig {
    let scheme = Scheme::Ladder4;
    RunConfig {
        units: Units::Gamma,
        scheme,
        decay_rates: channels(scheme, [1.0, 1.0, SODIUM_GAMMA34]),
        gamma_coll: 0.0,
        drives: DrivesConfig {
            coupling: g1.into(),
            probe: g2.into(),
            control: g.into(),
            ..DrivesConfig::default()
        },
        medium: MediumConfig {
            length_cm: 1.0,
            eta: channels(scheme, [12.0, 16.0, 0.2]),
            steps: DEFAULT_STEPS,
            pumps: PumpMode::Fixed,
            ytype_control_source: ControlSource::Rho43,
        },
        sweep: SweepSpec { kind, grid },
        cavity: None,
        pulse: None,
        output: None,
    }
}

fn ytype(rates_over_2pi: [f64; 3], eta: [f64; 3]) -> RunConfig {
    let scheme = Scheme::Ypsilon4;
    RunConfig {
        units: Units::Gamma,
        scheme,
        decay_rates: channels(scheme, rates_over_2pi.map(|r| 2.0 * PI * r)),
        gamma_coll: 0.0,
        drives: DrivesConfig {
            control: SA_RSA_CONTROL.into(),
            ..DrivesConfig::default()
        },
        medium: MediumConfig {
            length_cm: 1.0,
            eta: channels(scheme, eta),
            steps: DEFAULT_STEPS,
            pumps: PumpMode::Depleted,
            ytype_control_source: ControlSource::Rho43,
        },
        sweep: SweepSpec {
            kind: SweepKind::SaRsa,
            grid: log(1e-2, 1e5, 71),
        },
        cavity: None,
        pulse: None,
        output: None,
    }
}

fn pulse(g: f64) -> RunConfig {
    RunConfig {
        pulse: Some(PulseConfig {
            sigma_rad_per_s: 2.0 * PI * 5e3,
            gamma_rad_per_s: 2.0 * PI * 6e6,
            points: 4096,
            span_sigmas: 32.0,
        }),
        ..ladder(10.0, 0.1, g, SweepKind::Pulse, None)
    }
}

fn cavity(g1: f64, g: f64) -> RunConfig {
    RunConfig {
        cavity: Some(CavityConfig {
            cooperation: 400.0,
            delta0: 0.0,
        }),
        ..ladder(g1, 0.0, g, SweepKind::Cavity, log(1e-3, 1e2, 400))
    }
}

/// The preset called `name`, if any.
pub fn preset(name: &str) -> Option<RunConfig> {
    let spectrum = linear(-30.0, 30.0, 601);
    Some(match name {
        "fig2a" => ladder(10.0, 1.0, 0.0, SweepKind::Spectrum, spectrum),
        "fig2b" => ladder(10.0, 1.0, 10.0, SweepKind::Spectrum, spectrum),
        "fig3" => ladder(10.0, 0.01, 0.0, SweepKind::Switch, linear(0.0, 200.0, 401)),
        "fig4a" => pulse(0.0),
        "fig4b" => pulse(10.0),
        "fig6a" => cavity(5.0, 0.0),
        "fig6b" => cavity(5.0, 5.0),
        "fig8a" => ytype([5.0, 11.0, 0.97], [88.0, 1.5, 8.8]),
        "fig8a-text" => ytype([5.0, 11.0, 0.67], [88.0, 1.5, 8.8]),
        "fig8b" => ytype([6.0, 0.97, 1.1], [87.0, 14.0, 10.0]),
        _ => return None,
    })
}

/// Sets a drive amplitude from the command line or a test.
pub fn with_amplitude(mut config: RunConfig, field: FieldId, value: f64) -> RunConfig {
    let a = Amplitude::from(value);
    match field {
        FieldId::Coupling => config.drives.coupling = a,
        FieldId::Probe => config.drives.probe = a,
        FieldId::Control => config.drives.control = a,
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(parse_config(&c.to_json()).unwrap(), c, "{name}");
        }
        assert!(preset("fig9").is_none());
    }

    #[test]
    fn fig2a_parameters() {
        let c = preset("fig2a").unwrap();
        assert_eq!(c.scheme, Scheme::Ladder4);
        assert_eq!(c.drives.coupling.0.re, 10.0);
        assert_eq!(c.drives.control.0.re, 0.0);
        assert_eq!(
            c.medium.eta.values().copied().collect::<Vec<_>>(),
            [12.0, 16.0, 0.2]
        );
        assert_eq!(c.medium.length_cm, 1.0);
        let g = c.sweep.grid.unwrap();
        assert_eq!((g.start, g.stop, g.points), (-30.0, 30.0, 601));
    }

    #[test]
    fn fig8a_parameters() {
        let c = preset("fig8a").unwrap();
        assert_eq!(c.scheme, Scheme::Ypsilon4);
        let r: Vec<f64> = ["12", "23", "24"]
            .iter()
            .map(|k| c.decay_rates[*k] / (2.0 * PI))
            .collect();
        for (got, want) in r.iter().zip([5.0, 11.0, 0.97]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(c.medium.eta["12"], 88.0);
        assert_eq!(c.medium.eta["23"], 1.5);
        assert_eq!(c.medium.eta["24"], 8.8);
    }
}

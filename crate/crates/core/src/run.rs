//! Executes a run configuration and renders its artifacts.
//!
//! Each run produces one data file (CSV, or JSON for `steady-state`) and a
//! JSON sidecar `run.json` with the echoed config, tool version, grid
//! metadata, wall time and, on failure, the error. Data files depend only on
//! the config: rows are assembled in grid order whatever the thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use crate::cavity::{bistability_thresholds, cavity_sweep, refine_thresholds, CavitySetup};
use crate::config::{RunConfig, SweepKind};
use crate::error::Result;
use crate::experiments::{probe_spectrum, sa_rsa_curve, switching_curve, SweepConfig};
use crate::parallel::with_threads;
use crate::pulse::pulse_transmission;
use crate::steady::{residual, steady_state};

pub const SIDECAR_NAME: &str = "run.json";

/// Pulse traces are written for |τ| up to this many σ_t.
pub const TRACE_WINDOW_SIGMA_T: f64 = 5.0;

/// A rendered output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub artifact: Artifact,
    /// Grid description for the sidecar.
    pub grid: Value,
    /// Derived scalars (thresholds, peak ratio, ...) for the sidecar.
    pub results: Value,
    pub warnings: Vec<String>,
}

/// Formats a float with 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text with a header row and LF line endings.
pub fn render_csv(header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = header.join(",");
    out.push('\n');
    for r in 0..rows {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&num(c[r]));
        }
        out.push('\n');
    }
    out
}

fn csv_artifact(kind: SweepKind, header: &[&str], columns: &[&[f64]]) -> Artifact {
    Artifact {
        file_name: format!("{}.csv", kind.name()),
        contents: render_csv(header, columns),
    }
}

fn grid_meta(config: &RunConfig) -> Value {
    match config.sweep.grid {
        Some(g) => serde_json::to_value(g).expect("grid serializes"),
        None => Value::Null,
    }
}

/// Runs the configured sweep on the current thread pool.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let system = config.system()?;
    let drives = config.drive_set();
    let medium = config.medium_spec()?;
    let sweep = SweepConfig {
        system,
        drives,
        medium,
    };
    let kind = config.sweep.kind;
    let mut warnings = Vec::new();
    let (artifact, results, grid) = match kind {
        SweepKind::Spectrum => {
            let r = probe_spectrum(&sweep, &config.grid()?)?;
            let t = r.column("T2").expect("spectrum has T2");
            (
                csv_artifact(kind, &["delta2_over_gamma", "T2"], &[&r.axis, t]),
                Value::Null,
                grid_meta(config),
            )
        }
        SweepKind::Switch => {
            let r = switching_curve(&sweep, &config.grid()?)?;
            let t = r.column("T2").expect("switching curve has T2");
            (
                csv_artifact(
                    kind,
                    &["control_intensity_over_gamma2", "T2"],
                    &[&r.axis, t],
                ),
                Value::Null,
                grid_meta(config),
            )
        }
        SweepKind::SaRsa => {
            let grid = config.grid()?;
            let off = sa_rsa_curve(&sweep, &grid, false)?;
            let on = sa_rsa_curve(&sweep, &grid, true)?;
            let (t_off, t_on) = (off.column("T").unwrap(), on.column("T").unwrap());
            (
                csv_artifact(
                    kind,
                    &["probe_intensity_over_gamma2", "T_off", "T_on"],
                    &[&off.axis, t_off, t_on],
                ),
                Value::Null,
                grid_meta(config),
            )
        }
        SweepKind::Cavity => {
            let setup = CavitySetup {
                system,
                drives,
                medium,
                cavity: config.cavity_spec()?,
            };
            let curve = cavity_sweep(&setup, &config.grid()?)?;
            let grid_thresholds = bistability_thresholds(&curve)?;
            let refined = refine_thresholds(&setup, &curve)?;
            (
                csv_artifact(
                    kind,
                    &["x_over_gamma", "input_intensity", "output_intensity"],
                    &[&curve.x, &curve.input, &curve.output],
                ),
                json!({
                    "mirror": setup.cavity,
                    "thresholds_on_grid": grid_thresholds,
                    "thresholds": refined,
                }),
                grid_meta(config),
            )
        }
        SweepKind::Pulse => {
            let spec = config.pulse_spec()?;
            let r = pulse_transmission(&spec, &system, &drives, &medium)?;
            let window = TRACE_WINDOW_SIGMA_T * spec.sigma_t();
            let keep: Vec<usize> = (0..spec.points)
                .filter(|&k| r.envelope.time[k].abs() <= window)
                .collect();
            let tau = r.tau_us();
            let (input, output) = r.normalized_intensities();
            let pick = |v: &[f64]| keep.iter().map(|&k| v[k]).collect::<Vec<_>>();
            if let Some(w) = &r.regime_warning {
                warnings.push(w.clone());
            }
            (
                csv_artifact(
                    kind,
                    &["tau_us", "input_norm", "output_norm"],
                    &[&pick(&tau), &pick(&input), &pick(&output)],
                ),
                json!({
                    "peak_ratio": r.peak_ratio,
                    "transfer_at_carrier": {"re": r.transfer_at_carrier.re, "im": r.transfer_at_carrier.im},
                    "transfer_at_carrier_intensity": r.transfer_at_carrier.norm_sqr(),
                    "regime_warning": r.regime_warning,
                }),
                json!({
                    "points": spec.points,
                    "d_omega_rad_per_s": spec.d_omega(),
                    "dt_s": spec.dt(),
                    "span_sigmas": spec.span_sigmas,
                    "trace_window_us": window * 1e6,
                }),
            )
        }
        SweepKind::SteadyState => {
            let rho = steady_state(&system, &drives)?;
            let m = rho.matrix();
            let part = |f: fn(&crate::C64) -> f64| -> Vec<Vec<f64>> {
                (0..4)
                    .map(|i| (0..4).map(|j| f(&m[(i, j)])).collect())
                    .collect()
            };
            let l = crate::atom::liouvillian(&system, &drives);
            let mut text = serde_json::to_string_pretty(&json!({
                "re": part(|c| c.re),
                "im": part(|c| c.im),
            }))
            .expect("matrix serializes");
            text.push('\n');
            (
                Artifact {
                    file_name: "steady-state.json".into(),
                    contents: text,
                },
                json!({ "residual": residual(&l, &rho) }),
                Value::Null,
            )
        }
    };
    Ok(RunReport {
        artifact,
        grid,
        results,
        warnings,
    })
}

/// [`run`] on a dedicated pool of `threads` workers; `None` uses the global pool.
pub fn run_with_threads(config: &RunConfig, threads: Option<usize>) -> Result<RunReport> {
    match threads {
        Some(n) => with_threads(n, || run(config)),
        None => run(config),
    }
}

/// The sidecar document for a finished or failed run.
pub fn sidecar(
    config: &RunConfig,
    outcome: &Result<RunReport>,
    threads: Option<usize>,
    wall_seconds: f64,
) -> String {
    let mut doc = json!({
        "tool": "fourlevel",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "threads": threads,
        "wall_time_s": wall_seconds,
    });
    let obj = doc.as_object_mut().expect("object");
    match outcome {
        Ok(r) => {
            obj.insert("output".into(), r.artifact.file_name.clone().into());
            obj.insert("grid".into(), r.grid.clone());
            obj.insert("results".into(), r.results.clone());
            obj.insert("warnings".into(), json!(r.warnings));
            obj.insert("error".into(), Value::Null);
        }
        Err(e) => {
            let mut chain = e.to_string();
            let mut source = std::error::Error::source(e);
            while let Some(s) = source {
                let _ = write!(chain, ": {s}");
                source = s.source();
            }
            obj.insert("error".into(), chain.into());
        }
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("sidecar serializes");
    text.push('\n');
    text
}

/// Runs `config` and writes the data file and the sidecar into `dir`.
/// The sidecar is written even when the run fails.
pub fn run_to_dir(config: &RunConfig, dir: &Path, threads: Option<usize>) -> Result<RunReport> {
    fs::create_dir_all(dir)?;
    let start = Instant::now();
    let outcome = run_with_threads(config, threads);
    let wall = start.elapsed().as_secs_f64();
    if let Ok(r) = &outcome {
        fs::write(dir.join(&r.artifact.file_name), &r.artifact.contents)?;
    }
    fs::write(
        dir.join(SIDECAR_NAME),
        sidecar(config, &outcome, threads, wall),
    )?;
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn csv_layout() {
        let csv = render_csv(&["a", "b"], &[&[1.0, 0.1], &[-2.5, 1e-300]]);
        assert_eq!(
            csv,
            "a,b\n1.0000000000000000e0,-2.5000000000000000e0\n\
             1.0000000000000001e-1,1.0000000000000000e-300\n"
        );
        for line in csv.lines().skip(1) {
            for field in line.split(',') {
                let v: f64 = field.parse().unwrap();
                assert_eq!(num(v), field);
            }
        }
    }

    #[test]
    fn steady_state_run() {
        let mut c = preset("fig2b").unwrap();
        c.sweep.kind = SweepKind::SteadyState;
        let r = run(&c).unwrap();
        assert_eq!(r.artifact.file_name, "steady-state.json");
        let v: Value = serde_json::from_str(&r.artifact.contents).unwrap();
        assert_eq!(v["re"].as_array().unwrap().len(), 4);
        assert_eq!(v["im"][0].as_array().unwrap().len(), 4);
        assert!(r.results["residual"].as_f64().unwrap() < 1e-10);
    }

    #[test]
    fn sidecar_records_errors() {
        let mut c = preset("fig2a").unwrap();
        c.sweep.grid = None;
        let outcome = run(&c);
        assert!(outcome.is_err());
        let v: Value = serde_json::from_str(&sidecar(&c, &outcome, Some(1), 0.0)).unwrap();
        assert!(v["error"].as_str().unwrap().contains("sweep.grid"));
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    }
}

//! Parameter sweeps: probe spectra, control-field switching curves and
//! saturable / reverse-saturable absorption curves.

use serde::{Deserialize, Serialize};

use crate::atom::{AtomicSystem, DriveSet, Scheme};
use crate::error::{Error, Result};
use crate::parallel::map_points;
use crate::propagation::{
    local_state, propagate_exit, transmission_between, FieldId, Fields, MediumSpec,
};

/// Everything a single propagation needs apart from the swept parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub system: AtomicSystem,
    pub drives: DriveSet,
    pub medium: MediumSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// One axis and any number of equally long output columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub columns: Vec<Column>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// Builds a result from unordered `(axis, row)` pairs, sorting by axis.
    fn from_rows(axis_name: &str, names: &[&str], mut rows: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::parameter("grid", "grid values must be distinct"));
        }
        let axis = rows.iter().map(|r| r.0).collect();
        let columns = names
            .iter()
            .enumerate()
            .map(|(k, name)| Column {
                name: (*name).to_string(),
                values: rows.iter().map(|r| r.1[k]).collect(),
            })
            .collect();
        Ok(Self {
            axis_name: axis_name.to_string(),
            axis,
            columns,
        })
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        stop
                    } else {
                        start + k as f64 * step
                    }
                })
                .collect()
        }
    }
}

/// `n` logarithmically spaced values from `start` to `stop` inclusive.
pub fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    let (a, b) = (start.ln(), stop.ln());
    linspace(a, b, n)
        .into_iter()
        .enumerate()
        .map(|(k, v)| match k {
            0 => start,
            _ if k + 1 == n => stop,
            _ => v.exp(),
        })
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::parameter("grid", "sweep grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::parameter("grid", "grid values must be finite"));
    }
    Ok(())
}

fn collect_rows(rows: Vec<Result<(f64, Vec<f64>)>>) -> Result<Vec<(f64, Vec<f64>)>> {
    rows.into_iter().collect()
}

pub const SPECTRUM_COLUMNS: [&str; 6] = ["T2", "abs_rho32", "rho11", "rho22", "rho33", "rho44"];

/// Probe transmission versus probe detuning Δ₂ at fixed entry amplitudes.
///
/// Columns: `T2`, `abs_rho32` and the four populations, all at the medium exit.
pub fn probe_spectrum(config: &SweepConfig, delta2_grid: &[f64]) -> Result<SweepResult> {
    check_grid(delta2_grid)?;
    let rows = map_points(delta2_grid, |d2| {
        let drives = DriveSet {
            delta2: d2,
            ..config.drives
        };
        let exit = propagate_exit(&config.system, &drives, &config.medium)?;
        let t = transmission_between(&Fields::from_drives(&drives), &exit, FieldId::Probe)?;
        let rho = local_state(&config.system, &drives, &exit)?;
        Ok((
            d2,
            vec![
                t,
                rho.get(3, 2).norm(),
                rho.population(1),
                rho.population(2),
                rho.population(3),
                rho.population(4),
            ],
        ))
    });
    SweepResult::from_rows("delta2_over_gamma", &SPECTRUM_COLUMNS, collect_rows(rows)?)
}

/// Probe transmission versus control intensity |G|² (real control amplitude).
pub fn switching_curve(config: &SweepConfig, intensity_grid: &[f64]) -> Result<SweepResult> {
    check_grid(intensity_grid)?;
    if let Some(v) = intensity_grid.iter().find(|v| **v < 0.0) {
        return Err(Error::parameter("grid", format!("negative intensity {v}")));
    }
    let rows = map_points(intensity_grid, |i| {
        let drives = DriveSet {
            control: i.sqrt().into(),
            ..config.drives
        };
        let exit = propagate_exit(&config.system, &drives, &config.medium)?;
        let t = transmission_between(&Fields::from_drives(&drives), &exit, FieldId::Probe)?;
        Ok((i, vec![t]))
    });
    SweepResult::from_rows(
        "control_intensity_over_gamma2",
        &["T2"],
        collect_rows(rows)?,
    )
}

/// Net probe transmission |g(L)|²/|g(0)|² versus entry intensity |g(0)|² for
/// the Y scheme, with the control at its configured amplitude or switched off.
pub fn sa_rsa_curve(
    config: &SweepConfig,
    intensity_grid: &[f64],
    control_on: bool,
) -> Result<SweepResult> {
    if config.system.scheme() != Scheme::Ypsilon4 {
        return Err(Error::parameter(
            "scheme",
            "SA/RSA curves need the Y-type scheme",
        ));
    }
    let d = &config.drives;
    if d.delta1 != 0.0 || d.delta2 != 0.0 || d.delta != 0.0 {
        return Err(Error::parameter(
            "detunings",
            "SA/RSA curves use resonant fields",
        ));
    }
    check_grid(intensity_grid)?;
    if let Some(v) = intensity_grid.iter().find(|v| **v <= 0.0) {
        return Err(Error::parameter(
            "grid",
            format!("probe intensity must be > 0, got {v}"),
        ));
    }
    let control = if control_on { d.control } else { 0.0.into() };
    let rows = map_points(intensity_grid, |i| {
        let drives = DriveSet {
            probe: i.sqrt().into(),
            control,
            ..*d
        };
        let exit = propagate_exit(&config.system, &drives, &config.medium)?;
        let t = transmission_between(&Fields::from_drives(&drives), &exit, FieldId::Probe)?;
        Ok((i, vec![t]))
    });
    SweepResult::from_rows("probe_intensity_over_gamma2", &["T"], collect_rows(rows)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub axis: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Interior local extrema by three-point comparison; the location and value
/// are refined by the parabola through the three samples.
pub fn spectrum_extrema(result: &SweepResult, column: &str) -> Result<Vec<Extremum>> {
    let y = result
        .column(column)
        .ok_or_else(|| Error::parameter("column", format!("no column named `{column}`")))?;
    let x = &result.axis;
    if y.len() < 3 {
        return Err(Error::Resolution(format!(
            "need at least 3 points for extrema, got {}",
            y.len()
        )));
    }
    let mut out = Vec::new();
    for k in 1..y.len() - 1 {
        let kind = if y[k] < y[k - 1] && y[k] < y[k + 1] {
            ExtremumKind::Min
        } else if y[k] > y[k - 1] && y[k] > y[k + 1] {
            ExtremumKind::Max
        } else {
            continue;
        };
        let (axis, value) = parabola_vertex([x[k - 1], x[k], x[k + 1]], [y[k - 1], y[k], y[k + 1]]);
        out.push(Extremum { axis, value, kind });
    }
    Ok(out)
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (a, b) = (x[1] - x[0], x[1] - x[2]);
    let (fa, fb) = (y[1] - y[0], y[1] - y[2]);
    let denom = a * fb - b * fa;
    if denom == 0.0 {
        return (x[1], y[1]);
    }
    let vertex = x[1] - 0.5 * (a * a * fb - b * b * fa) / denom;
    // Lagrange form evaluated at the vertex.
    let l = |i: usize, j: usize, k: usize| {
        (vertex - x[j]) * (vertex - x[k]) / ((x[i] - x[j]) * (x[i] - x[k]))
    };
    let value = y[0] * l(0, 1, 2) + y[1] * l(1, 0, 2) + y[2] * l(2, 0, 1);
    (vertex, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(axis: Vec<f64>, values: Vec<f64>) -> SweepResult {
        SweepResult {
            axis_name: "x".into(),
            axis,
            columns: vec![Column {
                name: "y".into(),
                values,
            }],
        }
    }

    #[test]
    fn monotone_column_has_no_extrema() {
        let x = linspace(0.0, 1.0, 11);
        let r = result(x.clone(), x.iter().map(|v| v * v).collect());
        assert!(spectrum_extrema(&r, "y").unwrap().is_empty());
    }

    #[test]
    fn parabola_vertex_is_recovered() {
        let x = linspace(-3.0, 7.0, 41);
        let y = x
            .iter()
            .map(|v| 0.7 * (v - 2.0) * (v - 2.0) + 1.5)
            .collect();
        let ext = spectrum_extrema(&result(x, y), "y").unwrap();
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0].kind, ExtremumKind::Min);
        assert!((ext[0].axis - 2.0).abs() < 0.025 / 10.0);
        assert!((ext[0].value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn off_grid_vertex_is_refined() {
        let x = linspace(0.0, 1.0, 11);
        let y = x.iter().map(|v| -(v - 0.437) * (v - 0.437)).collect();
        let ext = spectrum_extrema(&result(x, y), "y").unwrap();
        assert_eq!(ext[0].kind, ExtremumKind::Max);
        assert!((ext[0].axis - 0.437).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_and_unknown_column() {
        let r = result(vec![0.0, 1.0], vec![1.0, 0.0]);
        assert!(matches!(
            spectrum_extrema(&r, "y"),
            Err(Error::Resolution(_))
        ));
        assert!(spectrum_extrema(&r, "z").is_err());
    }

    #[test]
    fn grids_hit_their_endpoints() {
        let g = linspace(-30.0, 30.0, 601);
        assert_eq!(g.len(), 601);
        assert_eq!(g[0], -30.0);
        assert_eq!(g[600], 30.0);
        assert!((g[300]).abs() < 1e-12);
        let l = logspace(1e-3, 1e2, 400);
        assert_eq!(l[0], 1e-3);
        assert_eq!(l[399], 1e2);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let cfg = SweepConfig {
            system: AtomicSystem::ladder(1.0, 1.0, 0.001).unwrap(),
            drives: DriveSet::ladder(10.0, 1.0, 0.0),
            medium: MediumSpec::new(1.0, [12.0, 16.0, 0.2], 100).unwrap(),
        };
        assert!(probe_spectrum(&cfg, &[]).is_err());
        assert!(sa_rsa_curve(&cfg, &[1.0], true).is_err());
    }
}

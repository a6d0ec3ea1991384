//! Unidirectional ring cavity around the medium, in steady state.
//!
//! Only the probe circulates. With x the probe amplitude entering the medium,
//! one forward propagation gives G₂(L), and the boundary conditions fix
//!
//! ```text
//! G₂ᴵ = (x − R·e^{−iδ₀}·G₂(L)) / √T,    G₂ᵀ = √T·G₂(L).
//! ```
//!
//! Sweeping x therefore traces the whole (possibly multivalued) input-output
//! curve without solving the self-consistency condition.

use serde::{Deserialize, Serialize};

use crate::atom::{AtomicSystem, DriveSet, C64};
use crate::error::{Error, Result};
use crate::experiments::logspace;
use crate::parallel::map_points;
use crate::propagation::{propagate_exit, MediumSpec};

/// Tolerance on R + T = 1.
pub const MIRROR_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    pub reflectance: f64,
    pub transmittance: f64,
    /// Cavity detuning phase δ₀ in radians.
    pub delta0: f64,
    pub cooperation: f64,
}

impl CavitySpec {
    pub fn validate(&self) -> Result<()> {
        let (r, t) = (self.reflectance, self.transmittance);
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InconsistentCavity(format!(
                "reflectance must lie in [0, 1), got {r}"
            )));
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InconsistentCavity(format!(
                "transmittance must lie in (0, 1], got {t}"
            )));
        }
        if (r + t - 1.0).abs() > MIRROR_SUM_TOLERANCE {
            return Err(Error::InconsistentCavity(format!("R + T = {} != 1", r + t)));
        }
        if !self.delta0.is_finite() {
            return Err(Error::parameter("delta0", "cavity phase must be finite"));
        }
        Ok(())
    }
}

/// Mirror transmittance from the cooperation parameter C = αL/2T, using
/// α = 2η₂₃/γ₂₃, i.e. T = η₂₃L/(C·γ₂₃).
pub fn cooperation_to_mirror(
    cooperation: f64,
    medium: &MediumSpec,
    gamma23: f64,
    delta0: f64,
) -> Result<CavitySpec> {
    if !(cooperation > 0.0 && cooperation.is_finite()) {
        return Err(Error::parameter("cooperation", "C must be > 0"));
    }
    if gamma23.is_nan() || gamma23 <= 0.0 {
        return Err(Error::parameter("gamma_23", "must be > 0 to define C"));
    }
    let t = medium.eta[1] * medium.length / (cooperation * gamma23);
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InconsistentCavity(format!(
            "C = {cooperation} with eta23*L = {} implies T = {t}, outside (0, 1]",
            medium.eta[1] * medium.length
        )));
    }
    let spec = CavitySpec {
        reflectance: 1.0 - t,
        transmittance: t,
        delta0,
        cooperation,
    };
    spec.validate()?;
    Ok(spec)
}

/// Everything one cavity pass needs; `drives.probe` is ignored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavitySetup {
    pub system: AtomicSystem,
    pub drives: DriveSet,
    pub medium: MediumSpec,
    pub cavity: CavitySpec,
}

/// Input and output amplitudes belonging to one circulating amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityPoint {
    pub x: C64,
    pub input: C64,
    pub output: C64,
}

impl CavitySetup {
    /// One pass at circulating entry amplitude `x`. Coupling and control are
    /// reset to their entry values, they do not circulate.
    pub fn point(&self, x: C64) -> Result<CavityPoint> {
        let drives = DriveSet {
            probe: x,
            ..self.drives
        };
        let exit = propagate_exit(&self.system, &drives, &self.medium)?.probe;
        let c = &self.cavity;
        let st = c.transmittance.sqrt();
        let feedback = C64::from_polar(c.reflectance, -c.delta0) * exit;
        Ok(CavityPoint {
            x,
            input: (x - feedback) / st,
            output: exit * st,
        })
    }

    fn input_intensity(&self, x: f64) -> Result<f64> {
        Ok(self.point(x.into())?.input.norm_sqr())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BistabilityCurve {
    /// Circulating entry amplitude, units of γ.
    pub x: Vec<f64>,
    /// |G₂ᴵ|², units of γ².
    pub input: Vec<f64>,
    /// |G₂ᵀ|², units of γ².
    pub output: Vec<f64>,
}

impl BistabilityCurve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

pub const DEFAULT_X_POINTS: usize = 400;
pub const DEFAULT_X_RANGE: (f64, f64) = (1e-3, 1e2);

pub fn default_x_grid() -> Vec<f64> {
    logspace(DEFAULT_X_RANGE.0, DEFAULT_X_RANGE.1, DEFAULT_X_POINTS)
}

pub fn cavity_sweep(setup: &CavitySetup, x_grid: &[f64]) -> Result<BistabilityCurve> {
    setup.cavity.validate()?;
    if x_grid.is_empty() {
        return Err(Error::parameter("x_grid", "grid is empty"));
    }
    if x_grid[0] <= 0.0 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::parameter(
            "x_grid",
            "circulating amplitudes must be positive and increasing",
        ));
    }
    let points = map_points(x_grid, |x| setup.point(x.into()));
    let mut curve = BistabilityCurve {
        x: x_grid.to_vec(),
        input: Vec::with_capacity(x_grid.len()),
        output: Vec::with_capacity(x_grid.len()),
    };
    for p in points {
        let p = p?;
        curve.input.push(p.input.norm_sqr());
        curve.output.push(p.output.norm_sqr());
    }
    Ok(curve)
}

/// Turning points of input(x), in input intensity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Local maximum of the input along the lower branch (switch-up).
    pub upper: f64,
    pub upper_x: f64,
    /// Following local minimum (switch-down); `None` if the grid ends first.
    pub lower: Option<f64>,
    pub lower_x: Option<f64>,
}

/// Grid indices of the first interior local maximum of `v` and the first
/// local minimum after it.
fn turning_indices(v: &[f64]) -> Option<(usize, Option<usize>)> {
    let max = (1..v.len() - 1).find(|&k| v[k] > v[k - 1] && v[k] >= v[k + 1])?;
    let min = (max + 1..v.len() - 1).find(|&k| v[k] < v[k - 1] && v[k] <= v[k + 1]);
    Some((max, min))
}

/// Turning points located on the sweep grid; `None` if input(x) has no
/// interior local maximum.
pub fn bistability_thresholds(curve: &BistabilityCurve) -> Result<Option<Thresholds>> {
    if curve.len() < 5 {
        return Err(Error::Resolution(format!(
            "need at least 5 curve points, got {}",
            curve.len()
        )));
    }
    Ok(turning_indices(&curve.input).map(|(hi, lo)| Thresholds {
        upper: curve.input[hi],
        upper_x: curve.x[hi],
        lower: lo.map(|k| curve.input[k]),
        lower_x: lo.map(|k| curve.x[k]),
    }))
}

/// Relative accuracy of refined thresholds.
pub const THRESHOLD_RELATIVE_ACCURACY: f64 = 1e-3;

/// Golden-section search for an extremum of `f` on `[a, b]`; `sign = 1` finds
/// a maximum, `-1` a minimum. Stops when the bracket is below `rel` relative.
fn golden_section(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    sign: f64,
    rel: f64,
) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (sign * f(c)?, sign * f(d)?);
    while (b - a) > rel * 0.5 * (a.abs() + b.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = sign * f(d)?;
        }
    }
    Ok(if fc > fd {
        (c, sign * fc)
    } else {
        (d, sign * fd)
    })
}

/// Grid thresholds sharpened by golden-section search between the grid
/// neighbours of each turning point. Near an extremum the input intensity is
/// quadratic in x, so a 10⁻⁴ bracket in x is far inside the 10⁻³ target.
pub fn refine_thresholds(
    setup: &CavitySetup,
    curve: &BistabilityCurve,
) -> Result<Option<Thresholds>> {
    if bistability_thresholds(curve)?.is_none() {
        return Ok(None);
    }
    let Some((hi, lo)) = turning_indices(&curve.input) else {
        return Ok(None);
    };
    let rel = 0.1 * THRESHOLD_RELATIVE_ACCURACY;
    let f = |x| setup.input_intensity(x);
    let (upper_x, upper) = golden_section(f, curve.x[hi - 1], curve.x[hi + 1], 1.0, rel)?;
    let lower = match lo {
        Some(k) => Some(golden_section(
            f,
            curve.x[k - 1],
            curve.x[k + 1],
            -1.0,
            rel,
        )?),
        None => None,
    };
    Ok(Some(Thresholds {
        upper,
        upper_x,
        lower: lower.map(|l| l.1),
        lower_x: lower.map(|l| l.0),
    }))
}

/// Solves the cavity self-consistency x = √T·G₂ᴵ + R·e^{−iδ₀}·G₂(L; x) for a
/// given input amplitude by damped secant iteration from `x0`.
pub fn solve_input_output(
    setup: &CavitySetup,
    input: C64,
    x0: C64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<CavityPoint> {
    let residual = |x: C64| -> Result<(C64, CavityPoint)> {
        let p = setup.point(x)?;
        Ok(((p.input - input) * setup.cavity.transmittance.sqrt(), p))
    };
    let mut xa = x0;
    let mut ra = residual(xa)?.0;
    let mut xb = x0 * (1.0 + 1e-4) + 1e-9;
    let (mut rb, mut pb) = residual(xb)?;
    for _ in 0..max_iterations {
        if (pb.input - input).norm() <= tolerance * input.norm().max(f64::MIN_POSITIVE) {
            return Ok(pb);
        }
        let slope = (rb - ra) / (xb - xa);
        if !slope.is_finite() || slope.norm() == 0.0 {
            break;
        }
        let mut step = rb / slope;
        // Keep each update within a quarter of the current amplitude.
        let cap = 0.25 * xb.norm().max(1e-6);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        xa = xb;
        ra = rb;
        xb -= step;
        (rb, pb) = residual(xb)?;
    }
    Err(Error::Accuracy {
        doublings: max_iterations as u32,
        change: (pb.input - input).norm() / input.norm(),
    })
}

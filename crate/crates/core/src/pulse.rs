//! Gaussian probe pulse through the medium, treated spectrally.
//!
//! Convention: ε(t) = ∫ ε(ω) e^{−iωt} dω with
//! ε(ω) = ε₀ exp(−ω²/σ²) / (σ√π), so ε(0) = ε₀ and ε(t) = ε₀ exp(−σ²t²/4),
//! whose 1/e half-width is σ_t = 2/σ.
//!
//! On the grid ω_k = (k − N/2)·dω the dual times are t_n = (n − N/2)·dt with
//! dt = 2π/(N·dω). Then ω_k t_n = 2π kn/N − π(k + n) + πN/2, so for N divisible
//! by 4 the sum ε(t_n) = dω Σ_k ε_k e^{−iω_k t_n} is a forward FFT with
//! alternating signs applied before and after.
//!
//! Each spectral component is carried by the steady-state transfer function
//! H(ω) = G₂(L; Δ₂ + ω/γ) / G₂(0); the result is on the retarded time axis.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::atom::{AtomicSystem, DriveSet, C64};
use crate::error::{Error, Result};
use crate::parallel::map_points;
use crate::propagation::{propagate_exit, MediumSpec};

pub const MIN_POINTS: usize = 4096;
pub const MIN_SPAN_SIGMAS: f64 = 6.0;

/// Largest envelope value allowed at the edges of either grid, relative to ε₀.
pub const ALIAS_TOLERANCE: f64 = 1e-14;

/// Spectral components weaker than this fraction of the peak are passed
/// unchanged instead of being propagated. Their weight in any trace value is
/// below double-precision resolution.
pub const SPECTRAL_CUTOFF: f64 = 1e-20;

/// Probe amplitudes used for the linearity check of H(0).
pub const LINEARITY_PROBES: (f64, f64) = (0.05, 0.1);
pub const LINEARITY_TOLERANCE: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Spectral width σ in rad/s.
    pub sigma: f64,
    /// Peak Rabi amplitude ε₀ in units of γ.
    pub peak_amplitude: f64,
    /// The reference rate γ in rad/s, converting ω to detuning units.
    pub gamma_rad_per_s: f64,
    /// Number of frequency (and time) samples; a multiple of 4, at least 4096.
    pub points: usize,
    /// Half-span of the frequency grid in units of σ.
    pub span_sigmas: f64,
}

impl PulseSpec {
    pub fn sigma_t(&self) -> f64 {
        2.0 / self.sigma
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * self.span_sigmas * self.sigma / self.points as f64
    }

    pub fn dt(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.points as f64 * self.d_omega())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::parameter(name, format!("must be > 0, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("peak_amplitude", self.peak_amplitude)?;
        positive("gamma_rad_per_s", self.gamma_rad_per_s)?;
        if self.points < MIN_POINTS || !self.points.is_multiple_of(4) {
            return Err(Error::parameter(
                "points",
                format!(
                    "need a multiple of 4 and at least {MIN_POINTS}, got {}",
                    self.points
                ),
            ));
        }
        if !(self.span_sigmas >= MIN_SPAN_SIGMAS && self.span_sigmas.is_finite()) {
            return Err(Error::parameter(
                "span_sigmas",
                format!("frequency grid must span at least ±{MIN_SPAN_SIGMAS}σ"),
            ));
        }
        Ok(())
    }
}

/// Sampled envelope on dual frequency and time grids.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    /// ω_k in rad/s.
    pub omega: Vec<f64>,
    pub spectrum: Vec<C64>,
    /// t_n in s.
    pub time: Vec<f64>,
    pub trace: Vec<C64>,
}

fn centred_grid(n: usize, step: f64) -> Vec<f64> {
    (0..n).map(|k| (k as f64 - (n / 2) as f64) * step).collect()
}

fn alternate(v: &mut [C64]) {
    for x in v.iter_mut().skip(1).step_by(2) {
        *x = -*x;
    }
}

/// ε(t_n) = dω Σ_k ε_k e^{−iω_k t_n} on the dual grid.
fn to_time(spectrum: &[C64], d_omega: f64) -> Vec<C64> {
    let mut buf = spectrum.to_vec();
    alternate(&mut buf);
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    alternate(&mut buf);
    for x in &mut buf {
        *x *= d_omega;
    }
    buf
}

pub fn gaussian_envelope(spec: &PulseSpec) -> Result<Envelope> {
    spec.validate()?;
    let n = spec.points;
    let omega = centred_grid(n, spec.d_omega());
    let time = centred_grid(n, spec.dt());
    let norm = spec.peak_amplitude / (spec.sigma * std::f64::consts::PI.sqrt());
    let spectrum: Vec<C64> = omega
        .iter()
        .map(|w| C64::from(norm * (-(w / spec.sigma).powi(2)).exp()))
        .collect();
    let trace = to_time(&spectrum, spec.d_omega());
    let edge = |v: &[C64]| v[0].norm().max(v[n - 1].norm());
    let peak_density = norm;
    if edge(&spectrum) > ALIAS_TOLERANCE * peak_density {
        return Err(Error::Resolution(format!(
            "spectrum not negligible at ±{}σ",
            spec.span_sigmas
        )));
    }
    if edge(&trace) > ALIAS_TOLERANCE * spec.peak_amplitude {
        return Err(Error::Resolution(
            "time window too short for the pulse; lower span_sigmas or add points".into(),
        ));
    }
    Ok(Envelope {
        omega,
        spectrum,
        time,
        trace,
    })
}

/// Σ|ε(t)|² dt and 2π Σ|ε(ω)|² dω, which agree by Parseval's theorem.
pub fn energies(spec: &PulseSpec, spectrum: &[C64], trace: &[C64]) -> (f64, f64) {
    let sum = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    (
        sum(trace) * spec.dt(),
        2.0 * std::f64::consts::PI * sum(spectrum) * spec.d_omega(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseResult {
    pub envelope: Envelope,
    pub transfer: Vec<C64>,
    pub output_spectrum: Vec<C64>,
    pub output_trace: Vec<C64>,
    /// max|output|² / max|input|².
    pub peak_ratio: f64,
    /// H at the carrier detuning.
    pub transfer_at_carrier: C64,
    /// Set when H(0) depends on the probe amplitude beyond the tolerance.
    pub regime_warning: Option<String>,
}

impl PulseResult {
    /// Retarded time τ in μs.
    pub fn tau_us(&self) -> Vec<f64> {
        self.envelope.time.iter().map(|t| t * 1e6).collect()
    }

    /// |input|² and |output|², both divided by the input peak intensity.
    pub fn normalized_intensities(&self) -> (Vec<f64>, Vec<f64>) {
        let peak = peak_intensity(&self.envelope.trace);
        let scale = |v: &[C64]| v.iter().map(|x| x.norm_sqr() / peak).collect();
        (scale(&self.envelope.trace), scale(&self.output_trace))
    }
}

fn peak_intensity(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max)
}

fn transfer_at(
    system: &AtomicSystem,
    drives: &DriveSet,
    medium: &MediumSpec,
    amplitude: f64,
    detuning_shift: f64,
) -> Result<C64> {
    let d = DriveSet {
        probe: amplitude.into(),
        delta2: drives.delta2 + detuning_shift,
        ..*drives
    };
    Ok(propagate_exit(system, &d, medium)?.probe / d.probe)
}

/// Transmits the pulse through the medium; `drives.probe` is replaced by the
/// pulse's peak amplitude and `drives.delta2` is the carrier detuning.
pub fn pulse_transmission(
    spec: &PulseSpec,
    system: &AtomicSystem,
    drives: &DriveSet,
    medium: &MediumSpec,
) -> Result<PulseResult> {
    medium.validate()?;
    let envelope = gaussian_envelope(spec)?;
    let amp = spec.peak_amplitude;
    let threshold = SPECTRAL_CUTOFF * envelope.spectrum[spec.points / 2].norm();
    let active: Vec<f64> = envelope
        .omega
        .iter()
        .zip(&envelope.spectrum)
        .filter(|(_, e)| e.norm() > threshold)
        .map(|(w, _)| *w)
        .collect();
    let computed = map_points(&active, |w| {
        transfer_at(system, drives, medium, amp, w / spec.gamma_rad_per_s)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut transfer = vec![C64::new(1.0, 0.0); spec.points];
    let mut computed = computed.into_iter();
    for (h, e) in transfer.iter_mut().zip(&envelope.spectrum) {
        if e.norm() > threshold {
            *h = computed
                .next()
                .expect("one transfer value per active point");
        }
    }
    let transfer_at_carrier = transfer[spec.points / 2];

    let (weak, strong) = LINEARITY_PROBES;
    let h_weak = transfer_at(system, drives, medium, weak, 0.0)?;
    let h_strong = transfer_at(system, drives, medium, strong, 0.0)?;
    let change = (h_weak.norm() - h_strong.norm()).abs() / h_weak.norm().max(f64::MIN_POSITIVE);
    let regime_warning = (change >= LINEARITY_TOLERANCE).then(|| {
        format!(
            "H(0) changes by {change:.3e} (relative) between probe amplitudes {weak} and {strong}; \
             the medium is not in the linear regime"
        )
    });

    let output_spectrum: Vec<C64> = envelope
        .spectrum
        .iter()
        .zip(&transfer)
        .map(|(e, h)| e * h)
        .collect();
    let output_trace = to_time(&output_spectrum, spec.d_omega());
    let peak_ratio = peak_intensity(&output_trace) / peak_intensity(&envelope.trace);
    Ok(PulseResult {
        envelope,
        transfer,
        output_spectrum,
        output_trace,
        peak_ratio,
        transfer_at_carrier,
        regime_warning,
    })
}

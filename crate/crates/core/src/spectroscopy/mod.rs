//! PLE spectrum synthesis and fitting.
//!
//! Three synthesis regimes cover the experiments: a static Lorentzian line,
//! slow modulation (drive below the optical linewidth, which smears the line
//! into an arcsine-weighted band of width 2Δ_AC), and the resolved-sideband
//! comb with Bessel-function weights J_k(β)².

mod bessel;
mod fit;

pub use bessel::{bessel_j, bessel_j_derivative, bessel_j_signed, BesselError};
pub use fit::{
    extract_delta_ac, fit_linear, fit_lorentzian, fit_sideband_comb, DeltaAcEstimate,
    DeltaAcMethod, LinearFit, LorentzianFit, SidebandFit,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuator::DriveSignal;
use crate::rng::Stream;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("detuning grid must be strictly ascending")]
    GridNotAscending,
    #[error("detuning and signal lengths differ ({detuning} vs {signal})")]
    LengthMismatch { detuning: usize, signal: usize },
    #[error("signal values must be finite and nonnegative")]
    NegativeSignal,
}

/// Provenance attached to a spectrum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub emitter_id: String,
    pub drive: Option<DriveSignal>,
}

/// Sampled PLE spectrum: detunings in GHz relative to the reference ν₀,
/// nonnegative fluorescence per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PLESpectrum {
    detuning_ghz: Vec<f64>,
    signal: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl PLESpectrum {
    pub fn new(
        detuning_ghz: Vec<f64>,
        signal: Vec<f64>,
        meta: SpectrumMeta,
    ) -> Result<PLESpectrum, SpectrumError> {
        if detuning_ghz.len() != signal.len() {
            return Err(SpectrumError::LengthMismatch {
                detuning: detuning_ghz.len(),
                signal: signal.len(),
            });
        }
        if detuning_ghz
            .windows(2)
            .any(|w| !w[0].is_finite() || !w[1].is_finite() || w[0] >= w[1])
        {
            return Err(SpectrumError::GridNotAscending);
        }
        if signal.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SpectrumError::NegativeSignal);
        }
        Ok(PLESpectrum {
            detuning_ghz,
            signal,
            meta,
        })
    }

    pub fn detuning(&self) -> &[f64] {
        &self.detuning_ghz
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    /// Trapezoid integral of the signal over the grid.
    pub fn integrate(&self) -> f64 {
        self.detuning_ghz
            .windows(2)
            .zip(self.signal.windows(2))
            .map(|(d, s)| 0.5 * (s[0] + s[1]) * (d[1] - d[0]))
            .sum()
    }

    /// CSV serialization: `detuning_ghz,signal`, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("detuning_ghz,signal\n");
        for (d, s) in self.detuning_ghz.iter().zip(&self.signal) {
            out.push_str(&format!("{d},{s}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<PLESpectrum, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "detuning_ghz,signal" => {}
            other => return Err(format!("bad header: {other:?}")),
        }
        let mut detuning = Vec::new();
        let mut signal = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let d = parts
                .next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| format!("row {}: bad detuning", i + 2))?;
            let s = parts
                .next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| format!("row {}: bad signal", i + 2))?;
            detuning.push(d);
            signal.push(s);
        }
        PLESpectrum::new(detuning, signal, SpectrumMeta::default()).map_err(|e| e.to_string())
    }
}

/// Uniform grid helper: `n` points spanning [lo, hi] inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

fn lorentzian(delta: f64, center: f64, fwhm: f64, amplitude: f64, baseline: f64) -> f64 {
    let hw = fwhm / 2.0;
    baseline + amplitude * hw * hw / ((delta - center).powi(2) + hw * hw)
}

/// Static Lorentzian line.
pub fn synth_static(
    center: f64,
    fwhm: f64,
    amplitude: f64,
    baseline: f64,
    grid: &[f64],
) -> PLESpectrum {
    debug_assert!(fwhm > 0.0);
    let signal = grid
        .iter()
        .map(|&d| lorentzian(d, center, fwhm, amplitude, baseline))
        .collect();
    PLESpectrum {
        detuning_ghz: grid.to_vec(),
        signal,
        meta: SpectrumMeta::default(),
    }
}

/// Number of phase samples for the slow-modulation average.
pub const SLOW_MOD_QUADRATURE: usize = 256;

/// Slow-modulation line: (1/2π)∫ L(δ − Δ_AC sin φ) dφ over one drive cycle,
/// by an `order`-point trapezoid rule (exact spectral accuracy for smooth
/// periodic integrands).
pub fn synth_slow_modulation_with_order(
    center: f64,
    fwhm: f64,
    delta_ac: f64,
    grid: &[f64],
    order: usize,
) -> PLESpectrum {
    debug_assert!(fwhm > 0.0 && delta_ac >= 0.0);
    let shifts: Vec<f64> = (0..order)
        .map(|i| delta_ac * (std::f64::consts::TAU * i as f64 / order as f64).sin())
        .collect();
    let signal = grid
        .iter()
        .map(|&d| {
            shifts
                .iter()
                .map(|&s| lorentzian(d - s, center, fwhm, 1.0, 0.0))
                .sum::<f64>()
                / order as f64
        })
        .collect();
    PLESpectrum {
        detuning_ghz: grid.to_vec(),
        signal,
        meta: SpectrumMeta::default(),
    }
}

pub fn synth_slow_modulation(center: f64, fwhm: f64, delta_ac: f64, grid: &[f64]) -> PLESpectrum {
    synth_slow_modulation_with_order(center, fwhm, delta_ac, grid, SLOW_MOD_QUADRATURE)
}

/// Default sideband cutoff: ⌈β⌉ + 8 keeps Σ J_k(β)² ≥ 0.999 for β ≤ 3.
pub fn default_k_max(beta: f64) -> u32 {
    beta.abs().ceil() as u32 + 8
}

/// Resolved-sideband comb: Σ_k J_k(β)² L(δ − center − k ω_d).
///
/// Meaningful when ω_d exceeds the linewidth (cleanly resolved above ~3×).
pub fn synth_sidebands(
    center: f64,
    fwhm: f64,
    beta: f64,
    omega_d_ghz: f64,
    k_max: u32,
    grid: &[f64],
) -> Result<PLESpectrum, BesselError> {
    debug_assert!(fwhm > 0.0 && omega_d_ghz > 0.0);
    let weights: Vec<(i32, f64)> = (-(k_max as i32)..=k_max as i32)
        .map(|k| Ok((k, bessel_j_signed(k, beta)?.powi(2))))
        .collect::<Result<_, BesselError>>()?;
    let signal = grid
        .iter()
        .map(|&d| {
            weights
                .iter()
                .map(|&(k, w)| w * lorentzian(d, center + k as f64 * omega_d_ghz, fwhm, 1.0, 0.0))
                .sum()
        })
        .collect();
    Ok(PLESpectrum {
        detuning_ghz: grid.to_vec(),
        signal,
        meta: SpectrumMeta::default(),
    })
}

/// Modulation-index convention for the phonon-number arithmetic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationConvention {
    /// β = (g_orb/ω_d)·⟨n⟩ — the form the sideband-population model uses.
    #[default]
    AsPrinted,
    /// β = 2·(g_orb/ω_d)·√⟨n⟩ — the coherent-state convention.
    SqrtN,
}

#[derive(Debug, Error, PartialEq)]
pub enum PhononNumberError {
    #[error("g_orb must be positive to invert the modulation index")]
    DivisionDomain,
}

/// Invert the modulation index into a phonon occupation ⟨n⟩.
pub fn phonon_number(
    beta: f64,
    omega_d_hz: f64,
    g_orb_hz: f64,
    convention: ModulationConvention,
) -> Result<f64, PhononNumberError> {
    if g_orb_hz <= 0.0 {
        return Err(PhononNumberError::DivisionDomain);
    }
    Ok(match convention {
        ModulationConvention::AsPrinted => beta * omega_d_hz / g_orb_hz,
        ModulationConvention::SqrtN => (beta * omega_d_hz / (2.0 * g_orb_hz)).powi(2),
    })
}

/// Replace the signal with scaled counts plus Poisson noise (counts taken at
/// `peak_counts` for the maximum signal value).
pub fn with_poisson_counts(spec: &PLESpectrum, peak_counts: f64, stream: &mut Stream) -> PLESpectrum {
    let max = spec.signal.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    let signal = spec
        .signal
        .iter()
        .map(|&v| stream.poisson(v / max * peak_counts) as f64)
        .collect();
    PLESpectrum {
        detuning_ghz: spec.detuning_ghz.clone(),
        signal,
        meta: spec.meta.clone(),
    }
}

/// Add zero-mean Gaussian noise of the given absolute σ, clamped at zero.
pub fn with_gaussian_noise(spec: &PLESpectrum, sigma: f64, stream: &mut Stream) -> PLESpectrum {
    let signal = spec
        .signal
        .iter()
        .map(|&v| (v + sigma * stream.normal()).max(0.0))
        .collect();
    PLESpectrum {
        detuning_ghz: spec.detuning_ghz.clone(),
        signal,
        meta: spec.meta.clone(),
    }
}

//! Acoustically driven spin manipulation: optical pumping through the
//! spin-flipping transition, resonant acoustic Rabi driving, and the
//! readout sweep over drive frequency.
//!
//! Optical pump/readout pulses are collapsed into instantaneous projective
//! operations on a two-level population vector; the acoustic pulse applies
//! the closed-form Rabi flip probability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectroscopy::ModulationConvention;

#[derive(Debug, Error, PartialEq)]
pub enum SpinError {
    #[error("readout at step {step} is not preceded by a pump")]
    SequenceOrder { step: usize },
}

/// Effective spin qubit extracted from the ground-manifold model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinQubit {
    /// Ground-state qubit splitting in GHz.
    pub splitting_ghz: f64,
    /// Spin-phonon coupling in Hz.
    pub g_sm_hz: f64,
    /// Probability that a pump pulse leaves the spin in |2⟩.
    pub init_fidelity: f64,
    /// Counts per unit |1⟩ population at readout.
    pub readout_contrast: f64,
    /// Optional exponential damping rate on the flip probability (Hz);
    /// zero disables decoherence.
    #[serde(default)]
    pub decoherence_rate_hz: f64,
}

/// A resonant (or detuned) acoustic drive pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcousticPulse {
    /// Drive frequency ω_d/2π in Hz.
    pub omega_d_hz: f64,
    /// Phonon occupation of the driven mode.
    pub phonon_number: f64,
    /// Pulse duration in seconds.
    pub duration_s: f64,
}

/// Acoustic Rabi frequency: Ω = 2·g_sm·⟨n⟩ under the printed convention,
/// Ω = 2·g_sm·√⟨n⟩ under the coherent-state one.
pub fn acoustic_rabi_frequency(
    g_sm_hz: f64,
    phonon_number: f64,
    convention: ModulationConvention,
) -> f64 {
    debug_assert!(g_sm_hz >= 0.0 && phonon_number >= 0.0);
    match convention {
        ModulationConvention::AsPrinted => 2.0 * g_sm_hz * phonon_number,
        ModulationConvention::SqrtN => 2.0 * g_sm_hz * phonon_number.sqrt(),
    }
}

/// Closed-form two-level flip probability after a rectangular pulse:
/// P = Ω²/(Ω²+δ²) · sin²(π·√(Ω²+δ²)·t).
pub fn rabi_flip_probability(rabi_hz: f64, detuning_hz: f64, duration_s: f64) -> f64 {
    debug_assert!(duration_s >= 0.0);
    let w2 = rabi_hz * rabi_hz + detuning_hz * detuning_hz;
    if w2 == 0.0 {
        return 0.0;
    }
    let w = w2.sqrt();
    let p = (rabi_hz * rabi_hz / w2) * (std::f64::consts::PI * w * duration_s).sin().powi(2);
    p.clamp(0.0, 1.0)
}

fn flip_probability(qubit: &SpinQubit, pulse: &AcousticPulse, convention: ModulationConvention) -> f64 {
    let rabi = acoustic_rabi_frequency(qubit.g_sm_hz, pulse.phonon_number, convention);
    let detuning = pulse.omega_d_hz - qubit.splitting_ghz * 1e9;
    let p = rabi_flip_probability(rabi, detuning, pulse.duration_s);
    p * (-qubit.decoherence_rate_hz * pulse.duration_s).exp()
}

/// Two-level population vector (p1, p2); p1 + p2 = 1 is preserved exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub p1: f64,
    pub p2: f64,
}

impl TwoLevelState {
    /// Thermal start: everything in |1⟩.
    pub fn ground() -> TwoLevelState {
        TwoLevelState { p1: 1.0, p2: 0.0 }
    }

    /// Optical pump through the spin-flipping transition: |2⟩ population set
    /// to the init fidelity.
    pub fn pump(&mut self, init_fidelity: f64) {
        self.p2 = init_fidelity;
        self.p1 = 1.0 - init_fidelity;
    }

    /// Incoherent population exchange with flip probability `p`.
    pub fn mix(&mut self, p: f64) {
        let moved = p * (self.p2 - self.p1);
        self.p1 += moved;
        self.p2 -= moved;
    }
}

/// Steps of a pump / acoustic / readout sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseStep {
    Pump,
    Acoustic(AcousticPulse),
    Readout,
}

/// Propagate a pulse sequence; returns the expected counts at each readout.
/// Readout measures the |1⟩ population and re-pumps.
pub fn simulate_pulse_sequence(
    qubit: &SpinQubit,
    sequence: &[PulseStep],
    convention: ModulationConvention,
) -> Result<Vec<f64>, SpinError> {
    let mut pumped = false;
    let mut state = TwoLevelState::ground();
    let mut counts = Vec::new();
    for (i, step) in sequence.iter().enumerate() {
        match step {
            PulseStep::Pump => {
                state.pump(qubit.init_fidelity);
                pumped = true;
            }
            PulseStep::Acoustic(pulse) => {
                state.mix(flip_probability(qubit, pulse, convention));
            }
            PulseStep::Readout => {
                if !pumped {
                    return Err(SpinError::SequenceOrder { step: i });
                }
                counts.push(qubit.readout_contrast * state.p1);
                state.pump(qubit.init_fidelity);
            }
        }
    }
    Ok(counts)
}

/// Acoustic spin-resonance sweep: expected counts versus drive frequency for
/// the pump → acoustic → readout cycle.
///
/// counts(ω_d) = baseline + contrast·fidelity·P_flip(Ω, ω_d − splitting),
/// with the baseline set by the pump residual (1 − fidelity)·contrast.
pub fn simulate_odmr_sweep(
    qubit: &SpinQubit,
    pulse_template: &AcousticPulse,
    omega_range_hz: &[f64],
    convention: ModulationConvention,
) -> Vec<(f64, f64)> {
    debug_assert!(
        omega_range_hz.windows(2).all(|w| w[0] < w[1]),
        "sweep must ascend"
    );
    let baseline = qubit.readout_contrast * (1.0 - qubit.init_fidelity);
    omega_range_hz
        .iter()
        .map(|&omega| {
            let pulse = AcousticPulse {
                omega_d_hz: omega,
                ..*pulse_template
            };
            let p = flip_probability(qubit, &pulse, convention);
            (
                omega,
                baseline + qubit.readout_contrast * qubit.init_fidelity * p,
            )
        })
        .collect()
}

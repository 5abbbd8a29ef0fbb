//! Voltage → deflection / strain / power map for the piezoelectric
//! nano-cantilever, using a DC gain plus a modal-superposition surrogate for
//! the measured frequency response.
//!
//! Each site's AC response is Σ_m g_m·H_m(ω) with the driven-oscillator
//! transfer H_m(ω) = ω_m² / (ω_m² − ω² + iω ω_m/Q_m), so |H_m| → 1 at DC and
//! |H_m(ω_m)| = Q_m on resonance. Mode gains per site sum to the DC strain
//! gain, which makes the ω → 0 limit match the DC path exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::frames::{uniaxial_device_strain, FrameError, StrainTensor};

#[derive(Debug, Error, PartialEq)]
pub enum ActuatorError {
    #[error("unknown emitter site '{0}'")]
    SiteNotFound(String),
    #[error("|v_dc| = {v:.1} V exceeds the configured bound {bound:.1} V")]
    VoltageRange { v: f64, bound: f64 },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// One mechanical resonance as seen by one emitter site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanicalMode {
    pub frequency_mhz: f64,
    pub quality_factor: f64,
    /// Quasi-static participation gain of this mode (strain/V); the
    /// on-resonance response is quality_factor times larger.
    pub strain_gain_per_v: f64,
}

impl MechanicalMode {
    pub fn frequency_hz(&self) -> f64 {
        self.frequency_mhz * 1e6
    }

    /// Complex transfer H(ω) normalized to 1 at DC.
    pub fn transfer(&self, freq_hz: f64) -> Complex64 {
        let wm = self.frequency_hz();
        let w = freq_hz;
        let denom = Complex64::new(wm * wm - w * w, w * wm / self.quality_factor);
        Complex64::from(wm * wm) / denom
    }
}

/// Per-site coupling of one actuator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteResponse {
    pub dc_strain_gain_per_v: f64,
    pub modes: Vec<MechanicalMode>,
}

/// Electromechanical model of one actuator: DC gains, modal resonances and
/// the electrical loss parameters governing on-chip power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorModel {
    pub id: String,
    pub dc_deflection_gain_nm_per_v: f64,
    pub capacitance_f: f64,
    /// Fraction of the stored electrical energy dissipated per cycle.
    pub loss_factor: f64,
    pub leak_resistance_ohm: f64,
    /// Voltage guard for the DC path.
    pub voltage_bound_v: f64,
    pub sites: BTreeMap<String, SiteResponse>,
}

/// Drive applied to an actuator: V(t) = V_DC + V_AC sin(2π f_d t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    pub v_dc: f64,
    pub v_ac: f64,
    /// Drive frequency ω_d/2π in Hz.
    pub omega_d_hz: f64,
    /// Optional pulse length in seconds (rectangular envelope).
    pub duration_s: Option<f64>,
}

impl ActuatorModel {
    fn site(&self, site: &str) -> Result<&SiteResponse, ActuatorError> {
        self.sites
            .get(site)
            .ok_or_else(|| ActuatorError::SiteNotFound(site.to_string()))
    }

    /// DC deflection (nm) and device-frame strain at an emitter site.
    pub fn dc_response(
        &self,
        site: &str,
        v_dc: f64,
    ) -> Result<(f64, StrainTensor), ActuatorError> {
        if v_dc.abs() > self.voltage_bound_v {
            return Err(ActuatorError::VoltageRange {
                v: v_dc,
                bound: self.voltage_bound_v,
            });
        }
        let s = self.site(site)?;
        let deflection = self.dc_deflection_gain_nm_per_v * v_dc;
        let eps = uniaxial_device_strain(s.dc_strain_gain_per_v * v_dc, 0.0)?;
        Ok((deflection, eps))
    }

    /// Amplitude of the oscillating device-frame ε_xx at `site` for a drive
    /// `v_ac·sin(2π f t)`. At f = 0 this reduces to the quasi-static gain.
    pub fn ac_strain_amplitude(&self, site: &str, v_ac: f64, omega_d_hz: f64) -> Result<f64, ActuatorError> {
        let s = self.site(site)?;
        let total: Complex64 = s
            .modes
            .iter()
            .map(|m| Complex64::from(m.strain_gain_per_v) * m.transfer(omega_d_hz))
            .sum();
        Ok(v_ac * total.norm())
    }

    /// On-chip AC dissipation P = k·C·V_AC²·f (energy per cycle × cycles/s).
    pub fn dissipated_power_w(&self, v_ac: f64, omega_d_hz: f64) -> f64 {
        self.loss_factor * self.capacitance_f * v_ac * v_ac * omega_d_hz
    }

    /// Energy for one −V_AC → +V_AC traversal; dissipated_power = E·f.
    pub fn switching_energy_j(&self, v_ac: f64) -> f64 {
        self.loss_factor * self.capacitance_f * v_ac * v_ac
    }

    /// Static hold power through the leak resistance.
    pub fn hold_power_w(&self, v_dc: f64) -> f64 {
        v_dc * v_dc / self.leak_resistance_ohm
    }
}

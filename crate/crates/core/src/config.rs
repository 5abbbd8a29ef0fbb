//! JSON device configuration: emitters, actuators, switch topology and
//! global settings, plus the shipped default fixture on which every
//! scenario runs with zero arguments.
//!
//! Unit conventions in serialized form: energies and splittings in GHz,
//! susceptibilities in PHz/strain, mode and drive frequencies in MHz,
//! fields in Tesla, durations in ns — embedded in the field names.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuator::{ActuatorModel, MechanicalMode, SiteResponse};
use crate::frames::{
    classify_orientation, CrystalDirection, FrameError, SnVOrientation, StrainTensor,
};
use crate::hamiltonian::SnVParams;
use crate::photonics::{chain_edges, compose_network, ElementSpec, NetworkSpec};
use crate::spectroscopy::ModulationConvention;

pub const CONFIG_VERSION: u32 = 1;

/// One schema violation with a JSON-pointer-style path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("config is not valid JSON: {0}")]
    Parse(String),
    #[error("config version {found} does not match supported version {expected}")]
    Version { found: u64, expected: u32 },
    #[error("config schema violations:\n{}", format_violations(.0))]
    Schema(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  {}: {}", x.path, x.message))
        .collect::<Vec<_>>()
        .join("\n")
}

/// How the scalar "pre-strain" figure is interpreted when building params.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrestrainInterpretation {
    /// prestrain fields are the E_g-symmetry energy components (default).
    EgMagnitude,
    /// prestrain magnitude is the total ground orbital splitting; the E_g
    /// component is back-computed as √(S² − λ_g²)/2.
    OrbitalSplitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalSettings {
    pub modulation_index_convention: ModulationConvention,
    pub prestrain_interpretation: PrestrainInterpretation,
    /// Transverse contraction for uniaxial device strain (0 = pure uniaxial).
    pub poisson_ratio: f64,
    pub default_seed: u64,
    /// Fraction of the bright-port power leaking into dark ports, bounding
    /// reported switch extinction.
    pub stray_light_fraction: f64,
    pub detector_dead_time_ns: f64,
}

/// One implanted emitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterRecord {
    pub id: String,
    /// Actuator that strains this emitter.
    pub actuator: String,
    /// Site key within that actuator's gain tables.
    pub site: String,
    /// Network input channel carrying this emitter's fluorescence.
    #[serde(default)]
    pub channel: Option<String>,
    pub dipole_axis: [i32; 3],
    pub depth_nm: f64,
    pub depth_straggle_nm: f64,
    /// Optical linewidth Γ_opt.
    pub linewidth_ghz: f64,
    /// Per-emitter parameter overrides; the global defaults apply if absent.
    #[serde(default)]
    pub params: Option<SnVParams>,
    /// Zero-point strain at this emitter in its own SnV frame, Voigt order
    /// [xx, yy, zz, yz, xz, xy]. Calibrated, not measured.
    pub zpf_strain_voigt: [f64; 6],
    /// Photophysics for photon-stream scenarios.
    #[serde(default)]
    pub fluorescence: Option<FluorescenceSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluorescenceSpec {
    pub lifetime_ns: f64,
    pub signal_rate_hz: f64,
    pub background_rate_hz: f64,
}

/// Reference zero-point strain tensors for the coupling-rate maxima quoted
/// for this device (per orientation class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZpfReference {
    pub axial_max_voigt: [f64; 6],
    pub transverse_max_voigt: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub version: u32,
    pub settings: GlobalSettings,
    pub snv_defaults: SnVParams,
    pub emitters: Vec<EmitterRecord>,
    pub actuators: Vec<ActuatorModel>,
    pub network: NetworkSpec,
    pub zpf_reference: ZpfReference,
    pub scenarios: ScenarioSettings,
}

// ---------------------------------------------------------------------------
// scenario fixtures

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcTuningSettings {
    pub emitters: Vec<String>,
    pub v_min: f64,
    pub v_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcBroadeningSettings {
    pub emitter: String,
    pub omega_d_mhz: f64,
    pub v_ac_list: Vec<f64>,
    pub grid_span_ghz: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceEnhancementSettings {
    pub emitter: String,
    pub v_ac: f64,
    pub on_resonance_mhz: f64,
    pub off_resonance_mhz: f64,
    pub sweep_start_mhz: f64,
    pub sweep_stop_mhz: f64,
    pub sweep_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidebandCombSettings {
    pub emitter: String,
    pub omega_d_mhz: f64,
    pub v_ac_list: Vec<f64>,
    pub grid_span_ghz: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononNumberSettings {
    pub emitter: String,
    pub omega_d_mhz: f64,
    pub v_ac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinOdmrSettings {
    pub emitter: String,
    pub b_transverse_t: f64,
    pub pulse_duration_ns: f64,
    pub pulse_phonon_number: f64,
    pub sweep_start_mhz: f64,
    pub sweep_stop_mhz: f64,
    pub sweep_step_mhz: f64,
    pub init_fidelity: f64,
    pub readout_contrast: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsmSweepSettings {
    pub emitter: String,
    pub b_min_t: f64,
    pub b_max_t: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerBudgetSettings {
    pub actuator: String,
    pub v_ac_resonant: f64,
    pub resonant_mhz: f64,
    pub v_ac_fast: f64,
    pub fast_mhz: f64,
    pub v_hold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteAndSwitchSettings {
    pub drive_emitter: String,
    pub omega_d_mhz: f64,
    pub v_ac_list: Vec<f64>,
    pub grid_span_ghz: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Settings {
    pub emitters: Vec<String>,
    pub duration_s: f64,
    pub bin_width_ns: f64,
    pub tau_range_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSettings {
    pub dc_tuning: DcTuningSettings,
    pub ac_broadening: AcBroadeningSettings,
    pub resonance_enhancement: ResonanceEnhancementSettings,
    pub sideband_comb: SidebandCombSettings,
    pub phonon_number: PhononNumberSettings,
    pub spin_odmr: SpinOdmrSettings,
    pub gsm_sweep: GsmSweepSettings,
    pub power_budget: PowerBudgetSettings,
    pub route_and_switch: RouteAndSwitchSettings,
    pub g2: G2Settings,
}

// ---------------------------------------------------------------------------

impl DeviceConfig {
    pub fn emitter(&self, id: &str) -> Option<&EmitterRecord> {
        self.emitters.iter().find(|e| e.id == id)
    }

    pub fn actuator(&self, id: &str) -> Option<&ActuatorModel> {
        self.actuators.iter().find(|a| a.id == id)
    }

    /// Parameters for one emitter with the pre-strain interpretation
    /// resolved to E_g energies.
    pub fn resolved_params(&self, emitter: &EmitterRecord) -> SnVParams {
        let mut p = emitter
            .params
            .clone()
            .unwrap_or_else(|| self.snv_defaults.clone());
        if self.settings.prestrain_interpretation == PrestrainInterpretation::OrbitalSplitting {
            let target = p.prestrain_magnitude_ghz();
            let eg = ((target * target - p.lambda_g_ghz * p.lambda_g_ghz).max(0.0)).sqrt() / 2.0;
            let (x, y) = if target > 0.0 {
                (
                    eg * p.prestrain_egx_ghz / target,
                    eg * p.prestrain_egy_ghz / target,
                )
            } else {
                (0.0, 0.0)
            };
            p.prestrain_egx_ghz = x;
            p.prestrain_egy_ghz = y;
        }
        p
    }

    pub fn orientation(&self, emitter: &EmitterRecord) -> Result<SnVOrientation, FrameError> {
        let [a, b, c] = emitter.dipole_axis;
        classify_orientation(CrystalDirection(a, b, c))
    }

    /// Zero-point strain tensor of one emitter, tagged with its SnV frame.
    pub fn zpf_tensor(&self, emitter: &EmitterRecord) -> Result<StrainTensor, FrameError> {
        let orientation = self.orientation(emitter)?;
        Ok(StrainTensor::from_voigt(
            emitter.zpf_strain_voigt,
            orientation.frame(),
        ))
    }

    /// Collect every semantic violation (empty when valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();

        for (i, e) in self.emitters.iter().enumerate() {
            let base = format!("/emitters/{i}");
            match self.actuator(&e.actuator) {
                None => v.push(Violation {
                    path: format!("{base}/actuator"),
                    message: format!(
                        "emitter '{}' references unknown actuator '{}'",
                        e.id, e.actuator
                    ),
                }),
                Some(a) => {
                    if !a.sites.contains_key(&e.site) {
                        v.push(Violation {
                            path: format!("{base}/site"),
                            message: format!(
                                "emitter '{}' references site '{}' missing from actuator '{}'",
                                e.id, e.site, e.actuator
                            ),
                        });
                    }
                }
            }
            if let Some(ch) = &e.channel {
                if !self.network.inputs.iter().any(|(n, _)| n == ch) {
                    v.push(Violation {
                        path: format!("{base}/channel"),
                        message: format!("channel '{ch}' is not a network input"),
                    });
                }
            }
            let [a, b, c] = e.dipole_axis;
            if classify_orientation(CrystalDirection(a, b, c)).is_err() {
                v.push(Violation {
                    path: format!("{base}/dipole_axis"),
                    message: format!("{:?} is not a ⟨111⟩ direction", e.dipole_axis),
                });
            }
            if !e.linewidth_ghz.is_finite() || e.linewidth_ghz <= 0.0 {
                v.push(Violation {
                    path: format!("{base}/linewidth_ghz"),
                    message: "must be positive".into(),
                });
            }
        }
        for (i, a) in self.actuators.iter().enumerate() {
            let base = format!("/actuators/{i}");
            if !a.capacitance_f.is_finite() || a.capacitance_f <= 0.0 {
                v.push(Violation {
                    path: format!("{base}/capacitance_f"),
                    message: "must be positive".into(),
                });
            }
            if !a.loss_factor.is_finite() || a.loss_factor <= 0.0 || a.loss_factor >= 1.0 {
                v.push(Violation {
                    path: format!("{base}/loss_factor"),
                    message: "must lie in (0, 1)".into(),
                });
            }
            for (site, resp) in &a.sites {
                for (mi, m) in resp.modes.iter().enumerate() {
                    if !m.frequency_mhz.is_finite() || m.frequency_mhz <= 0.0 {
                        v.push(Violation {
                            path: format!("{base}/sites/{site}/modes/{mi}/frequency_mhz"),
                            message: "must be positive".into(),
                        });
                    }
                    if !m.quality_factor.is_finite() || m.quality_factor < 1.0 {
                        v.push(Violation {
                            path: format!("{base}/sites/{site}/modes/{mi}/quality_factor"),
                            message: "must be ≥ 1".into(),
                        });
                    }
                }
            }
        }
        if let Err(e) = compose_network(&self.network) {
            v.push(Violation {
                path: "/network".into(),
                message: e.to_string(),
            });
        }
        let known_emitter = |id: &String, path: String, v: &mut Vec<Violation>| {
            if !self.emitters.iter().any(|e| &e.id == id) {
                v.push(Violation {
                    path,
                    message: format!("unknown emitter '{id}'"),
                });
            }
        };
        for (i, id) in self.scenarios.dc_tuning.emitters.iter().enumerate() {
            known_emitter(id, format!("/scenarios/dc_tuning/emitters/{i}"), &mut v);
        }
        known_emitter(
            &self.scenarios.ac_broadening.emitter,
            "/scenarios/ac_broadening/emitter".into(),
            &mut v,
        );
        known_emitter(
            &self.scenarios.spin_odmr.emitter,
            "/scenarios/spin_odmr/emitter".into(),
            &mut v,
        );
        known_emitter(
            &self.scenarios.gsm_sweep.emitter,
            "/scenarios/gsm_sweep/emitter".into(),
            &mut v,
        );
        for (i, id) in self.scenarios.g2.emitters.iter().enumerate() {
            known_emitter(id, format!("/scenarios/g2/emitters/{i}"), &mut v);
        }
        v
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json_str(text: &str) -> Result<DeviceConfig, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        DeviceConfig::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<DeviceConfig, ConfigError> {
        let found = value.get("version").and_then(|v| v.as_u64()).ok_or_else(|| {
            ConfigError::Schema(vec![Violation {
                path: "/version".into(),
                message: "missing or non-integer version field".into(),
            }])
        })?;
        if found != CONFIG_VERSION as u64 {
            return Err(ConfigError::Version {
                found,
                expected: CONFIG_VERSION,
            });
        }
        let config: DeviceConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            // normalize `emitters[0].zpf_strain_voigt` to a JSON pointer
            let pointer = e
                .path()
                .to_string()
                .replace(['.', '['], "/")
                .replace(']', "");
            ConfigError::Schema(vec![Violation {
                path: format!("/{pointer}"),
                message: e.inner().to_string(),
            }])
        })?;
        let violations = config.validate();
        if !violations.is_empty() {
            return Err(ConfigError::Schema(violations));
        }
        Ok(config)
    }
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<DeviceConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
    DeviceConfig::from_json_str(&text)
}

/// Apply one `--set dotted.path=value` override to a JSON value; array
/// indices are plain numbers in the path. The value parses as JSON when
/// possible, else as a string.
pub fn apply_override(root: &mut serde_json::Value, path: &str, raw: &str) -> Result<(), String> {
    let mut cursor = root;
    for key in path.split('.') {
        cursor = match cursor {
            serde_json::Value::Object(map) => map
                .get_mut(key)
                .ok_or_else(|| format!("unknown config key '{key}' in '{path}'"))?,
            serde_json::Value::Array(items) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| format!("'{key}' is not an array index in '{path}'"))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| format!("index {idx} out of bounds in '{path}'"))?
            }
            _ => return Err(format!("'{path}' descends into a scalar at '{key}'")),
        };
    }
    *cursor =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    Ok(())
}

// ---------------------------------------------------------------------------
// default fixture

fn modes(spec: &[(f64, f64, f64)]) -> Vec<MechanicalMode> {
    spec.iter()
        .map(|&(frequency_mhz, quality_factor, strain_gain_per_v)| MechanicalMode {
            frequency_mhz,
            quality_factor,
            strain_gain_per_v,
        })
        .collect()
}

/// Per-site modal ladder: the named resonances of this device with the
/// remainder of the DC gain assigned to a 2.5 GHz mode so the quasi-static
/// sum matches the DC gain exactly.
fn site(dc_gain: f64, dominant: (f64, f64, f64), rest: &[(f64, f64, f64)]) -> SiteResponse {
    let mut table = vec![dominant];
    table.extend_from_slice(rest);
    let assigned: f64 = table.iter().map(|m| m.2).sum();
    let remainder = dc_gain - assigned;
    table.push((2500.0, 10.0, remainder));
    SiteResponse {
        dc_strain_gain_per_v: dc_gain,
        modes: modes(&table),
    }
}

impl Default for DeviceConfig {
    /// The shipped device fixture: three characterized SnVs, four switch
    /// channels on two actuators, and the 4×1 multiplexing switch. DC and
    /// modal gains are calibrations chosen to land the measured anchors
    /// (20 GHz tuning at 60 V, 1.9 GHz resonant broadening at 0.25 V,
    /// β = 1 at 0.5 V and 1 GHz), not measurements.
    fn default() -> DeviceConfig {
        let defaults = SnVParams::default();
        let snv1_params = SnVParams {
            t_par_g_phz: 0.245,
            t_par_u_phz: -0.245,
            ..defaults.clone()
        };
        // The pre-strain sits along egy, perpendicular in E_g space to the
        // egx component generated by uniaxial beam strain in an axial SnV
        // frame; the measured DC tuning stays linear that way.
        let snv2_params = SnVParams {
            t_par_g_phz: 0.218,
            t_par_u_phz: -0.218,
            prestrain_egy_ghz: 865.0,
            ..defaults.clone()
        };

        let fluor = |background_rate_hz: f64| {
            Some(FluorescenceSpec {
                lifetime_ns: 10.0,
                signal_rate_hz: 2e5,
                background_rate_hz,
            })
        };

        let emitters = vec![
            EmitterRecord {
                id: "snv1".into(),
                actuator: "a".into(),
                site: "snv1".into(),
                channel: None,
                dipole_axis: [1, 1, 1],
                depth_nm: 75.0,
                depth_straggle_nm: 5.0,
                linewidth_ghz: 0.120,
                params: Some(snv1_params),
                // g_orb ≈ 2 kHz at this location
                zpf_strain_voigt: [1e-12, -1e-12, 0.0, 0.0, 0.0, 0.0],
                fluorescence: None,
            },
            EmitterRecord {
                id: "snv2".into(),
                actuator: "b".into(),
                site: "snv2".into(),
                channel: None,
                dipole_axis: [1, 1, 1],
                depth_nm: 75.0,
                depth_straggle_nm: 5.0,
                linewidth_ghz: 0.120,
                params: Some(snv2_params),
                // E_g zero-point energy perpendicular to the pre-strain,
                // calibrated to the measured spin-phonon coupling
                zpf_strain_voigt: [9.5e-10, -9.5e-10, 0.0, 0.0, 9.5e-10, 0.0],
                fluorescence: None,
            },
            EmitterRecord {
                id: "snv3".into(),
                actuator: "a".into(),
                site: "snv3".into(),
                channel: None,
                dipole_axis: [1, 1, 1],
                depth_nm: 75.0,
                depth_straggle_nm: 5.0,
                linewidth_ghz: 0.120,
                params: None,
                zpf_strain_voigt: [5e-13, -5e-13, 0.0, 0.0, 0.0, 0.0],
                fluorescence: None,
            },
            EmitterRecord {
                id: "cc1".into(),
                actuator: "a".into(),
                site: "cc1".into(),
                channel: Some("ch1".into()),
                dipole_axis: [1, 1, 1],
                depth_nm: 75.0,
                depth_straggle_nm: 5.0,
                linewidth_ghz: 0.120,
                params: None,
                zpf_strain_voigt: [1e-12, -1e-12, 0.0, 0.0, 0.0, 0.0],
                fluorescence: fluor(5e4),
            },
            EmitterRecord {
                id: "cc2".into(),
                actuator: "a".into(),
                site: "cc2".into(),
                channel: Some("ch2".into()),
                dipole_axis: [1, 1, 1],
                depth_nm: 75.0,
                depth_straggle_nm: 5.0,
                linewidth_ghz: 0.120,
                params: None,
                zpf_strain_voigt: [1e-12, -1e-12, 0.0, 0.0, 0.0, 0.0],
                // ρ = 0.8: the measured g²(0) floor of 0.36
                fluorescence: fluor(5e4),
            },
            EmitterRecord {
                id: "cc3".into(),
                actuator: "b".into(),
                site: "cc3".into(),
                channel: Some("ch3".into()),
                dipole_axis: [1, 1, 1],
                depth_nm: 75.0,
                depth_straggle_nm: 5.0,
                linewidth_ghz: 0.120,
                params: None,
                zpf_strain_voigt: [1e-12, -1e-12, 0.0, 0.0, 0.0, 0.0],
                // ρ ≈ 0.9165: the measured g²(0) floor of 0.16
                fluorescence: fluor(18218.0),
            },
            EmitterRecord {
                id: "cc4".into(),
                actuator: "b".into(),
                site: "cc4".into(),
                channel: Some("ch4".into()),
                dipole_axis: [1, 1, 1],
                depth_nm: 75.0,
                depth_straggle_nm: 5.0,
                linewidth_ghz: 0.120,
                params: None,
                // g_orb = 10 kHz: the high-frequency drive site
                zpf_strain_voigt: [5e-12, -5e-12, 0.0, 0.0, 0.0, 0.0],
                fluorescence: fluor(5e4),
            },
        ];

        let mut sites_a = BTreeMap::new();
        sites_a.insert(
            "snv1".into(),
            site(
                1.30e-6,
                (10.0, 20.0, 1.0e-6),
                &[
                    (600.0, 30.0, 1.2e-7),
                    (1000.0, 10.0, 8e-8),
                    (2000.0, 10.0, 5e-8),
                ],
            ),
        );
        sites_a.insert(
            "snv3".into(),
            site(
                3.1e-7,
                (10.0, 20.0, 2.0e-7),
                &[(600.0, 30.0, 5e-8), (1000.0, 10.0, 3e-8)],
            ),
        );
        sites_a.insert(
            "cc1".into(),
            site(4.0e-7, (10.0, 20.0, 2.5e-7), &[(600.0, 30.0, 8e-8)]),
        );
        sites_a.insert(
            "cc2".into(),
            site(5.0e-7, (10.0, 20.0, 3.0e-7), &[(600.0, 30.0, 1e-7)]),
        );

        let mut sites_b = BTreeMap::new();
        sites_b.insert(
            "snv2".into(),
            site(
                1.45e-6,
                // Q·gain at 10 MHz calibrated for Δ_AC = 1.9 GHz at 0.25 V
                (10.0, 20.0, 1.3238e-6),
                &[
                    (600.0, 30.0, 5e-8),
                    (1000.0, 10.0, 4e-8),
                    (2000.0, 10.0, 2e-8),
                ],
            ),
        );
        sites_b.insert(
            "cc3".into(),
            site(5.0e-7, (10.0, 20.0, 3.0e-7), &[(600.0, 30.0, 1e-7)]),
        );
        sites_b.insert(
            "cc4".into(),
            site(
                1.109e-6,
                // Q·gain at 1 GHz calibrated for β = 1 at 0.5 V
                (1000.0, 10.0, 6.56e-7),
                &[
                    (10.0, 20.0, 2.0e-7),
                    (600.0, 30.0, 1.0e-7),
                    (2000.0, 10.0, 1.0e-7),
                ],
            ),
        );

        let actuators = vec![
            ActuatorModel {
                id: "a".into(),
                dc_deflection_gain_nm_per_v: 2.0,
                capacitance_f: 1e-12,
                loss_factor: 6.4e-4,
                leak_resistance_ohm: 3.6e12,
                voltage_bound_v: 100.0,
                sites: sites_a,
            },
            ActuatorModel {
                id: "b".into(),
                dc_deflection_gain_nm_per_v: 2.0,
                capacitance_f: 1e-12,
                loss_factor: 6.4e-4,
                leak_resistance_ohm: 3.6e12,
                voltage_bound_v: 100.0,
                sites: sites_b,
            },
        ];

        DeviceConfig {
            version: CONFIG_VERSION,
            settings: GlobalSettings {
                modulation_index_convention: ModulationConvention::AsPrinted,
                prestrain_interpretation: PrestrainInterpretation::EgMagnitude,
                poisson_ratio: 0.0,
                default_seed: 7,
                stray_light_fraction: 1e-3,
                detector_dead_time_ns: 50.0,
            },
            snv_defaults: defaults,
            emitters,
            actuators,
            network: switch_4x1_network(),
            zpf_reference: ZpfReference {
                // g_orb maxima over the beam cross-section: 8 kHz (axial)
                // and 10 kHz (transverse)
                axial_max_voigt: [4e-12, -4e-12, 0.0, 0.0, 0.0, 0.0],
                transverse_max_voigt: [0.0, 0.0, 0.0, 0.0, 0.0, -5e-12],
            },
            scenarios: ScenarioSettings {
                dc_tuning: DcTuningSettings {
                    emitters: vec!["snv1".into(), "snv2".into(), "snv3".into()],
                    v_min: -60.0,
                    v_max: 60.0,
                    steps: 13,
                },
                ac_broadening: AcBroadeningSettings {
                    emitter: "snv2".into(),
                    omega_d_mhz: 1.0,
                    v_ac_list: vec![0.5, 1.5, 2.5],
                    grid_span_ghz: 26.0,
                    grid_points: 4001,
                },
                resonance_enhancement: ResonanceEnhancementSettings {
                    emitter: "snv2".into(),
                    v_ac: 0.25,
                    on_resonance_mhz: 10.0,
                    off_resonance_mhz: 1.0,
                    sweep_start_mhz: 9.8,
                    sweep_stop_mhz: 10.4,
                    sweep_points: 61,
                },
                sideband_comb: SidebandCombSettings {
                    emitter: "cc4".into(),
                    omega_d_mhz: 1000.0,
                    v_ac_list: vec![0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.05, 1.2],
                    grid_span_ghz: 9.0,
                    grid_points: 3601,
                },
                phonon_number: PhononNumberSettings {
                    emitter: "cc4".into(),
                    omega_d_mhz: 1000.0,
                    v_ac: 0.5,
                },
                spin_odmr: SpinOdmrSettings {
                    emitter: "snv2".into(),
                    b_transverse_t: 0.022,
                    pulse_duration_ns: 150.0,
                    // Ω·t ≈ 0.6 at the calibrated g_sm: power-broadened but
                    // still single-lobed
                    pulse_phonon_number: 4980.0,
                    sweep_start_mhz: 350.0,
                    sweep_stop_mhz: 1050.0,
                    sweep_step_mhz: 2.0,
                    init_fidelity: 0.9,
                    readout_contrast: 1000.0,
                },
                gsm_sweep: GsmSweepSettings {
                    emitter: "snv2".into(),
                    b_min_t: 0.01,
                    b_max_t: 2.0,
                    steps: 100,
                },
                power_budget: PowerBudgetSettings {
                    actuator: "b".into(),
                    v_ac_resonant: 0.25,
                    resonant_mhz: 10.0,
                    v_ac_fast: 0.5,
                    fast_mhz: 2500.0,
                    v_hold: 60.0,
                },
                route_and_switch: RouteAndSwitchSettings {
                    drive_emitter: "cc4".into(),
                    omega_d_mhz: 1000.0,
                    v_ac_list: vec![0.75, 1.2],
                    grid_span_ghz: 7.0,
                    grid_points: 2801,
                },
                g2: G2Settings {
                    emitters: vec!["cc2".into(), "cc3".into()],
                    duration_s: 6.0,
                    bin_width_ns: 2.0,
                    tau_range_ns: 250.0,
                },
            },
        }
    }
}

/// The 4×1 multiplexing switch: two dCPS-MZIs (channel pairs 1/2 and 3/4)
/// feeding one final cps-MZI whose outputs go to detectors 2 and 3.
pub fn switch_4x1_network() -> NetworkSpec {
    let c = |name: &str| ElementSpec::Coupler {
        name: name.into(),
        ratio: 0.5,
    };
    let s = |name: &str| ElementSpec::Shifter { name: name.into() };
    let mut edges = chain_edges(&["cA1", "thetaA", "cA2", "cA3", "phiA", "cA4"]);
    edges.extend(chain_edges(&["cB1", "thetaB", "cB2", "cB3", "phiB", "cB4"]));
    edges.extend(chain_edges(&["cF1", "thetaF", "cF2"]));
    edges.push(("cA4.out1".into(), "cF1.in0".into()));
    edges.push(("cB4.out0".into(), "cF1.in1".into()));
    NetworkSpec {
        elements: vec![
            c("cA1"),
            s("thetaA"),
            c("cA2"),
            c("cA3"),
            s("phiA"),
            c("cA4"),
            c("cB1"),
            s("thetaB"),
            c("cB2"),
            c("cB3"),
            s("phiB"),
            c("cB4"),
            c("cF1"),
            s("thetaF"),
            c("cF2"),
        ],
        edges,
        inputs: vec![
            ("ch1".into(), "cA1.in0".into()),
            ("ch2".into(), "cA1.in1".into()),
            ("ch3".into(), "cB1.in0".into()),
            ("ch4".into(), "cB1.in1".into()),
        ],
        outputs: vec![
            ("dropA".into(), "cA4.out0".into()),
            ("out2".into(), "cF2.out0".into()),
            ("out3".into(), "cF2.out1".into()),
            ("dropB".into(), "cB4.out1".into()),
        ],
        designated_outputs: vec!["out2".into(), "out3".into()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Frame;
    use crate::hamiltonian::{g_orb, g_sm};
    use nalgebra::Vector3;

    #[test]
    fn default_fixture_is_valid_and_round_trips() {
        let config = DeviceConfig::default();
        assert!(config.validate().is_empty());
        let json = config.to_json_string();
        let back = DeviceConfig::from_json_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn version_mismatch_is_detected() {
        let mut value: serde_json::Value =
            serde_json::from_str(&DeviceConfig::default().to_json_string()).unwrap();
        value["version"] = serde_json::json!(99);
        assert!(matches!(
            DeviceConfig::from_value(value),
            Err(ConfigError::Version { found: 99, .. })
        ));
    }

    #[test]
    fn missing_actuator_is_reported_with_path() {
        let mut config = DeviceConfig::default();
        config.emitters[0].actuator = "ghost".into();
        config.emitters[2].site = "nowhere".into();
        let violations = config.validate();
        // both violations collected, not first-failure
        assert_eq!(violations.len(), 2);
        assert_eq!(violations[0].path, "/emitters/0/actuator");
        assert!(violations[0].message.contains("ghost"));
        assert_eq!(violations[1].path, "/emitters/2/site");
    }

    #[test]
    fn bad_voigt_length_is_reported_at_the_tensor_path() {
        let mut value: serde_json::Value =
            serde_json::from_str(&DeviceConfig::default().to_json_string()).unwrap();
        value["emitters"][0]["zpf_strain_voigt"] =
            serde_json::json!([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        match DeviceConfig::from_value(value) {
            Err(ConfigError::Schema(v)) => {
                assert!(
                    v[0].path.contains("emitters/0/zpf_strain_voigt"),
                    "path was {}",
                    v[0].path
                );
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let mut value: serde_json::Value =
            serde_json::from_str(&DeviceConfig::default().to_json_string()).unwrap();
        apply_override(&mut value, "settings.default_seed", "99").unwrap();
        apply_override(&mut value, "emitters.0.depth_nm", "80.5").unwrap();
        let config = DeviceConfig::from_value(value).unwrap();
        assert_eq!(config.settings.default_seed, 99);
        assert_eq!(config.emitters[0].depth_nm, 80.5);

        let mut v2: serde_json::Value =
            serde_json::from_str(&DeviceConfig::default().to_json_string()).unwrap();
        assert!(apply_override(&mut v2, "settings.nope", "1").is_err());
    }

    #[test]
    fn fixture_g_orb_anchors() {
        let config = DeviceConfig::default();
        // ~2 kHz at the snv1 location
        let snv1 = config.emitter("snv1").unwrap();
        let g1 = g_orb(
            &config.resolved_params(snv1),
            &config.zpf_tensor(snv1).unwrap(),
        )
        .unwrap();
        assert!((g1 - 2e3).abs() < 1.0, "snv1 g_orb {g1}");

        // class maxima: ~8 kHz axial, ~10 kHz transverse
        let p = config.snv_defaults.clone();
        let ax = g_orb(
            &p,
            &StrainTensor::from_voigt(config.zpf_reference.axial_max_voigt, Frame::SnvAxial),
        )
        .unwrap();
        let tr = g_orb(
            &p,
            &StrainTensor::from_voigt(
                config.zpf_reference.transverse_max_voigt,
                Frame::SnvTransverse,
            ),
        )
        .unwrap();
        assert!((ax - 8e3).abs() < 10.0, "axial max {ax}");
        assert!((tr - 10e3).abs() < 10.0, "transverse max {tr}");
    }

    #[test]
    fn fixture_spin_anchors() {
        let config = DeviceConfig::default();
        let snv2 = config.emitter("snv2").unwrap();
        let params = config.resolved_params(snv2);
        assert_eq!(params.prestrain_magnitude_ghz(), 865.0);
        let zpf = config.zpf_tensor(snv2).unwrap();
        let g = g_sm(&params, &zpf, Vector3::new(0.022, 0.0, 0.0)).unwrap();
        assert!(g > 256.0 && g < 768.0, "g_sm {g}");
    }

    #[test]
    fn prestrain_interpretation_flag() {
        let mut config = DeviceConfig::default();
        config.settings.prestrain_interpretation = PrestrainInterpretation::OrbitalSplitting;
        let snv2 = config.emitter("snv2").unwrap();
        let p = config.resolved_params(snv2);
        // 865 GHz total splitting with λ_g = 850 GHz leaves a small E_g part
        let expect = ((865.0f64 * 865.0 - 850.0 * 850.0).sqrt()) / 2.0;
        assert!((p.prestrain_egy_ghz - expect).abs() < 1e-9);
        assert_eq!(p.prestrain_egx_ghz, 0.0);
    }

    #[test]
    fn fixture_network_composes_and_conserves_energy() {
        let config = DeviceConfig::default();
        let net = compose_network(&config.network).unwrap();
        let t = net.transfer().unwrap();
        let g = t.adjoint() * &t;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g[(i, j)].norm() - want).abs() < 1e-10,
                    "gram[{i}{j}] = {}",
                    g[(i, j)]
                );
            }
        }
    }

    #[test]
    fn fixture_network_routes_and_splits_analytically() {
        // θ_A = φ_A = 0 sends ch2 through the first dCPS; θ_F = π puts the
        // final MZI in the bar state toward out2
        let config = DeviceConfig::default();
        let mut net = compose_network(&config.network).unwrap();
        net.set_phase("thetaF", std::f64::consts::PI);
        let f = net.power_fractions("ch2").unwrap();
        assert_eq!(f[0].0, "out2");
        assert!((f[0].1 - 1.0).abs() < 1e-12, "insertion {}", 1.0 - f[0].1);
        assert!(f[1].1 < 1e-12);

        // beamsplitter mode: θ_F = π/2 splits the routed channel equally
        net.set_phase("thetaF", std::f64::consts::FRAC_PI_2);
        let f = net.power_fractions("ch2").unwrap();
        assert!((f[0].1 - 0.5).abs() < 1e-10);
        assert!((f[1].1 - 0.5).abs() < 1e-10);

        // passivity for arbitrary settings
        let mut s = crate::rng::Stream::new(17, 0);
        for _ in 0..20 {
            for name in net.phase_names() {
                net.set_phase(&name, s.uniform(0.0, std::f64::consts::TAU));
            }
            for ch in ["ch1", "ch2", "ch3", "ch4"] {
                let total: f64 = net
                    .power_fractions(ch)
                    .unwrap()
                    .iter()
                    .map(|(_, p)| p)
                    .sum();
                assert!(total <= 1.0 + 1e-12);
            }
        }
    }
}

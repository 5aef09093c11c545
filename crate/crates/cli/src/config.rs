//! TOML scenario files.
//!
//! Only `name` is required. Every other key is optional and falls back to
//! the bundled default experiment (`scenarios/default.toml`). A
//! `[[modes]]` list, when present, replaces the default modes entirely.
//!
//! ```toml
//! name = "my-device"
//! seed = 7
//! sample_rate_hz = 4e6
//!
//! [cavity]
//! lifetime_s = 233e-9
//!
//! [[modes]]
//! frequency_hz = 69.8e3
//! quality = 50.0
//! effective_mass_kg = 1e-3
//! transduction_hz_per_m = 5e13
//! static_response_hz_per_t = 4.2e5   # or actuation_n_per_t
//!
//! [drive]
//! kind = "tones"
//! tones = [{ amplitude_rms_t = 7.8e-6, frequency_hz = 200e3 }]
//! ```
//!
//! Units are SI and appear as key suffixes. See the README for the full
//! key list.

use std::path::Path;

use optomag::model::{
    BackgroundResponse, CalibrationTargets, CavityParams, DriveProgram, DynamicRangeSettings, MechanicalMode,
    NoiseParams, PdhSettings, PidSettings, RingdownSettings, Scenario, SweepSettings, Tone, log_spaced,
};
use optomag::Error;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// The default experiment shipped with the tool.
pub const BUNDLED_DEFAULT: &str = include_str!("../scenarios/default.toml");
pub const BUNDLED_DEFAULT_PATH: &str = "<bundled>/default.toml";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_ceiling_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<BackgroundFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdh: Option<PdhFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pid: Option<PidFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instruments: Option<InstrumentsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeFile>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeFile {
    pub frequency_hz: f64,
    pub quality: f64,
    pub effective_mass_kg: f64,
    pub transduction_hz_per_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuation_n_per_t: Option<f64>,
    /// Alternative to `actuation_n_per_t`: the mode's zero-frequency
    /// detuning response, Hz/T.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub static_response_hz_per_t: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_psd_amplitude: Option<f64>,
    /// Alternative to `phase_psd_amplitude`: place the phase/shot noise
    /// crossover at this frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_crossover_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electronic_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_hz_per_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriveFile {
    Off,
    Tones {
        tones: Vec<ToneFile>,
    },
    Chirp {
        amplitude_rms_t: f64,
        start_hz: f64,
        stop_hz: f64,
        sweep_time_s: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneFile {
    pub amplitude_rms_t: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdhFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation_hz: Option<f64>,
    /// Defaults to the depth that puts half the power in the sidebands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation_depth_rad: Option<f64>,
    /// Omit for the maximum-slope quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demodulation_phase_rad: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ki: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rbw_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_amplitude_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_smoothing_bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum_smoothing_bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ringdown: Option<RingdownFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic_range: Option<DynamicRangeFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_amplitude_t: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingdownFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shutter_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window_s: Option<[f64; 2]>,
}

/// Either an explicit `amplitudes_t` list or a log-spaced
/// `min_t`..`max_t` range with `points` entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicRangeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tone_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes_t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

/// Prefixes the field name of a domain error with its table path.
fn within(prefix: &str, e: Error) -> Error {
    match e {
        Error::Domain {
            field,
            value,
            requirement,
        } => Error::Domain {
            field: format!("{prefix}.{field}"),
            value,
            requirement,
        },
        other => other,
    }
}

impl ScenarioFile {
    /// Builds and validates the scenario, filling gaps from the default.
    pub fn resolve(&self) -> optomag::Result<Scenario> {
        let mut s = Scenario::default_device();
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.sample_rate_hz {
            s.sample_rate_hz = v;
        }
        if let Some(v) = self.duration_s {
            s.duration_s = v;
        }
        if let Some(v) = self.saturation_ceiling_t {
            s.saturation_ceiling_t = v;
        }
        if let Some(c) = &self.cavity {
            let cavity = CavityParams::new(
                c.wavelength_m.unwrap_or(s.cavity.wavelength_m()),
                c.lifetime_s.unwrap_or(s.cavity.lifetime_s()),
            )
            .and_then(|cav| cav.with_coupling_ratio(c.coupling_ratio.unwrap_or(s.cavity.coupling_ratio())))
            .map_err(|e| within("cavity", e))?;
            s.cavity = cavity;
        }
        if let Some(modes) = &self.modes {
            s.modes = modes
                .iter()
                .enumerate()
                .map(|(i, m)| m.resolve().map_err(|e| within(&format!("modes[{i}]"), e)))
                .collect::<optomag::Result<_>>()?;
        }
        if let Some(n) = &self.noise {
            let mut noise = NoiseParams {
                phase_psd_amplitude: n.phase_psd_amplitude.unwrap_or(s.noise.phase_psd_amplitude),
                phase_exponent: n.phase_exponent.unwrap_or(s.noise.phase_exponent),
                shot_floor: n.shot_floor.unwrap_or(s.noise.shot_floor),
                electronic_floor: n.electronic_floor.unwrap_or(s.noise.electronic_floor),
                temperature_k: n.temperature_k.unwrap_or(s.noise.temperature_k),
            };
            if let Some(f) = n.phase_crossover_hz {
                if n.phase_psd_amplitude.is_some() {
                    return Err(Error::Config(
                        "noise: give either phase_psd_amplitude or phase_crossover_hz, not both".into(),
                    ));
                }
                if !(f > 0.0) {
                    return Err(Error::Domain {
                        field: "noise.phase_crossover_hz".into(),
                        value: f,
                        requirement: "> 0".into(),
                    });
                }
                noise.phase_psd_amplitude = noise.phase_amplitude_for_crossover(f, s.cavity.half_linewidth_hz());
            }
            s.noise = noise;
        }
        if let Some(b) = &self.background {
            s.background = BackgroundResponse {
                gain_hz_per_t: b.gain_hz_per_t.unwrap_or(s.background.gain_hz_per_t),
                corner_hz: b.corner_hz.unwrap_or(s.background.corner_hz),
            };
        }
        if let Some(d) = &self.drive {
            s.drive = match d {
                DriveFile::Off => DriveProgram::Off,
                DriveFile::Tones { tones } => DriveProgram::Tones(
                    tones
                        .iter()
                        .map(|t| Tone {
                            amplitude_rms_t: t.amplitude_rms_t,
                            frequency_hz: t.frequency_hz,
                            phase_rad: t.phase_rad,
                        })
                        .collect(),
                ),
                DriveFile::Chirp {
                    amplitude_rms_t,
                    start_hz,
                    stop_hz,
                    sweep_time_s,
                } => DriveProgram::Chirp {
                    amplitude_rms_t: *amplitude_rms_t,
                    start_hz: *start_hz,
                    stop_hz: *stop_hz,
                    sweep_time_s: *sweep_time_s,
                },
            };
        }
        if let Some(p) = &self.pdh {
            let modulation_hz = p.modulation_hz.unwrap_or(s.pdh.modulation_hz);
            let mut pdh = PdhSettings::half_power(modulation_hz);
            if let Some(depth) = p.modulation_depth_rad {
                pdh.modulation_depth_rad = depth;
            }
            pdh.demodulation_phase_rad = p.demodulation_phase_rad;
            s.pdh = pdh;
        }
        if let Some(p) = &self.pid {
            s.pid = PidSettings {
                kp: p.kp.unwrap_or(s.pid.kp),
                ki: p.ki.unwrap_or(s.pid.ki),
                kd: p.kd.unwrap_or(s.pid.kd),
            };
        }
        if let Some(t) = &self.targets {
            s.targets = CalibrationTargets {
                snr_db: t.snr_db.unwrap_or(s.targets.snr_db),
                crossover_hz: t.crossover_hz.unwrap_or(s.targets.crossover_hz),
            };
        }
        if let Some(i) = &self.instruments {
            i.apply(&mut s)?;
        }
        s.validate()?;
        Ok(s)
    }

    /// File describing `scenario` exactly: every value is written in
    /// shortest round-trip form, so resolving it restores the scenario
    /// bit for bit.
    pub fn from_scenario(name: &str, s: &Scenario) -> Self {
        let inst = &s.instruments;
        Self {
            name: name.into(),
            seed: Some(s.seed),
            sample_rate_hz: Some(s.sample_rate_hz),
            duration_s: Some(s.duration_s),
            saturation_ceiling_t: Some(s.saturation_ceiling_t),
            cavity: Some(CavityFile {
                wavelength_m: Some(s.cavity.wavelength_m()),
                lifetime_s: Some(s.cavity.lifetime_s()),
                coupling_ratio: Some(s.cavity.coupling_ratio()),
            }),
            noise: Some(NoiseFile {
                phase_psd_amplitude: Some(s.noise.phase_psd_amplitude),
                phase_crossover_hz: None,
                phase_exponent: Some(s.noise.phase_exponent),
                shot_floor: Some(s.noise.shot_floor),
                electronic_floor: Some(s.noise.electronic_floor),
                temperature_k: Some(s.noise.temperature_k),
            }),
            background: Some(BackgroundFile {
                gain_hz_per_t: Some(s.background.gain_hz_per_t),
                corner_hz: Some(s.background.corner_hz),
            }),
            drive: Some(match &s.drive {
                DriveProgram::Off => DriveFile::Off,
                DriveProgram::Tones(tones) => DriveFile::Tones {
                    tones: tones
                        .iter()
                        .map(|t| ToneFile {
                            amplitude_rms_t: t.amplitude_rms_t,
                            frequency_hz: t.frequency_hz,
                            phase_rad: t.phase_rad,
                        })
                        .collect(),
                },
                DriveProgram::Chirp {
                    amplitude_rms_t,
                    start_hz,
                    stop_hz,
                    sweep_time_s,
                } => DriveFile::Chirp {
                    amplitude_rms_t: *amplitude_rms_t,
                    start_hz: *start_hz,
                    stop_hz: *stop_hz,
                    sweep_time_s: *sweep_time_s,
                },
            }),
            pdh: Some(PdhFile {
                modulation_hz: Some(s.pdh.modulation_hz),
                modulation_depth_rad: Some(s.pdh.modulation_depth_rad),
                demodulation_phase_rad: s.pdh.demodulation_phase_rad,
            }),
            pid: Some(PidFile {
                kp: Some(s.pid.kp),
                ki: Some(s.pid.ki),
                kd: Some(s.pid.kd),
            }),
            targets: Some(TargetsFile {
                snr_db: Some(s.targets.snr_db),
                crossover_hz: Some(s.targets.crossover_hz),
            }),
            instruments: Some(InstrumentsFile {
                rbw_hz: Some(inst.rbw_hz),
                averages: Some(inst.averages),
                reference_amplitude_t: Some(inst.reference_amplitude_t),
                reference_frequency_hz: Some(inst.reference_frequency_hz),
                noise_smoothing_bins: Some(inst.noise_smoothing_bins),
                minimum_smoothing_bins: Some(inst.minimum_smoothing_bins),
                sweep: Some(SweepFile {
                    start_hz: Some(inst.sweep.start_hz),
                    stop_hz: Some(inst.sweep.stop_hz),
                    points: Some(inst.sweep.points),
                    drive_amplitude_t: Some(inst.sweep.drive_amplitude_t),
                }),
                ringdown: Some(RingdownFile {
                    shutter_time_s: Some(inst.ringdown.shutter_time_s),
                    noise_level: Some(inst.ringdown.noise_level),
                    sample_interval_s: Some(inst.ringdown.sample_interval_s),
                    duration_s: Some(inst.ringdown.duration_s),
                    fit_window_s: Some([inst.ringdown.fit_window_s.0, inst.ringdown.fit_window_s.1]),
                }),
                dynamic_range: Some(DynamicRangeFile {
                    tone_hz: Some(inst.dynamic_range.tone_hz),
                    amplitudes_t: Some(inst.dynamic_range.amplitudes_t.clone()),
                    min_t: None,
                    max_t: None,
                    points: None,
                }),
            }),
            modes: Some(
                s.modes
                    .iter()
                    .map(|m| ModeFile {
                        frequency_hz: m.frequency_hz(),
                        quality: m.quality(),
                        effective_mass_kg: m.effective_mass_kg(),
                        transduction_hz_per_m: m.transduction_hz_per_m(),
                        actuation_n_per_t: Some(m.actuation_n_per_t()),
                        static_response_hz_per_t: None,
                    })
                    .collect(),
            ),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }
}

impl ModeFile {
    fn resolve(&self) -> optomag::Result<MechanicalMode> {
        match (self.actuation_n_per_t, self.static_response_hz_per_t) {
            (Some(c), None) => MechanicalMode::new(
                self.frequency_hz,
                self.quality,
                self.effective_mass_kg,
                c,
                self.transduction_hz_per_m,
            ),
            (None, Some(r)) => MechanicalMode::with_static_response(
                self.frequency_hz,
                self.quality,
                self.effective_mass_kg,
                self.transduction_hz_per_m,
                r,
            ),
            _ => Err(Error::Config(
                "each mode needs exactly one of actuation_n_per_t and static_response_hz_per_t".into(),
            )),
        }
    }
}

impl InstrumentsFile {
    fn apply(&self, s: &mut Scenario) -> optomag::Result<()> {
        let inst = &mut s.instruments;
        if let Some(v) = self.rbw_hz {
            inst.rbw_hz = v;
        }
        if let Some(v) = self.averages {
            inst.averages = v;
        }
        if let Some(v) = self.reference_amplitude_t {
            inst.reference_amplitude_t = v;
        }
        if let Some(v) = self.reference_frequency_hz {
            inst.reference_frequency_hz = v;
        }
        if let Some(v) = self.noise_smoothing_bins {
            inst.noise_smoothing_bins = v;
        }
        if let Some(v) = self.minimum_smoothing_bins {
            inst.minimum_smoothing_bins = v;
        }
        if let Some(w) = &self.sweep {
            inst.sweep = SweepSettings {
                start_hz: w.start_hz.unwrap_or(inst.sweep.start_hz),
                stop_hz: w.stop_hz.unwrap_or(inst.sweep.stop_hz),
                points: w.points.unwrap_or(inst.sweep.points),
                drive_amplitude_t: w.drive_amplitude_t.unwrap_or(inst.sweep.drive_amplitude_t),
            };
        }
        if let Some(r) = &self.ringdown {
            inst.ringdown = RingdownSettings {
                shutter_time_s: r.shutter_time_s.unwrap_or(inst.ringdown.shutter_time_s),
                noise_level: r.noise_level.unwrap_or(inst.ringdown.noise_level),
                sample_interval_s: r.sample_interval_s.unwrap_or(inst.ringdown.sample_interval_s),
                duration_s: r.duration_s.unwrap_or(inst.ringdown.duration_s),
                fit_window_s: r.fit_window_s.map_or(inst.ringdown.fit_window_s, |[a, b]| (a, b)),
            };
        }
        if let Some(d) = &self.dynamic_range {
            let range = (d.min_t, d.max_t, d.points);
            let amplitudes_t = match (&d.amplitudes_t, range) {
                (Some(list), (None, None, None)) => list.clone(),
                (None, (Some(lo), Some(hi), Some(n))) => {
                    if !(lo > 0.0 && hi > lo) {
                        return Err(Error::Config(format!(
                            "instruments.dynamic_range: need 0 < min_t < max_t, got {lo} and {hi}"
                        )));
                    }
                    log_spaced(lo, hi, n)
                }
                (None, (None, None, None)) => inst.dynamic_range.amplitudes_t.clone(),
                _ => {
                    return Err(Error::Config(
                        "instruments.dynamic_range: give either amplitudes_t or all of min_t, max_t, points".into(),
                    ))
                }
            };
            inst.dynamic_range = DynamicRangeSettings {
                amplitudes_t,
                tone_hz: d.tone_hz.unwrap_or(inst.dynamic_range.tone_hz),
            };
        }
        Ok(())
    }
}

/// Parses and validates scenario text. `path` only labels errors.
pub fn parse_scenario(text: &str, path: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Parse {
        path: path.into(),
        message: e.to_string(),
    })?;
    file.resolve().map_err(|source| CliError::Invalid {
        path: path.into(),
        source,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

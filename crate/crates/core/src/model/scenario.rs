use num_complex::Complex64;

use super::{CavityParams, MechanicalMode, NoiseParams, TWO_PI};
use crate::dynamics::pdh::half_power_modulation_depth;
use crate::error::{require_non_negative, require_positive, Error, Result};

/// Phase-modulation and demodulation settings of the PDH readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdhSettings {
    pub modulation_hz: f64,
    /// Phase modulation index, rad.
    pub modulation_depth_rad: f64,
    /// Mixer phase. `None` selects the quadrature with maximum slope at
    /// zero detuning.
    pub demodulation_phase_rad: Option<f64>,
}

impl PdhSettings {
    /// Modulation depth that moves half of the optical power into sidebands.
    pub fn half_power(modulation_hz: f64) -> Self {
        Self {
            modulation_hz,
            modulation_depth_rad: half_power_modulation_depth(),
            demodulation_phase_rad: None,
        }
    }
}

/// Lock-loop controller gains. The loop plant is the normalized error
/// signal (unit slope), so `ki` alone sets the unity-gain frequency
/// `ki / 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidSettings {
    pub kp: f64,
    /// 1/s
    pub ki: f64,
    /// s
    pub kd: f64,
}

impl PidSettings {
    pub fn integral_with_bandwidth(bandwidth_hz: f64) -> Self {
        Self {
            kp: 0.0,
            ki: TWO_PI * bandwidth_hz,
            kd: 0.0,
        }
    }

    pub fn disabled() -> Self {
        Self { kp: 0.0, ki: 0.0, kd: 0.0 }
    }

    /// Unity-gain frequency of the open loop `kp + ki/s + kd s`, Hz.
    pub fn unity_gain_bandwidth_hz(&self) -> f64 {
        // |kp + i(kd w - ki/w)| = 1, solved by bisection on a log grid.
        let gain = |w: f64| (self.kp * self.kp + (self.kd * w - self.ki / w).powi(2)).sqrt();
        let (mut lo, mut hi) = (1e-3_f64, 1e12_f64);
        if gain(lo) < 1.0 {
            return 0.0;
        }
        if gain(hi) > 1.0 {
            return f64::INFINITY;
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if gain(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo / TWO_PI
    }
}

/// Broadband (non-resonant) magnetostrictive response of the device,
/// `gain / (1 + i f / corner)` in Hz of detuning per tesla.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundResponse {
    pub gain_hz_per_t: f64,
    /// Low-pass corner; `f64::INFINITY` gives a flat response.
    pub corner_hz: f64,
}

impl BackgroundResponse {
    pub fn none() -> Self {
        Self {
            gain_hz_per_t: 0.0,
            corner_hz: f64::INFINITY,
        }
    }

    pub fn response(&self, frequency_hz: f64) -> Complex64 {
        Complex64::new(self.gain_hz_per_t, 0.0) / Complex64::new(1.0, frequency_hz / self.corner_hz)
    }

    pub fn is_zero(&self) -> bool {
        self.gain_hz_per_t == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub amplitude_rms_t: f64,
    pub frequency_hz: f64,
    pub phase_rad: f64,
}

impl Tone {
    pub fn new(amplitude_rms_t: f64, frequency_hz: f64) -> Self {
        Self {
            amplitude_rms_t,
            frequency_hz,
            phase_rad: 0.0,
        }
    }

    fn field(&self, t: f64) -> f64 {
        std::f64::consts::SQRT_2 * self.amplitude_rms_t * (TWO_PI * self.frequency_hz * t + self.phase_rad).sin()
    }
}

/// Applied signal field `B(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DriveProgram {
    #[default]
    Off,
    Tones(Vec<Tone>),
    /// Linear frequency sweep from `start_hz` to `stop_hz` over `sweep_time_s`.
    Chirp {
        amplitude_rms_t: f64,
        start_hz: f64,
        stop_hz: f64,
        sweep_time_s: f64,
    },
}

impl DriveProgram {
    pub fn tone(amplitude_rms_t: f64, frequency_hz: f64) -> Self {
        DriveProgram::Tones(vec![Tone::new(amplitude_rms_t, frequency_hz)])
    }

    /// Field at time `t`, T.
    pub fn field(&self, t: f64) -> f64 {
        match self {
            DriveProgram::Off => 0.0,
            DriveProgram::Tones(tones) => tones.iter().map(|tone| tone.field(t)).sum(),
            DriveProgram::Chirp {
                amplitude_rms_t,
                start_hz,
                stop_hz,
                sweep_time_s,
            } => {
                let rate = (stop_hz - start_hz) / sweep_time_s;
                let phase = TWO_PI * (start_hz * t + 0.5 * rate * t * t);
                std::f64::consts::SQRT_2 * amplitude_rms_t * phase.sin()
            }
        }
    }

    /// Worst-case RMS amplitude (tone amplitudes add linearly), T.
    pub fn rms_amplitude(&self) -> f64 {
        match self {
            DriveProgram::Off => 0.0,
            DriveProgram::Tones(tones) => tones.iter().map(|t| t.amplitude_rms_t.abs()).sum(),
            DriveProgram::Chirp { amplitude_rms_t, .. } => amplitude_rms_t.abs(),
        }
    }

    pub fn highest_frequency(&self) -> f64 {
        match self {
            DriveProgram::Off => 0.0,
            DriveProgram::Tones(tones) => tones.iter().map(|t| t.frequency_hz).fold(0.0, f64::max),
            DriveProgram::Chirp { start_hz, stop_hz, .. } => start_hz.max(*stop_hz),
        }
    }

    pub fn is_off(&self) -> bool {
        match self {
            DriveProgram::Off => true,
            DriveProgram::Tones(tones) => tones.iter().all(|t| t.amplitude_rms_t == 0.0),
            DriveProgram::Chirp { amplitude_rms_t, .. } => *amplitude_rms_t == 0.0,
        }
    }
}

/// Network-analyzer sweep: `points` linearly spaced frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
    pub drive_amplitude_t: f64,
}

impl SweepSettings {
    pub fn frequencies(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start_hz],
            n => (0..n)
                .map(|i| self.start_hz + (self.stop_hz - self.start_hz) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingdownSettings {
    pub shutter_time_s: f64,
    /// Additive Gaussian noise, relative to the pre-shutter intensity.
    pub noise_level: f64,
    pub sample_interval_s: f64,
    pub duration_s: f64,
    pub fit_window_s: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicRangeSettings {
    pub amplitudes_t: Vec<f64>,
    pub tone_hz: f64,
}

/// Values the `calibrate` procedure reproduces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTargets {
    pub snr_db: f64,
    pub crossover_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentSettings {
    pub rbw_hz: f64,
    pub averages: usize,
    pub reference_amplitude_t: f64,
    pub reference_frequency_hz: f64,
    /// Half-width (bins) of the running mean applied to the noise
    /// spectrum before it enters the sensitivity transfer. 0 disables it.
    pub noise_smoothing_bins: usize,
    /// Half-width (bins) of the running geometric mean used when locating
    /// the minimum of the sensitivity spectrum.
    pub minimum_smoothing_bins: usize,
    pub sweep: SweepSettings,
    pub ringdown: RingdownSettings,
    pub dynamic_range: DynamicRangeSettings,
}

/// Complete description of one virtual experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cavity: CavityParams,
    pub modes: Vec<MechanicalMode>,
    pub noise: NoiseParams,
    pub background: BackgroundResponse,
    pub drive: DriveProgram,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub pdh: PdhSettings,
    pub pid: PidSettings,
    /// RMS drive amplitude above which the linear actuation model is
    /// flagged as unreliable.
    pub saturation_ceiling_t: f64,
    pub instruments: InstrumentSettings,
    pub targets: CalibrationTargets,
}

/// Eigenfrequencies of the fundamental radial breathing, crown and
/// second-order radial breathing modes, Hz.
pub const DEFAULT_MODE_FREQUENCIES_HZ: [f64; 3] = [69.8e3, 120.4e3, 131.9e3];

impl Scenario {
    /// The bundled default experiment.
    ///
    /// Device constants not available from measurement are chosen so that
    /// the simulated chain reproduces the reported observables: modal Q and
    /// signed coupling weights shape the response (Fano feature at the
    /// fundamental, broad optimum between the crown and second radial
    /// breathing mode), and the actuation gain and phase-noise amplitude
    /// come out of the calibration routine.
    pub fn default_device() -> Self {
        let cavity = CavityParams::new(1550e-9, 233e-9).expect("valid cavity");
        let gain = DEFAULT_ACTUATION_GAIN_HZ_PER_T;
        let mass = 1e-3;
        let transduction = 5e13;
        let modes = [(50.0, 0.003), (17.5, -0.22), (8.5, 0.404)]
            .iter()
            .zip(DEFAULT_MODE_FREQUENCIES_HZ)
            .map(|(&(q, weight), f)| {
                MechanicalMode::with_static_response(f, q, mass, transduction, weight * gain).expect("valid mode")
            })
            .collect();
        let mut noise = NoiseParams {
            phase_psd_amplitude: 0.0,
            phase_exponent: 1.0,
            shot_floor: 1e-3,
            electronic_floor: 1e-4,
            temperature_k: 300.0,
        };
        let targets = CalibrationTargets {
            snr_db: 49.7,
            crossover_hz: 540e3,
        };
        noise.phase_psd_amplitude = noise.phase_amplitude_for_crossover(targets.crossover_hz, cavity.half_linewidth_hz());
        Self {
            cavity,
            modes,
            noise,
            background: BackgroundResponse {
                gain_hz_per_t: 0.585 * gain,
                corner_hz: 149e3,
            },
            drive: DriveProgram::Off,
            sample_rate_hz: 4e6,
            duration_s: 10e-3,
            seed: 20_161_127,
            pdh: PdhSettings::half_power(13.6e6),
            pid: PidSettings::integral_with_bandwidth(1e3),
            saturation_ceiling_t: 100e-6,
            instruments: InstrumentSettings {
                rbw_hz: 330.0,
                averages: 1000,
                reference_amplitude_t: 7.8e-6,
                reference_frequency_hz: 200e3,
                noise_smoothing_bins: 4,
                minimum_smoothing_bins: 9,
                sweep: SweepSettings {
                    start_hz: 2e3,
                    stop_hz: 600e3,
                    points: 599,
                    drive_amplitude_t: 7.8e-6,
                },
                ringdown: RingdownSettings {
                    shutter_time_s: 175e-9,
                    noise_level: 0.02,
                    sample_interval_s: 0.1e-9,
                    duration_s: 1.5e-6,
                    fit_window_s: (221e-9, 454e-9),
                },
                dynamic_range: DynamicRangeSettings {
                    amplitudes_t: log_spaced(0.1e-6, 72e-6, 12),
                    tone_hz: 200e3,
                },
            },
            targets,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sample_rate_hz", self.sample_rate_hz)?;
        require_positive("duration_s", self.duration_s)?;
        self.noise.validate()?;
        let top = self.highest_mode_frequency();
        if self.sample_rate_hz < 20.0 * top {
            return Err(Error::domain(
                "sample_rate_hz",
                self.sample_rate_hz,
                format!(">= 20 x highest mode frequency = {} Hz", 20.0 * top),
            ));
        }
        if self.num_samples() < 2 {
            return Err(Error::domain(
                "duration_s",
                self.duration_s,
                format!(">= 2 / sample_rate_hz = {} s", 2.0 / self.sample_rate_hz),
            ));
        }
        let nyquist = 0.5 * self.sample_rate_hz;
        if self.drive.highest_frequency() >= nyquist {
            return Err(Error::domain(
                "drive frequency",
                self.drive.highest_frequency(),
                format!("< sample_rate_hz / 2 = {nyquist} Hz"),
            ));
        }
        require_positive("pdh.modulation_hz", self.pdh.modulation_hz)?;
        if !(self.pdh.modulation_depth_rad > 0.0 && self.pdh.modulation_depth_rad <= 5.0) {
            return Err(Error::domain("pdh.modulation_depth_rad", self.pdh.modulation_depth_rad, "in (0, 5]"));
        }
        for (field, v) in [("pid.kp", self.pid.kp), ("pid.ki", self.pid.ki), ("pid.kd", self.pid.kd)] {
            if !v.is_finite() {
                return Err(Error::domain(field, v, "finite"));
            }
        }
        require_positive("saturation_ceiling_t", self.saturation_ceiling_t)?;
        if !self.background.gain_hz_per_t.is_finite() {
            return Err(Error::domain("background.gain_hz_per_t", self.background.gain_hz_per_t, "finite"));
        }
        if !(self.background.corner_hz > 0.0) {
            return Err(Error::domain("background.corner_hz", self.background.corner_hz, "> 0"));
        }
        let inst = &self.instruments;
        require_positive("instruments.rbw_hz", inst.rbw_hz)?;
        if inst.averages == 0 {
            return Err(Error::domain("instruments.averages", 0.0, ">= 1"));
        }
        require_positive("instruments.reference_amplitude_t", inst.reference_amplitude_t)?;
        require_positive("instruments.reference_frequency_hz", inst.reference_frequency_hz)?;
        require_positive("instruments.sweep.drive_amplitude_t", inst.sweep.drive_amplitude_t)?;
        require_non_negative("instruments.ringdown.noise_level", inst.ringdown.noise_level)?;
        require_positive("instruments.ringdown.sample_interval_s", inst.ringdown.sample_interval_s)?;
        Ok(())
    }

    pub fn highest_mode_frequency(&self) -> f64 {
        self.modes.iter().map(|m| m.frequency_hz()).fold(0.0, f64::max)
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn time_step(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn with_drive(&self, drive: DriveProgram) -> Self {
        Self {
            drive,
            ..self.clone()
        }
    }

    pub fn with_duration(&self, duration_s: f64) -> Self {
        Self {
            duration_s,
            ..self.clone()
        }
    }

    /// Same device with every stochastic source switched off.
    pub fn noiseless(&self) -> Self {
        Self {
            noise: NoiseParams {
                phase_exponent: self.noise.phase_exponent,
                ..NoiseParams::silent()
            },
            ..self.clone()
        }
    }

    /// Multiplies every actuation path (modes and background) by `factor`.
    pub fn scale_actuation(&mut self, factor: f64) {
        for mode in &mut self.modes {
            mode.scale_actuation(factor);
        }
        self.background.gain_hz_per_t *= factor;
    }

    /// Overall transduction gain reported with each run: the
    /// actuation-weighted mean of the modal `g`, Hz/m.
    pub fn transduction_gain_hz_per_m(&self) -> f64 {
        let weight: f64 = self.modes.iter().map(|m| m.actuation_n_per_t().abs()).sum();
        if weight == 0.0 {
            return self.modes.first().map_or(0.0, |m| m.transduction_hz_per_m());
        }
        self.modes
            .iter()
            .map(|m| m.actuation_n_per_t().abs() * m.transduction_hz_per_m())
            .sum::<f64>()
            / weight
    }
}

/// Overall actuation scale of the default scenario (static detuning per
/// tesla for unit modal weight), as produced by the calibration routine.
pub const DEFAULT_ACTUATION_GAIN_HZ_PER_T: f64 = 1.400_938_443_342_041_5e8;

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_is_valid() {
        let s = Scenario::default_device();
        s.validate().unwrap();
        let f: Vec<f64> = s.modes.iter().map(|m| m.frequency_hz()).collect();
        assert_eq!(f, DEFAULT_MODE_FREQUENCIES_HZ.to_vec());
        assert_eq!(s.instruments.reference_amplitude_t, 7.8e-6);
        assert_eq!(s.instruments.reference_frequency_hz, 200e3);
        assert_eq!(s.instruments.rbw_hz, 330.0);
        assert!(s.pdh.modulation_hz > 3.0 * s.cavity.linewidth_hz());
    }

    #[test]
    fn undersampled_scenario_is_rejected() {
        let mut s = Scenario::default_device();
        s.sample_rate_hz = 10.0 * s.highest_mode_frequency();
        match s.validate() {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "sample_rate_hz"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_short_run_is_rejected() {
        let mut s = Scenario::default_device();
        s.duration_s = 1.0 / s.sample_rate_hz;
        assert!(s.validate().is_err());
    }

    #[test]
    fn pid_bandwidth() {
        let p = PidSettings::integral_with_bandwidth(1e3);
        assert!((p.unity_gain_bandwidth_hz() - 1e3).abs() < 1e-6);
        assert_eq!(PidSettings::disabled().unity_gain_bandwidth_hz(), 0.0);
    }

    #[test]
    fn tone_rms_is_preserved() {
        let d = DriveProgram::tone(2.0, 1e3);
        let n = 100_000;
        let ms: f64 = (0..n).map(|i| d.field(i as f64 / n as f64).powi(2)).sum::<f64>() / n as f64;
        assert!((ms.sqrt() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn scaling_actuation_scales_static_response() {
        let mut s = Scenario::default_device();
        let before: Vec<f64> = s.modes.iter().map(|m| m.static_response_hz_per_t()).collect();
        let bg = s.background.gain_hz_per_t;
        s.scale_actuation(2.5);
        for (m, b) in s.modes.iter().zip(before) {
            assert!((m.static_response_hz_per_t() / b - 2.5).abs() < 1e-12);
        }
        assert!((s.background.gain_hz_per_t / bg - 2.5).abs() < 1e-12);
    }
}

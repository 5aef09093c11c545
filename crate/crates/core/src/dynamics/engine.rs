use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::noise::{colored_noise, thermal_force_psd, white_sample_std};
use super::pdh::PdhDiscriminator;
use super::pid::{check_loop_stability, Pid};
use crate::error::{Error, Result};
use crate::model::{MechanicalMode, Scenario, TWO_PI};
use crate::rng::stream_rng;

/// Random-stream source indices within one run.
const SOURCE_PHASE: u64 = 0;
const SOURCE_SHOT: u64 = 1;
const SOURCE_ELECTRONIC: u64 = 2;
const SOURCE_THERMAL_BASE: u64 = 3;

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
    pub channel: String,
}

impl TimeSeries {
    pub fn new(sample_rate_hz: f64, samples: Vec<f64>, channel: impl Into<String>) -> Self {
        Self {
            sample_rate_hz,
            samples,
            channel: channel.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate_hz
    }

    /// Copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub seed: u64,
    pub stream: u64,
    pub sample_rate_hz: f64,
    pub num_samples: usize,
    /// Actuation-weighted transduction gain, Hz/m.
    pub transduction_gain_hz_per_m: f64,
    pub discriminator_slope: f64,
    pub demodulation_phase_rad: f64,
    /// RMS of the in-loop residual detuning, Hz.
    pub lock_rms_hz: f64,
    pub lock_limit_hz: f64,
    pub saturation_warning: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Slope-normalized PDH error signal, Hz.
    pub error_signal: TimeSeries,
    pub metadata: RunMetadata,
}

/// Linearized magnetostrictive force on `mode` for applied field `field_t`, N.
pub fn magnetostrictive_force(field_t: f64, mode: &MechanicalMode) -> f64 {
    mode.actuation_n_per_t() * field_t
}

/// Instantaneous state of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub displacement_m: Vec<f64>,
    pub velocity_m_s: Vec<f64>,
    /// Laser-cavity detuning seen by the discriminator after feedback, Hz.
    pub residual_detuning_hz: f64,
    /// Output of the background response filter, Hz.
    pub background_hz: f64,
    /// Frequency correction applied to the laser, Hz.
    pub actuator_hz: f64,
    pub step: usize,
}

impl SimState {
    pub fn time_s(&self, sample_rate_hz: f64) -> f64 {
        self.step as f64 / sample_rate_hz
    }
}

#[derive(Debug, Clone)]
struct ModeStepper {
    decay: f64,
    stiffness: f64,
    inv_mass: f64,
    actuation: f64,
    transduction: f64,
    thermal_std: f64,
    rng: ChaCha8Rng,
}

/// Time-domain engine for one run.
///
/// Each mode advances with a semi-implicit update: the velocity decays by
/// the exact factor `a = exp(-Gamma dt)` and is kicked by force and spring,
/// then the displacement moves with the new velocity. The discrete
/// stiffness `(1 + a)(1 - cos(w dt)) / dt^2` places the driven resonance
/// exactly at the mode frequency, and the force input is rescaled so the
/// static compliance is exact. The mode sees the drive of the previous
/// sample and the background filter the mean of the previous and current
/// samples; both choices cancel the schemes' intrinsic phase advance so
/// that the modal and background paths stay in phase.
#[derive(Debug, Clone)]
pub struct Simulator {
    scenario: Scenario,
    dt: f64,
    modes: Vec<ModeStepper>,
    background_decay: f64,
    discriminator: PdhDiscriminator,
    pid: Pid,
    previous_field: f64,
    phase_noise: Vec<f64>,
    shot_std: f64,
    electronic_std: f64,
    shot_rng: ChaCha8Rng,
    electronic_rng: ChaCha8Rng,
    state: SimState,
}

impl Simulator {
    pub fn new(scenario: &Scenario, stream: u64) -> Result<Self> {
        scenario.validate()?;
        let fs = scenario.sample_rate_hz;
        let dt = 1.0 / fs;
        check_loop_stability(&scenario.pid, dt)?;
        let discriminator = PdhDiscriminator::new(&scenario.cavity, &scenario.pdh)?;
        let noise = scenario.noise;
        let modes = scenario
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let decay = (-m.damping_rate() * dt).exp();
                let w = m.angular_frequency();
                let stiffness = (1.0 + decay) * (1.0 - (w * dt).cos()) / (dt * dt);
                ModeStepper {
                    decay,
                    stiffness,
                    inv_mass: stiffness / (w * w * m.effective_mass_kg()),
                    actuation: m.actuation_n_per_t(),
                    transduction: m.transduction_hz_per_m(),
                    thermal_std: white_sample_std(thermal_force_psd(m, noise.temperature_k), fs),
                    rng: stream_rng(scenario.seed, stream, SOURCE_THERMAL_BASE + i as u64),
                }
            })
            .collect();
        let n = scenario.num_samples();
        let phase_noise = if noise.phase_psd_amplitude > 0.0 {
            let fc = scenario.cavity.half_linewidth_hz();
            let mut rng = stream_rng(scenario.seed, stream, SOURCE_PHASE);
            colored_noise(n, fs, |f| noise.phase_noise_detuning_psd(f, fc), &mut rng)
        } else {
            Vec::new()
        };
        let background_decay = if scenario.background.corner_hz.is_finite() {
            (-TWO_PI * scenario.background.corner_hz * dt).exp()
        } else {
            0.0
        };
        Ok(Self {
            dt,
            modes,
            background_decay,
            discriminator,
            pid: Pid::new(&scenario.pid, dt),
            previous_field: 0.0,
            phase_noise,
            shot_std: white_sample_std(noise.shot_floor, fs),
            electronic_std: white_sample_std(noise.electronic_floor, fs),
            shot_rng: stream_rng(scenario.seed, stream, SOURCE_SHOT),
            electronic_rng: stream_rng(scenario.seed, stream, SOURCE_ELECTRONIC),
            state: SimState {
                displacement_m: vec![0.0; scenario.modes.len()],
                velocity_m_s: vec![0.0; scenario.modes.len()],
                residual_detuning_hz: 0.0,
                background_hz: 0.0,
                actuator_hz: 0.0,
                step: 0,
            },
            scenario: scenario.clone(),
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Direct access for setting initial conditions.
    pub fn state_mut(&mut self) -> &mut SimState {
        &mut self.state
    }

    pub fn discriminator(&self) -> &PdhDiscriminator {
        &self.discriminator
    }

    /// Advances one sample and returns the normalized error signal, Hz.
    pub fn step(&mut self) -> Result<f64> {
        let n = self.state.step;
        let t = n as f64 * self.dt;
        let field = self.scenario.drive.field(t);
        let previous = self.previous_field;
        self.previous_field = field;
        let mut detuning = 0.0;
        for (i, m) in self.modes.iter_mut().enumerate() {
            let mut force = m.actuation * previous;
            if m.thermal_std > 0.0 {
                let g: f64 = m.rng.sample(StandardNormal);
                force += m.thermal_std * g;
            }
            let x = &mut self.state.displacement_m[i];
            let v = &mut self.state.velocity_m_s[i];
            *v = m.decay * *v + self.dt * (force * m.inv_mass - m.stiffness * *x);
            *x += self.dt * *v;
            detuning += m.transduction * *x;
        }
        let bg = &self.scenario.background;
        if bg.gain_hz_per_t != 0.0 {
            let a = self.background_decay;
            self.state.background_hz = a * self.state.background_hz + (1.0 - a) * bg.gain_hz_per_t * 0.5 * (previous + field);
        }
        detuning += self.state.background_hz;
        if !self.phase_noise.is_empty() {
            detuning += self.phase_noise[n % self.phase_noise.len()];
        }
        let residual = detuning - self.state.actuator_hz;
        let mut error = self.discriminator.normalized(residual);
        if self.shot_std > 0.0 {
            let g: f64 = self.shot_rng.sample(StandardNormal);
            error += self.shot_std * g;
        }
        if self.electronic_std > 0.0 {
            let g: f64 = self.electronic_rng.sample(StandardNormal);
            error += self.electronic_std * g;
        }
        self.state.actuator_hz = self.pid.update(error);
        self.state.residual_detuning_hz = residual;
        self.state.step += 1;
        let finite = error.is_finite()
            && self.state.actuator_hz.is_finite()
            && self.state.displacement_m.iter().chain(&self.state.velocity_m_s).all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite { step: n });
        }
        Ok(error)
    }
}

/// Simulates the full scenario on random stream `stream`.
pub fn run_stream(scenario: &Scenario, stream: u64) -> Result<RunOutput> {
    let mut sim = Simulator::new(scenario, stream)?;
    let n = scenario.num_samples();
    let mut samples = Vec::with_capacity(n);
    let mut residual_sq = 0.0;
    for _ in 0..n {
        samples.push(sim.step()?);
        residual_sq += sim.state.residual_detuning_hz.powi(2);
    }
    let lock_rms_hz = (residual_sq / n as f64).sqrt();
    let lock_limit_hz = scenario.cavity.half_linewidth_hz();
    if lock_rms_hz > lock_limit_hz {
        return Err(Error::LockLost {
            rms_hz: lock_rms_hz,
            limit_hz: lock_limit_hz,
        });
    }
    let mut warnings = Vec::new();
    let drive_rms = scenario.drive.rms_amplitude();
    let saturation_warning = drive_rms > scenario.saturation_ceiling_t;
    if saturation_warning {
        warnings.push(format!(
            "drive amplitude {drive_rms:e} T rms exceeds linear actuation ceiling {:e} T; linear model retained",
            scenario.saturation_ceiling_t
        ));
    }
    Ok(RunOutput {
        error_signal: TimeSeries::new(scenario.sample_rate_hz, samples, "pdh_error_hz"),
        metadata: RunMetadata {
            seed: scenario.seed,
            stream,
            sample_rate_hz: scenario.sample_rate_hz,
            num_samples: n,
            transduction_gain_hz_per_m: scenario.transduction_gain_hz_per_m(),
            discriminator_slope: sim.discriminator.slope(),
            demodulation_phase_rad: sim.discriminator.demodulation_phase(),
            lock_rms_hz,
            lock_limit_hz,
            saturation_warning,
            warnings,
        },
    })
}

/// Simulates the scenario on its primary random stream.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    run_stream(scenario, 0)
}

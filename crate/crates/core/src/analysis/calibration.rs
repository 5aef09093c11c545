use super::pipeline::measure_calibration_tone;
use crate::error::{Error, Result};
use crate::model::Scenario;

/// Convergence tolerance on the reference SNR, dB.
pub const SNR_TOLERANCE_DB: f64 = 0.01;
pub const MAX_CALIBRATION_ITERATIONS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    /// Product of all actuation rescalings applied.
    pub actuation_scale: f64,
    pub phase_psd_amplitude: f64,
    /// `(cumulative actuation scale, measured SNR in dB)` per iteration.
    pub history: Vec<(f64, f64)>,
    pub final_snr_db: f64,
    pub target_snr_db: f64,
    pub crossover_hz: f64,
}

/// Tunes the scenario to its calibration targets.
///
/// The laser phase-noise amplitude follows in closed form from the
/// requested crossover with the shot-noise floor. The actuation of every
/// path (modes and background, preserving their ratios) is then rescaled
/// until the simulated reference tone shows the target SNR.
pub fn calibrate(scenario: &Scenario) -> Result<(Scenario, CalibrationReport)> {
    let mut s = scenario.clone();
    let targets = s.targets;
    if !(s.noise.shot_floor > 0.0) {
        return Err(Error::Calibration("shot-noise floor must be positive to place the crossover".into()));
    }
    s.noise.phase_psd_amplitude = s
        .noise
        .phase_amplitude_for_crossover(targets.crossover_hz, s.cavity.half_linewidth_hz());
    let frequency = s.instruments.reference_frequency_hz;
    let mut scale = 1.0;
    let mut history = Vec::new();
    for _ in 0..MAX_CALIBRATION_ITERATIONS {
        let (tone, _) = measure_calibration_tone(&s, frequency)?;
        let snr_db = tone.snr_db();
        history.push((scale, snr_db));
        let miss = targets.snr_db - snr_db;
        if miss.abs() < SNR_TOLERANCE_DB {
            return Ok((
                s.clone(),
                CalibrationReport {
                    actuation_scale: scale,
                    phase_psd_amplitude: s.noise.phase_psd_amplitude,
                    history,
                    final_snr_db: snr_db,
                    target_snr_db: targets.snr_db,
                    crossover_hz: targets.crossover_hz,
                },
            ));
        }
        let step = 10f64.powf(miss / 20.0);
        s.scale_actuation(step);
        scale *= step;
    }
    let last = history.last().map_or(f64::NAN, |h| h.1);
    Err(Error::Calibration(format!(
        "reference SNR {last:.3} dB did not reach {:.3} dB within {MAX_CALIBRATION_ITERATIONS} iterations",
        targets.snr_db
    )))
}


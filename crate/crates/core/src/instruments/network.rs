use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::run_stream;
use crate::error::{Context, Error, Result};
use crate::model::{DriveProgram, Scenario, TWO_PI};

/// Minimum number of drive periods per sweep point.
pub const MIN_DWELL_PERIODS: f64 = 50.0;
/// Minimum number of energy decay times `1/Gamma` of the nearest mode.
pub const MIN_DWELL_DECAY_TIMES: f64 = 20.0;
/// Leading fraction of each dwell discarded as transient.
pub const TRANSIENT_FRACTION: f64 = 0.2;

/// Swept-sine response: tone power in the error signal per unit drive
/// power at each frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTrace {
    pub frequencies: Vec<f64>,
    /// Hz^2/T^2.
    pub response: Vec<f64>,
    pub drive_amplitude_t: f64,
}

impl ResponseTrace {
    pub fn new(frequencies: Vec<f64>, response: Vec<f64>, drive_amplitude_t: f64) -> Result<Self> {
        if frequencies.len() != response.len() {
            return Err(Error::Grid(format!(
                "{} frequencies but {} response values",
                frequencies.len(),
                response.len()
            )));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("frequency grid must be strictly increasing".into()));
        }
        if let Some(v) = response.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::domain("response", *v, ">= 0"));
        }
        Ok(Self {
            frequencies,
            response,
            drive_amplitude_t,
        })
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            response: self.response.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }
}

/// Simulated time per sweep point, including the discarded transient:
/// at least `MIN_DWELL_PERIODS` drive periods and `MIN_DWELL_DECAY_TIMES`
/// energy decay times of the slowest mode (hence also of the nearest one).
/// Sizing by the slowest mode keeps its start-up transient out of the
/// lock-in window when the drive sits between two faster modes.
pub fn dwell_time(scenario: &Scenario, frequency_hz: f64) -> f64 {
    let slowest = scenario
        .modes
        .iter()
        .map(|m| 1.0 / m.damping_rate())
        .fold(0.0, f64::max);
    let periods = MIN_DWELL_PERIODS / frequency_hz;
    periods.max(MIN_DWELL_DECAY_TIMES * slowest) / (1.0 - TRANSIENT_FRACTION)
}

/// Complex amplitude of the `frequency_hz` component of `samples` (peak
/// units, phase relative to a sine at t = 0), estimated over the largest
/// whole number of periods after `start`.
pub fn lock_in(samples: &[f64], sample_rate_hz: f64, frequency_hz: f64, start: usize) -> Complex64 {
    let available = samples.len().saturating_sub(start);
    let periods = (available as f64 * frequency_hz / sample_rate_hz).floor();
    let len = if periods >= 1.0 {
        ((periods * sample_rate_hz / frequency_hz).round() as usize).min(available)
    } else {
        available
    };
    if len == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = TWO_PI * frequency_hz / sample_rate_hz;
    let sum: Complex64 = samples[start..start + len]
        .iter()
        .enumerate()
        .map(|(i, &y)| y * Complex64::from_polar(1.0, -w * (start + i) as f64))
        .sum();
    // y = A sin(wt + p) -> sum ~ len * A/(2i) e^{ip}.
    sum * Complex64::new(0.0, 2.0) / len as f64
}

/// Peak amplitude of the error-signal tone produced by a noise-free run
/// driven at `frequency_hz` with `drive_amplitude_t` RMS, Hz.
pub fn measure_tone_amplitude(scenario: &Scenario, frequency_hz: f64, drive_amplitude_t: f64) -> Result<f64> {
    let nyquist = 0.5 * scenario.sample_rate_hz;
    if !(frequency_hz > 0.0 && frequency_hz < nyquist) {
        return Err(Error::domain("sweep frequency", frequency_hz, format!("in (0, {nyquist}) Hz")));
    }
    if !(drive_amplitude_t > 0.0) {
        return Err(Error::domain("drive_amplitude_t", drive_amplitude_t, "> 0"));
    }
    let mut point = scenario
        .noiseless()
        .with_drive(DriveProgram::tone(drive_amplitude_t, frequency_hz));
    point.duration_s = dwell_time(scenario, frequency_hz);
    let out = run_stream(&point, frequency_hz.to_bits())?;
    let samples = &out.error_signal.samples;
    let start = (TRANSIENT_FRACTION * samples.len() as f64).ceil() as usize;
    Ok(lock_in(samples, point.sample_rate_hz, frequency_hz, start).norm())
}

/// Response at one frequency, Hz^2/T^2.
pub fn measure_response(scenario: &Scenario, frequency_hz: f64, drive_amplitude_t: f64) -> Result<f64> {
    let amp = measure_tone_amplitude(scenario, frequency_hz, drive_amplitude_t)?;
    Ok(0.5 * amp * amp / (drive_amplitude_t * drive_amplitude_t))
}

/// Swept-sine measurement of the scenario's response. Every point is an
/// independent noise-free run; points are evaluated in parallel and
/// returned in input order.
pub fn network_sweep(scenario: &Scenario, frequencies: &[f64], drive_amplitude_t: f64) -> Result<ResponseTrace> {
    scenario.validate()?;
    let response = frequencies
        .par_iter()
        .map(|&f| measure_response(scenario, f, drive_amplitude_t).map_err(|e| e.at(Context::Frequency(f))))
        .collect::<Result<Vec<f64>>>()?;
    ResponseTrace::new(frequencies.to_vec(), response, drive_amplitude_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::transfer::response_power;
    use crate::model::BackgroundResponse;

    #[test]
    fn lock_in_recovers_amplitude_and_phase() {
        let fs = 1e6;
        let f = 12_345.0;
        let y: Vec<f64> = (0..50_000)
            .map(|i| 2.5 * (TWO_PI * f * i as f64 / fs + 0.7).sin())
            .collect();
        let a = lock_in(&y, fs, f, 1000);
        assert!((a.norm() - 2.5).abs() < 1e-3);
        assert!((a.arg() - 0.7).abs() < 1e-3);
    }

    #[test]
    fn dwell_satisfies_minimums() {
        let s = Scenario::default_device();
        for f in [2e3, 69.8e3, 125e3, 500e3] {
            let usable = dwell_time(&s, f) * (1.0 - TRANSIENT_FRACTION);
            assert!(usable * f >= MIN_DWELL_PERIODS * (1.0 - 1e-12));
        }
        for m in &s.modes {
            let usable = dwell_time(&s, m.frequency_hz()) * (1.0 - TRANSIENT_FRACTION);
            assert!(usable * m.damping_rate() >= MIN_DWELL_DECAY_TIMES * (1.0 - 1e-12));
        }
    }

    #[test]
    fn empty_device_has_zero_response() {
        let mut s = Scenario::default_device();
        s.modes.clear();
        s.background = BackgroundResponse::none();
        let r = network_sweep(&s, &[10e3, 100e3], 1e-6).unwrap();
        assert!(r.response.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sweep_matches_closed_form_response() {
        let s = Scenario::default_device();
        for f in [50e3, 69.8e3, 124e3, 200e3] {
            let measured = measure_response(&s, f, 7.8e-6).unwrap();
            let model = response_power(&s, f);
            assert!((measured / model - 1.0).abs() < 0.02, "{f}: {measured} vs {model}");
        }
    }

    #[test]
    fn errors_carry_frequency() {
        let s = Scenario::default_device();
        match network_sweep(&s, &[1e3, 3e6], 1e-6) {
            Err(Error::At { context: Context::Frequency(f), .. }) => assert_eq!(f, 3e6),
            other => panic!("{other:?}"),
        }
    }
}

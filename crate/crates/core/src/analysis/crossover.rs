use crate::error::{Error, Result};
use crate::instruments::SpectrumTrace;
use crate::model::Scenario;

/// Frequency where `phase` drops below `shot`: the first sign change of
/// `ln(phase / shot)` from positive to non-positive, interpolated linearly
/// in log-log coordinates. Bins where either trace is non-positive are
/// skipped.
pub fn noise_crossover(phase: &SpectrumTrace, shot: &SpectrumTrace) -> Result<f64> {
    let same = phase.frequencies.len() == shot.frequencies.len()
        && phase
            .frequencies
            .iter()
            .zip(&shot.frequencies)
            .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
    if !same {
        return Err(Error::Grid("phase and shot noise traces must share a grid".into()));
    }
    let points: Vec<(f64, f64)> = phase
        .frequencies
        .iter()
        .zip(phase.psd.iter().zip(&shot.psd))
        .filter(|(f, (p, s))| **f > 0.0 && **p > 0.0 && **s > 0.0)
        .map(|(f, (p, s))| (f.ln(), (p / s).ln()))
        .collect();
    let band = || Error::NoCrossover {
        lo_hz: phase.frequencies.first().copied().unwrap_or(0.0),
        hi_hz: phase.frequencies.last().copied().unwrap_or(0.0),
    };
    for w in points.windows(2) {
        let ((x0, d0), (x1, d1)) = (w[0], w[1]);
        if d0 > 0.0 && d1 <= 0.0 {
            return Ok((x0 + d0 / (d0 - d1) * (x1 - x0)).exp());
        }
    }
    Err(band())
}

/// Model PSDs of the laser phase noise and of the shot noise, as seen in
/// the error signal, on `frequencies`.
pub fn model_noise_traces(scenario: &Scenario, frequencies: &[f64], rbw_hz: f64) -> Result<(SpectrumTrace, SpectrumTrace)> {
    let fc = scenario.cavity.half_linewidth_hz();
    let noise = &scenario.noise;
    let phase = frequencies.iter().map(|&f| noise.phase_noise_detuning_psd(f, fc)).collect();
    let shot = vec![noise.shot_floor; frequencies.len()];
    Ok((
        SpectrumTrace::new(frequencies.to_vec(), phase, rbw_hz)?,
        SpectrumTrace::new(frequencies.to_vec(), shot, rbw_hz)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (1..=1000).map(|k| k as f64 * 1e3).collect()
    }

    #[test]
    fn inverse_frequency_against_flat_floor() {
        let f = grid();
        let (a, floor) = (3.3e2, 1e-3);
        let p = SpectrumTrace::new(f.clone(), f.iter().map(|x| a / x).collect(), 1.0).unwrap();
        let s = SpectrumTrace::new(f.clone(), vec![floor; f.len()], 1.0).unwrap();
        let x = noise_crossover(&p, &s).unwrap();
        assert!((x / (a / floor) - 1.0).abs() < 1e-9, "{x}");
    }

    #[test]
    fn flat_traces_never_cross() {
        let f = grid();
        let p = SpectrumTrace::new(f.clone(), vec![2.0; f.len()], 1.0).unwrap();
        let s = SpectrumTrace::new(f.clone(), vec![1.0; f.len()], 1.0).unwrap();
        match noise_crossover(&p, &s) {
            Err(Error::NoCrossover { lo_hz, hi_hz }) => {
                assert_eq!(lo_hz, 1e3);
                assert_eq!(hi_hz, 1e6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn default_model_crosses_at_target() {
        let s = Scenario::default_device();
        let (p, shot) = model_noise_traces(&s, &grid(), 330.0).unwrap();
        let x = noise_crossover(&p, &shot).unwrap();
        assert!((x - s.targets.crossover_hz).abs() < 1.0, "{x}");
    }
}

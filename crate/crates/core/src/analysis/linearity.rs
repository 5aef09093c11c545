use rayon::prelude::*;

use crate::error::{Context, Error, Result};
use crate::instruments::measure_tone_amplitude;
use crate::model::Scenario;

/// Relative residual below which a point counts as linear.
pub const LINEARITY_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearityReport {
    pub amplitudes_t: Vec<f64>,
    /// Error-signal tone amplitude (peak), Hz.
    pub responses: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// `(measured - fitted) / fitted` for every point.
    pub residuals: Vec<f64>,
    /// Largest `|residual|` among points at or below the saturation ceiling.
    pub max_residual: f64,
    /// Largest amplitude up to which every residual stays below the
    /// linearity threshold.
    pub linear_ceiling_t: Option<f64>,
    pub saturation_ceiling_t: f64,
    pub above_ceiling: Vec<bool>,
}

/// Fits `y = intercept + slope x` to the points at or below
/// `saturation_ceiling_t`, weighting each by `1 / y^2` so the relative
/// residuals are minimized.
pub fn linearity_report(amplitudes_t: &[f64], responses: &[f64], saturation_ceiling_t: f64) -> Result<LinearityReport> {
    if amplitudes_t.len() != responses.len() {
        return Err(Error::Config("amplitude and response counts differ".into()));
    }
    if amplitudes_t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("amplitudes must be strictly increasing".into()));
    }
    let fit_points: Vec<(f64, f64)> = amplitudes_t
        .iter()
        .zip(responses)
        .filter(|(a, _)| **a <= saturation_ceiling_t)
        .map(|(a, r)| (*a, *r))
        .collect();
    if fit_points.len() < 2 {
        return Err(Error::Config(format!(
            "need at least two amplitudes at or below the saturation ceiling {saturation_ceiling_t} T"
        )));
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in &fit_points {
        let w = if y != 0.0 { 1.0 / (y * y) } else { 1.0 };
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det == 0.0 {
        return Err(Error::Config("degenerate amplitude set".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let residuals: Vec<f64> = amplitudes_t
        .iter()
        .zip(responses)
        .map(|(x, y)| {
            let fit = intercept + slope * x;
            (y - fit) / fit
        })
        .collect();
    let above_ceiling: Vec<bool> = amplitudes_t.iter().map(|a| *a > saturation_ceiling_t).collect();
    let max_residual = residuals
        .iter()
        .zip(&above_ceiling)
        .filter(|(_, above)| !**above)
        .fold(0.0_f64, |m, (r, _)| m.max(r.abs()));
    let linear_ceiling_t = amplitudes_t
        .iter()
        .zip(&residuals)
        .take_while(|(_, r)| r.abs() < LINEARITY_THRESHOLD)
        .last()
        .map(|(a, _)| *a);
    Ok(LinearityReport {
        amplitudes_t: amplitudes_t.to_vec(),
        responses: responses.to_vec(),
        slope,
        intercept,
        residuals,
        max_residual,
        linear_ceiling_t,
        saturation_ceiling_t,
        above_ceiling,
    })
}

/// Drives the scenario with a tone at each amplitude (noise-free runs, in
/// parallel) and reports how linear the error-signal amplitude is.
pub fn dynamic_range(scenario: &Scenario, amplitudes_t: &[f64], tone_hz: f64) -> Result<LinearityReport> {
    if amplitudes_t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("amplitudes must be strictly increasing".into()));
    }
    let responses = amplitudes_t
        .par_iter()
        .map(|&a| measure_tone_amplitude(scenario, tone_hz, a).map_err(|e| e.at(Context::Amplitude(a))))
        .collect::<Result<Vec<f64>>>()?;
    linearity_report(amplitudes_t, &responses, scenario.saturation_ceiling_t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_fit_exactly() {
        let r = linearity_report(&[1.0, 3.0], &[5.0, 9.0], 10.0).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-12);
        assert!((r.intercept - 3.0).abs() < 1e-12);
        assert!(r.max_residual < 1e-12);
        assert_eq!(r.linear_ceiling_t, Some(3.0));
    }

    #[test]
    fn flags_points_above_ceiling() {
        let amps = [1.0, 2.0, 3.0, 4.0, 5.0];
        let resp: Vec<f64> = amps.iter().map(|a| a * (1.0 - 0.01 * a * a * (*a > 3.0) as u8 as f64)).collect();
        let r = linearity_report(&amps, &resp, 3.0).unwrap();
        assert_eq!(r.above_ceiling, vec![false, false, false, true, true]);
        assert!(r.max_residual < 1e-12);
        assert!(r.residuals[4].abs() > r.residuals[3].abs());
        assert_eq!(r.linear_ceiling_t, Some(3.0));
    }

    #[test]
    fn rejects_unsorted() {
        assert!(linearity_report(&[2.0, 1.0], &[1.0, 1.0], 10.0).is_err());
        assert!(linearity_report(&[20.0, 30.0], &[1.0, 1.0], 10.0).is_err());
    }

    #[test]
    fn simulated_response_is_linear() {
        let s = Scenario::default_device();
        let r = dynamic_range(&s, &[1e-6, 10e-6, 50e-6], 200e3).unwrap();
        assert!(r.max_residual < 5e-3, "{r:?}");
    }
}

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::model::{CavityParams, RingdownSettings};

/// Upper clip of the recorded intensity (noise overshoot allowance).
pub const MAX_RELATIVE_INTENSITY: f64 = 1.05;

/// Detected intensity during a cavity ringdown, normalized to the level
/// before the shutter closes.
#[derive(Debug, Clone, PartialEq)]
pub struct RingdownTrace {
    pub times_s: Vec<f64>,
    pub intensity: Vec<f64>,
    pub shutter_time_s: f64,
}

impl RingdownTrace {
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            intensity: self.intensity.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }
}

/// Noise-free ringdown intensity at time `t`.
pub fn ideal_intensity(cavity: &CavityParams, shutter_time_s: f64, t: f64) -> f64 {
    if t <= shutter_time_s {
        1.0
    } else {
        (-(t - shutter_time_s) / cavity.lifetime_s()).exp()
    }
}

/// Records a ringdown: constant intensity until the shutter closes, then
/// exponential decay with the cavity lifetime, plus additive Gaussian
/// noise of standard deviation `noise_level`. Values are clipped to
/// `[0, MAX_RELATIVE_INTENSITY]`.
pub fn ringdown_experiment<R: Rng + ?Sized>(
    cavity: &CavityParams,
    settings: &RingdownSettings,
    rng: &mut R,
) -> Result<RingdownTrace> {
    require_non_negative("shutter_time_s", settings.shutter_time_s)?;
    require_non_negative("noise_level", settings.noise_level)?;
    require_positive("sample_interval_s", settings.sample_interval_s)?;
    let needed = settings.shutter_time_s + 5.0 * cavity.lifetime_s();
    if !(settings.duration_s >= needed) {
        return Err(Error::domain(
            "duration_s",
            settings.duration_s,
            format!(">= shutter time + 5 lifetimes = {needed} s"),
        ));
    }
    let n = (settings.duration_s / settings.sample_interval_s).round() as usize + 1;
    let times_s: Vec<f64> = (0..n).map(|i| i as f64 * settings.sample_interval_s).collect();
    let intensity = times_s
        .iter()
        .map(|&t| {
            let mut v = ideal_intensity(cavity, settings.shutter_time_s, t);
            if settings.noise_level > 0.0 {
                let g: f64 = rng.sample(StandardNormal);
                v += settings.noise_level * g;
            }
            v.clamp(0.0, MAX_RELATIVE_INTENSITY)
        })
        .collect();
    Ok(RingdownTrace {
        times_s,
        intensity,
        shutter_time_s: settings.shutter_time_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn settings(noise: f64) -> RingdownSettings {
        RingdownSettings {
            shutter_time_s: 175e-9,
            noise_level: noise,
            sample_interval_s: 1e-9,
            duration_s: 1.5e-6,
            fit_window_s: (221e-9, 454e-9),
        }
    }

    #[test]
    fn noiseless_levels() {
        let c = CavityParams::new(1550e-9, 233e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = ringdown_experiment(&c, &settings(0.0), &mut rng).unwrap();
        assert!((t.intensity[175] - 1.0).abs() < 1e-12);
        assert_eq!(t.intensity[0], 1.0);
        assert!((ideal_intensity(&c, 175e-9, 175e-9 + 233e-9) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((t.intensity[408] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn noisy_trace_stays_in_bounds() {
        let c = CavityParams::new(1550e-9, 233e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = ringdown_experiment(&c, &settings(0.2), &mut rng).unwrap();
        assert!(t.intensity.iter().all(|&v| (0.0..=MAX_RELATIVE_INTENSITY).contains(&v)));
    }

    #[test]
    fn short_trace_is_rejected() {
        let c = CavityParams::new(1550e-9, 233e-9).unwrap();
        let mut s = settings(0.0);
        s.duration_s = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(ringdown_experiment(&c, &s, &mut rng).is_err());
    }
}

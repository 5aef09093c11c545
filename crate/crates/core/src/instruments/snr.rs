use super::SpectrumTrace;
use crate::error::{Error, Result};

/// Bins on each side of the tone excluded from the noise-floor estimate.
pub const FLOOR_EXCLUSION_BINS: usize = 3;
/// Bins on each side of the exclusion zone used for the noise floor.
pub const FLOOR_WINDOW_BINS: usize = 25;
/// How far (bins) the peak may lie from the nominal tone frequency.
const PEAK_SEARCH_BINS: usize = 2;

/// Bin of the spectral peak belonging to the tone at `tone_hz`: climbs from
/// the nearest bin to the adjacent local maximum.
pub fn tone_peak_bin(trace: &SpectrumTrace, tone_hz: f64) -> Result<usize> {
    let n = trace.psd.len();
    let (f0, f1) = (trace.frequencies[0], trace.frequencies[n - 1]);
    if !(tone_hz > f0 && tone_hz < f1) {
        return Err(Error::Grid(format!("tone {tone_hz} Hz outside trace grid [{f0}, {f1}] Hz")));
    }
    let start = trace.nearest_bin(tone_hz);
    let mut k = start;
    loop {
        let here = trace.psd[k];
        let left = if k > 1 { trace.psd[k - 1] } else { f64::NEG_INFINITY };
        let right = if k + 1 < n { trace.psd[k + 1] } else { f64::NEG_INFINITY };
        if here > left && here > right {
            return Ok(k);
        }
        let next = if left > right { k - 1 } else { k + 1 };
        if next.abs_diff(start) > PEAK_SEARCH_BINS || next == 0 || next >= n {
            return Err(Error::ToneNotFound { frequency_hz: tone_hz });
        }
        k = next;
    }
}

/// Median PSD of the bins around `peak`, skipping the tone itself.
pub fn noise_floor(trace: &SpectrumTrace, peak: usize) -> f64 {
    let n = trace.psd.len();
    let gap = FLOOR_EXCLUSION_BINS + 1;
    let mut window: Vec<f64> = Vec::with_capacity(2 * FLOOR_WINDOW_BINS);
    for d in gap..gap + FLOOR_WINDOW_BINS {
        if peak > d {
            window.push(trace.psd[peak - d]);
        }
        if peak + d < n {
            window.push(trace.psd[peak + d]);
        }
    }
    median(&mut window)
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Ratio of the tone's peak PSD to the surrounding median noise floor
/// (linear power ratio).
pub fn measure_snr(trace: &SpectrumTrace, tone_hz: f64) -> Result<f64> {
    let peak = tone_peak_bin(trace, tone_hz)?;
    let n = trace.psd.len();
    let gap = FLOOR_EXCLUSION_BINS + 1;
    if peak < gap + 1 && peak + gap >= n {
        return Err(Error::Grid(format!(
            "{n} bins leave no noise-floor bins around the tone at {tone_hz} Hz"
        )));
    }
    let floor = noise_floor(trace, peak);
    if !(floor > 0.0) {
        return Err(Error::domain("noise floor", floor, "> 0"));
    }
    Ok(trace.psd[peak] / floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TimeSeries;
    use crate::instruments::{compute_psd, required_samples};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn tone_over_white(amp: f64, tone: f64, floor_psd: f64, fs: f64, n: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std = (floor_psd * fs / 2.0).sqrt();
        let samples = (0..n)
            .map(|i| {
                let g: f64 = rng.sample(StandardNormal);
                amp * (std::f64::consts::TAU * tone * i as f64 / fs).sin() + std * g
            })
            .collect();
        TimeSeries::new(fs, samples, "test")
    }

    #[test]
    fn analytic_snr_of_tone_on_bin() {
        let fs = 1e5;
        let rbw = 100.0;
        let n = required_samples(fs, rbw, 200);
        // 1500-point segments: bins every 66.67 Hz, 20 kHz is bin 300.
        let ts = tone_over_white(0.05, 20e3, 1e-6, fs, n, 9);
        let t = compute_psd(&ts, rbw).unwrap();
        let snr = measure_snr(&t, 20e3).unwrap();
        let expected = 0.05_f64.powi(2) / (2.0 * t.resolution_bw_hz * 1e-6);
        assert!((snr / expected - 1.0).abs() < 0.1, "{snr} vs {expected}");
    }

    #[test]
    fn no_tone_gives_unity() {
        let fs = 1e5;
        let n = required_samples(fs, 100.0, 300);
        let ts = tone_over_white(0.0, 1.0, 1e-6, fs, n, 10);
        let t = compute_psd(&ts, 100.0).unwrap();
        let mut found = 0;
        for i in 0..40 {
            let f = 5e3 + 997.0 * i as f64;
            if let Ok(snr) = measure_snr(&t, f) {
                found += 1;
                let db = 10.0 * snr.log10();
                assert!(db.abs() < 1.0, "{f}: {db} dB");
            }
        }
        assert!(found >= 30);
    }

    #[test]
    fn scale_invariant() {
        let fs = 1e5;
        let ts = tone_over_white(0.01, 20e3, 1e-6, fs, required_samples(fs, 100.0, 50), 11);
        let t = compute_psd(&ts, 100.0).unwrap();
        let a = measure_snr(&t, 20e3).unwrap();
        let b = measure_snr(&t.scaled(37.0), 20e3).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sloped_spectrum_has_no_tone() {
        let f: Vec<f64> = (0..200).map(|k| k as f64).collect();
        let p: Vec<f64> = (0..200).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let t = SpectrumTrace::new(f, p, 1.5).unwrap();
        assert!(matches!(measure_snr(&t, 100.0), Err(Error::ToneNotFound { .. })));
        assert!(matches!(measure_snr(&t, 500.0), Err(Error::Grid(_))));
    }
}

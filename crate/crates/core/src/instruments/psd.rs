use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dynamics::TimeSeries;
use crate::error::{require_positive, Error, Result};

/// Equivalent noise bandwidth of the periodic Hann window, in bins.
pub const HANN_ENBW_BINS: f64 = 1.5;

/// One-sided power spectral density on a uniform grid starting at DC.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub frequencies: Vec<f64>,
    /// Signal units squared per Hz.
    pub psd: Vec<f64>,
    /// Equivalent noise bandwidth of one bin, Hz.
    pub resolution_bw_hz: f64,
    pub window: String,
    pub averages: usize,
}

impl SpectrumTrace {
    /// Builds a trace from given values, checking the invariants.
    pub fn new(frequencies: Vec<f64>, psd: Vec<f64>, resolution_bw_hz: f64) -> Result<Self> {
        if frequencies.len() != psd.len() {
            return Err(Error::Grid(format!(
                "{} frequencies but {} PSD values",
                frequencies.len(),
                psd.len()
            )));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("frequency grid must be strictly increasing".into()));
        }
        if let Some(v) = psd.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::domain("psd", *v, ">= 0"));
        }
        require_positive("resolution_bw_hz", resolution_bw_hz)?;
        Ok(Self {
            frequencies,
            psd,
            resolution_bw_hz,
            window: "none".into(),
            averages: 1,
        })
    }

    pub fn bin_width_hz(&self) -> f64 {
        if self.frequencies.len() < 2 {
            return self.resolution_bw_hz;
        }
        self.frequencies[1] - self.frequencies[0]
    }

    /// Sum of PSD times bin width.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width_hz()
    }

    /// Power within `half_width` bins of the bin nearest `frequency_hz`.
    pub fn band_power(&self, frequency_hz: f64, half_width: usize) -> f64 {
        let k = self.nearest_bin(frequency_hz);
        let lo = k.saturating_sub(half_width);
        let hi = (k + half_width).min(self.psd.len() - 1);
        self.psd[lo..=hi].iter().sum::<f64>() * self.bin_width_hz()
    }

    pub fn nearest_bin(&self, frequency_hz: f64) -> usize {
        let df = self.bin_width_hz();
        let k = ((frequency_hz - self.frequencies[0]) / df).round().max(0.0) as usize;
        k.min(self.frequencies.len() - 1)
    }

    /// Copy with every PSD value multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            psd: self.psd.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }

    /// Running mean over `2 half_width + 1` bins (truncated at the edges).
    pub fn smoothed(&self, half_width: usize) -> Self {
        if half_width == 0 {
            return self.clone();
        }
        let n = self.psd.len();
        let psd = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half_width);
                let hi = (i + half_width).min(n - 1);
                self.psd[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
            })
            .collect();
        Self { psd, ..self.clone() }
    }
}

/// Segment length (even) whose Hann ENBW equals `rbw_hz`.
pub fn segment_length(sample_rate_hz: f64, rbw_hz: f64) -> usize {
    let n = (HANN_ENBW_BINS * sample_rate_hz / rbw_hz / 2.0).round() as usize * 2;
    n.max(2)
}

/// Samples needed for `averages` half-overlapping segments.
pub fn required_samples(sample_rate_hz: f64, rbw_hz: f64, averages: usize) -> usize {
    let n = segment_length(sample_rate_hz, rbw_hz);
    (averages.max(1) + 1) * n / 2
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect()
}

/// Averaged, Hann-windowed periodogram with 50% overlap. The segment
/// length is chosen so the window's equivalent noise bandwidth equals
/// `rbw_hz`.
pub fn compute_psd(ts: &TimeSeries, rbw_hz: f64) -> Result<SpectrumTrace> {
    let fs = ts.sample_rate_hz;
    require_positive("sample_rate_hz", fs)?;
    require_positive("rbw_hz", rbw_hz)?;
    let (lo, hi) = (2.0 / ts.duration_s(), fs / 4.0);
    if !(rbw_hz >= lo && rbw_hz <= hi) {
        return Err(Error::Config(format!(
            "resolution bandwidth {rbw_hz} Hz outside admissible interval [{lo}, {hi}] Hz"
        )));
    }
    let n = segment_length(fs, rbw_hz);
    let hop = n / 2;
    let segments = (ts.len() - n) / hop + 1;
    let window = hann(n);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let half = n / 2;
    let mut acc = vec![0.0; half + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for s in 0..segments {
        let seg = &ts.samples[s * hop..s * hop + n];
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new(x * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (fs * window_power * segments as f64);
    let psd = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| if k == 0 || k == half { p * scale } else { 2.0 * p * scale })
        .collect();
    let df = fs / n as f64;
    let sum_w: f64 = window.iter().sum();
    Ok(SpectrumTrace {
        frequencies: (0..=half).map(|k| k as f64 * df).collect(),
        psd,
        resolution_bw_hz: df * n as f64 * window_power / (sum_w * sum_w),
        window: "hann".into(),
        averages: segments,
    })
}

/// Mean of `x^2` weighted by the squared window over the segments used by
/// [`compute_psd`]; the PSD integrates to exactly this value.
pub fn windowed_power(ts: &TimeSeries, rbw_hz: f64) -> f64 {
    let n = segment_length(ts.sample_rate_hz, rbw_hz);
    let hop = n / 2;
    let segments = (ts.len() - n) / hop + 1;
    let w = hann(n);
    let wp: f64 = w.iter().map(|v| v * v).sum();
    let total: f64 = (0..segments)
        .map(|s| {
            ts.samples[s * hop..s * hop + n]
                .iter()
                .zip(&w)
                .map(|(x, w)| (x * w).powi(2))
                .sum::<f64>()
        })
        .sum();
    total / (wp * segments as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn white(n: usize, fs: f64, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSeries::new(fs, (0..n).map(|_| rng.sample(StandardNormal)).collect(), "white")
    }

    #[test]
    fn hann_enbw_is_one_and_a_half_bins() {
        let w = hann(1000);
        let s: f64 = w.iter().sum();
        let s2: f64 = w.iter().map(|v| v * v).sum();
        assert!((1000.0 * s2 / (s * s) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn resolution_bandwidth_is_honoured() {
        let ts = white(200_000, 1e5, 1);
        let t = compute_psd(&ts, 330.0).unwrap();
        assert!((t.resolution_bw_hz / 330.0 - 1.0).abs() < 0.01);
        assert_eq!(t.window, "hann");
    }

    #[test]
    fn white_noise_level() {
        let fs = 1e4;
        let ts = white(required_samples(fs, 100.0, 400), fs, 2);
        let t = compute_psd(&ts, 100.0).unwrap();
        assert!(t.averages >= 100);
        let expected = 2.0 / fs;
        for &p in &t.psd[1..t.psd.len() - 1] {
            assert!((p / expected - 1.0).abs() < 0.3);
        }
        let mean = t.psd[1..t.psd.len() - 1].iter().sum::<f64>() / (t.psd.len() - 2) as f64;
        assert!((mean / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn parseval_exact_against_windowed_power() {
        let ts = white(50_000, 1e4, 3);
        let t = compute_psd(&ts, 50.0).unwrap();
        let wp = windowed_power(&ts, 50.0);
        assert!((t.total_power() / wp - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tone_power() {
        let fs = 1e4;
        let a = 3.0;
        let samples = (0..100_000)
            .map(|i| a * (std::f64::consts::TAU * 1234.5 * i as f64 / fs).sin())
            .collect();
        let t = compute_psd(&TimeSeries::new(fs, samples, "tone"), 20.0).unwrap();
        let p = t.band_power(1234.5, 6);
        assert!((p / (a * a / 2.0) - 1.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn rbw_limits() {
        let ts = white(1000, 1e3, 4);
        assert!(matches!(compute_psd(&ts, 1.0), Err(Error::Config(_))));
        assert!(matches!(compute_psd(&ts, 300.0), Err(Error::Config(_))));
        assert!(compute_psd(&ts, 2.0).is_ok());
    }

    #[test]
    fn deterministic_signal_is_seed_independent() {
        let fs = 1e4;
        let make = || {
            TimeSeries::new(
                fs,
                (0..20_000).map(|i| (0.3 * i as f64).sin()).collect(),
                "x",
            )
        };
        assert_eq!(compute_psd(&make(), 50.0).unwrap(), compute_psd(&make(), 50.0).unwrap());
    }
}

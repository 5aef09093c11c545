use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::model::{MechanicalMode, BOLTZMANN};

/// One-sided thermal force PSD `4 k_B T m Gamma`, N^2/Hz.
pub fn thermal_force_psd(mode: &MechanicalMode, temperature_k: f64) -> f64 {
    4.0 * BOLTZMANN * temperature_k * mode.effective_mass_kg() * mode.damping_rate()
}

/// Standard deviation of a discrete white sample whose one-sided PSD is `psd`.
pub fn white_sample_std(psd: f64, sample_rate_hz: f64) -> f64 {
    (psd * sample_rate_hz / 2.0).sqrt()
}

/// Gaussian noise with one-sided PSD `psd(f)` over a record of `n` samples,
/// synthesized in the frequency domain. DC and Nyquist are left empty.
pub fn colored_noise<R: Rng + ?Sized>(
    n: usize,
    sample_rate_hz: f64,
    psd: impl Fn(f64) -> f64,
    rng: &mut R,
) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    let df = sample_rate_hz / n as f64;
    let scale = sample_rate_hz * n as f64 / 4.0;
    for k in 1..n.div_ceil(2) {
        let s = psd(k as f64 * df);
        let amp = (s.max(0.0) * scale).sqrt();
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let x = Complex64::new(amp * g1, amp * g2);
        spectrum[k] = x;
        spectrum[n - k] = x.conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    let norm = 1.0 / n as f64;
    spectrum.into_iter().map(|c| c.re * norm).collect()
}

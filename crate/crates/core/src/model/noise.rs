use crate::error::{require_non_negative, Error, Result};

/// Noise sources of the readout.
///
/// The laser phase noise has PSD `S_phi(f) = A / f^alpha` (rad^2/Hz). It
/// reaches the error signal as an equivalent detuning with PSD
/// `(kappa / 4 pi)^2 * S_phi(f)`, the phase-to-frequency conversion of a
/// Pound-Drever-Hall discriminator above its cavity half-linewidth.
/// Shot and electronic noise are white and already expressed in
/// error-signal units (Hz^2/Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub phase_psd_amplitude: f64,
    pub phase_exponent: f64,
    pub shot_floor: f64,
    pub electronic_floor: f64,
    pub temperature_k: f64,
}

impl NoiseParams {
    /// All noise sources disabled.
    pub fn silent() -> Self {
        Self {
            phase_psd_amplitude: 0.0,
            phase_exponent: 1.0,
            shot_floor: 0.0,
            electronic_floor: 0.0,
            temperature_k: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("noise.phase_psd_amplitude", self.phase_psd_amplitude)?;
        require_non_negative("noise.shot_floor", self.shot_floor)?;
        require_non_negative("noise.electronic_floor", self.electronic_floor)?;
        require_non_negative("noise.temperature_k", self.temperature_k)?;
        if !(0.5..=2.0).contains(&self.phase_exponent) {
            return Err(Error::domain("noise.phase_exponent", self.phase_exponent, "in [0.5, 2]"));
        }
        Ok(())
    }

    /// Laser phase noise referred to the error signal, Hz^2/Hz.
    pub fn phase_noise_detuning_psd(&self, frequency_hz: f64, half_linewidth_hz: f64) -> f64 {
        if frequency_hz <= 0.0 {
            return 0.0;
        }
        half_linewidth_hz * half_linewidth_hz * self.phase_psd_amplitude / frequency_hz.powf(self.phase_exponent)
    }

    /// Phase-noise amplitude that makes the phase-noise contribution cross
    /// the shot-noise floor at `crossover_hz`.
    pub fn phase_amplitude_for_crossover(&self, crossover_hz: f64, half_linewidth_hz: f64) -> f64 {
        self.shot_floor * crossover_hz.powf(self.phase_exponent) / (half_linewidth_hz * half_linewidth_hz)
    }

    pub fn white_floor(&self) -> f64 {
        self.shot_floor + self.electronic_floor
    }
}

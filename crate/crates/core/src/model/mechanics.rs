use super::TWO_PI;
use crate::error::{require_positive, Error, Result};

/// One mechanical eigenmode of the resonator, linearized about the
/// magnetostrictive bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalMode {
    frequency_hz: f64,
    quality: f64,
    effective_mass_kg: f64,
    actuation_n_per_t: f64,
    transduction_hz_per_m: f64,
}

impl MechanicalMode {
    /// `actuation_n_per_t` may be negative: its sign sets the phase of the
    /// mode's response relative to the other modes.
    pub fn new(
        frequency_hz: f64,
        quality: f64,
        effective_mass_kg: f64,
        actuation_n_per_t: f64,
        transduction_hz_per_m: f64,
    ) -> Result<Self> {
        require_positive("frequency_hz", frequency_hz)?;
        if !(quality.is_finite() && quality > 1.0) {
            return Err(Error::domain("quality", quality, "finite and > 1"));
        }
        require_positive("effective_mass_kg", effective_mass_kg)?;
        if !actuation_n_per_t.is_finite() {
            return Err(Error::domain("actuation_n_per_t", actuation_n_per_t, "finite"));
        }
        if !transduction_hz_per_m.is_finite() {
            return Err(Error::domain("transduction_hz_per_m", transduction_hz_per_m, "finite"));
        }
        Ok(Self {
            frequency_hz,
            quality,
            effective_mass_kg,
            actuation_n_per_t,
            transduction_hz_per_m,
        })
    }

    /// Builds a mode whose static (zero-frequency) detuning response is
    /// `static_hz_per_t`, i.e. picks `c_act = static * m_eff * omega^2 / g`.
    pub fn with_static_response(
        frequency_hz: f64,
        quality: f64,
        effective_mass_kg: f64,
        transduction_hz_per_m: f64,
        static_hz_per_t: f64,
    ) -> Result<Self> {
        require_positive("transduction_hz_per_m", transduction_hz_per_m.abs())?;
        let omega = TWO_PI * frequency_hz;
        let actuation = static_hz_per_t * effective_mass_kg * omega * omega / transduction_hz_per_m;
        Self::new(frequency_hz, quality, effective_mass_kg, actuation, transduction_hz_per_m)
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn angular_frequency(&self) -> f64 {
        TWO_PI * self.frequency_hz
    }

    pub fn quality(&self) -> f64 {
        self.quality
    }

    pub fn effective_mass_kg(&self) -> f64 {
        self.effective_mass_kg
    }

    pub fn actuation_n_per_t(&self) -> f64 {
        self.actuation_n_per_t
    }

    pub fn transduction_hz_per_m(&self) -> f64 {
        self.transduction_hz_per_m
    }

    /// Energy damping rate `Gamma_m = 2 pi f_m / Q_m`, 1/s.
    pub fn damping_rate(&self) -> f64 {
        self.angular_frequency() / self.quality
    }

    /// Full width of the mechanical resonance, Hz.
    pub fn linewidth_hz(&self) -> f64 {
        self.frequency_hz / self.quality
    }

    /// Cavity detuning per tesla at zero frequency.
    pub fn static_response_hz_per_t(&self) -> f64 {
        let omega = self.angular_frequency();
        self.transduction_hz_per_m * self.actuation_n_per_t / (self.effective_mass_kg * omega * omega)
    }

    pub(crate) fn scale_actuation(&mut self, factor: f64) {
        self.actuation_n_per_t *= factor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_modes() {
        assert!(MechanicalMode::new(0.0, 10.0, 1e-3, 1.0, 1.0).is_err());
        assert!(MechanicalMode::new(1e3, 1.0, 1e-3, 1.0, 1.0).is_err());
        assert!(MechanicalMode::new(1e3, 10.0, 0.0, 1.0, 1.0).is_err());
        assert!(MechanicalMode::new(1e3, 10.0, 1e-3, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn damping_rate_from_quality() {
        let m = MechanicalMode::new(69.8e3, 1e3, 1e-3, 1.0, 1.0).unwrap();
        assert!((m.damping_rate() - TWO_PI * 69.8).abs() < 1e-9);
        assert!((m.linewidth_hz() - 69.8).abs() < 1e-12);
    }

    #[test]
    fn static_response_round_trip() {
        let m = MechanicalMode::with_static_response(120.4e3, 17.5, 2e-3, 5e13, -0.3).unwrap();
        assert!((m.static_response_hz_per_t() + 0.3).abs() < 1e-12);
        assert!(m.actuation_n_per_t() < 0.0);
    }
}

use super::{SPEED_OF_LIGHT, TWO_PI};
use crate::error::{require_positive, Error, Result};

/// Intrinsic optical quality factor `Q = 2 pi c tau_e / lambda`.
pub fn q_from_lifetime(lifetime_s: f64, wavelength_m: f64) -> Result<f64> {
    require_positive("lifetime_s", lifetime_s)?;
    require_positive("wavelength_m", wavelength_m)?;
    Ok(TWO_PI * SPEED_OF_LIGHT * lifetime_s / wavelength_m)
}

/// Cavity linewidth `kappa / 2 pi = 1 / (2 pi tau_e)` in Hz.
pub fn linewidth_from_lifetime(lifetime_s: f64) -> Result<f64> {
    require_positive("lifetime_s", lifetime_s)?;
    Ok(1.0 / (TWO_PI * lifetime_s))
}

/// Optical resonator constants. Immutable once constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    wavelength_m: f64,
    lifetime_s: f64,
    coupling_ratio: f64,
}

impl CavityParams {
    /// Critically coupled cavity with the given laser wavelength and
    /// energy lifetime.
    pub fn new(wavelength_m: f64, lifetime_s: f64) -> Result<Self> {
        require_positive("wavelength_m", wavelength_m)?;
        require_positive("lifetime_s", lifetime_s)?;
        Ok(Self {
            wavelength_m,
            lifetime_s,
            coupling_ratio: 1.0,
        })
    }

    /// Sets the external coupling relative to critical coupling
    /// (0 = uncoupled, 1 = critical).
    pub fn with_coupling_ratio(mut self, ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::domain("coupling_ratio", ratio, "in [0, 1]"));
        }
        self.coupling_ratio = ratio;
        Ok(self)
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_m
    }

    pub fn lifetime_s(&self) -> f64 {
        self.lifetime_s
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.coupling_ratio
    }

    /// Laser angular frequency `Omega = 2 pi c / lambda`, rad/s.
    pub fn optical_angular_frequency(&self) -> f64 {
        TWO_PI * SPEED_OF_LIGHT / self.wavelength_m
    }

    pub fn quality_factor(&self) -> f64 {
        self.optical_angular_frequency() * self.lifetime_s
    }

    /// Total energy decay rate `kappa = 1 / tau_e`, rad/s.
    pub fn kappa(&self) -> f64 {
        1.0 / self.lifetime_s
    }

    /// External (coupler) energy decay rate, rad/s.
    pub fn kappa_external(&self) -> f64 {
        0.5 * self.coupling_ratio * self.kappa()
    }

    /// Full linewidth `kappa / 2 pi`, Hz.
    pub fn linewidth_hz(&self) -> f64 {
        self.kappa() / TWO_PI
    }

    /// Half-width at half-maximum `kappa / 4 pi`, Hz. Bounds the usable lock range.
    pub fn half_linewidth_hz(&self) -> f64 {
        0.5 * self.linewidth_hz()
    }
}

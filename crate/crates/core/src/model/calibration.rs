use crate::error::{require_positive, Error, Result};

/// Reference tone used to anchor the sensitivity scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTone {
    /// RMS field amplitude, T.
    pub amplitude_rms_t: f64,
    pub frequency_hz: f64,
    /// Peak-to-floor power ratio, linear.
    pub snr: f64,
    /// Spectrum analyzer resolution bandwidth, Hz.
    pub resolution_bw_hz: f64,
}

impl CalibrationTone {
    pub fn new(amplitude_rms_t: f64, frequency_hz: f64, snr: f64, resolution_bw_hz: f64) -> Result<Self> {
        require_positive("amplitude_rms_t", amplitude_rms_t)?;
        require_positive("frequency_hz", frequency_hz)?;
        require_positive("resolution_bw_hz", resolution_bw_hz)?;
        if !(snr.is_finite() && snr >= 0.0) {
            return Err(Error::domain("snr", snr, "finite and >= 0"));
        }
        Ok(Self {
            amplitude_rms_t,
            frequency_hz,
            snr,
            resolution_bw_hz,
        })
    }

    pub fn from_db(amplitude_rms_t: f64, frequency_hz: f64, snr_db: f64, resolution_bw_hz: f64) -> Result<Self> {
        Self::new(amplitude_rms_t, frequency_hz, db_to_ratio(snr_db), resolution_bw_hz)
    }

    pub fn snr_db(&self) -> f64 {
        ratio_to_db(self.snr)
    }
}

pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid {field} = {value}: must be {requirement}")]
    Domain {
        field: String,
        value: f64,
        requirement: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("lock loop unstable: characteristic polynomial {coefficients:?} has a root on or outside the unit circle")]
    UnstableLoop { coefficients: Vec<f64> },
    #[error("lock lost: residual detuning rms {rms_hz:.4e} Hz exceeds {limit_hz:.4e} Hz")]
    LockLost { rms_hz: f64, limit_hz: f64 },
    #[error("non-finite simulation state at step {step}")]
    NonFinite { step: usize },
    #[error("tone not found at {frequency_hz} Hz")]
    ToneNotFound { frequency_hz: f64 },
    #[error("tone below noise floor (snr = {snr})")]
    BelowNoiseFloor { snr: f64 },
    #[error("no crossover in band {lo_hz} Hz .. {hi_hz} Hz")]
    NoCrossover { lo_hz: f64, hi_hz: f64 },
    #[error("grid error: {0}")]
    Grid(String),
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("fit did not converge after {iterations} iterations: {reason}")]
    Fit { iterations: usize, reason: String },
    /// Wraps an error raised while processing one point of a sweep.
    #[error("{context}: {source}")]
    At {
        context: Context,
        #[source]
        source: Box<Error>,
    },
}

/// Which sweep point an [`Error::At`] refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Context {
    Frequency(f64),
    Amplitude(f64),
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Context::Frequency(hz) => write!(f, "at drive frequency {hz} Hz"),
            Context::Amplitude(t) => write!(f, "at drive amplitude {t} T"),
        }
    }
}

impl Error {
    pub(crate) fn domain(field: impl Into<String>, value: f64, requirement: impl Into<String>) -> Self {
        Error::Domain {
            field: field.into(),
            value,
            requirement: requirement.into(),
        }
    }

    pub(crate) fn at(self, context: Context) -> Self {
        Error::At {
            context,
            source: Box::new(self),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Config(_) => "config",
            Error::UnstableLoop { .. } => "unstable_loop",
            Error::LockLost { .. } => "lock_lost",
            Error::NonFinite { .. } => "non_finite",
            Error::ToneNotFound { .. } => "tone_not_found",
            Error::BelowNoiseFloor { .. } => "below_noise_floor",
            Error::NoCrossover { .. } => "no_crossover",
            Error::Grid(_) => "grid",
            Error::Calibration(_) => "calibration",
            Error::Fit { .. } => "fit",
            Error::At { source, .. } => source.kind(),
        }
    }
}

/// Checks `value > 0` (and finite), naming the field on failure.
pub(crate) fn require_positive(field: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(field, value, "finite and > 0"))
    }
}

pub(crate) fn require_non_negative(field: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(field, value, "finite and >= 0"))
    }
}

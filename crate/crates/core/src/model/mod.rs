//! Physical domain types and closed-form parameter relations.

mod cavity;
mod calibration;
mod mechanics;
mod noise;
mod scenario;

pub use calibration::{db_to_ratio, ratio_to_db, CalibrationTone};
pub use cavity::{linewidth_from_lifetime, q_from_lifetime, CavityParams};
pub use mechanics::MechanicalMode;
pub use noise::NoiseParams;
pub use scenario::{
    BackgroundResponse, CalibrationTargets, DriveProgram, DynamicRangeSettings, InstrumentSettings,
    PdhSettings, PidSettings, RingdownSettings, Scenario, SweepSettings, Tone, log_spaced,
    DEFAULT_ACTUATION_GAIN_HZ_PER_T, DEFAULT_MODE_FREQUENCIES_HZ,
};

/// Vacuum speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

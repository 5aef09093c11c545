//! Data reduction: ringdown fitting, sensitivity calibration, linearity and
//! noise-crossover analysis.

mod calibration;
mod crossover;
mod export;
mod fit;
mod linearity;
pub mod pipeline;
mod sensitivity;

pub use calibration::{calibrate, CalibrationReport, MAX_CALIBRATION_ITERATIONS, SNR_TOLERANCE_DB};
pub use export::MODEL_VERSION;
pub use crossover::{model_noise_traces, noise_crossover};
pub use fit::{fit_exponential, ExponentialFit, FitInit};
pub use linearity::{dynamic_range, linearity_report, LinearityReport, LINEARITY_THRESHOLD};
pub use pipeline::{sensitivity_pipeline, SensitivityRun};
pub use sensitivity::{
    interpolate_log_power, sensitivity_at_reference, sensitivity_spectrum, GridAlignment, SensitivityResult,
    TraceProvenance,
};

//! Time-domain engine for the locked PDH readout.

mod engine;
pub mod noise;
pub mod pdh;
pub mod pid;
pub mod transfer;

pub use engine::{magnetostrictive_force, run, run_stream, RunMetadata, RunOutput, SimState, Simulator, TimeSeries};
pub use noise::thermal_force_psd;
pub use pdh::{pdh_error_baseband, PdhDiscriminator};
pub use pid::Pid;

//! Virtual laboratory instruments: spectrum analyzer, network analyzer and
//! ringdown oscilloscope.

pub mod csv;
mod network;
mod psd;
mod ringdown;
mod snr;

pub use csv::CsvTrace;
pub use network::{
    dwell_time, lock_in, measure_response, measure_tone_amplitude, network_sweep, ResponseTrace, MIN_DWELL_DECAY_TIMES, MIN_DWELL_PERIODS,
    TRANSIENT_FRACTION,
};
pub use psd::{compute_psd, required_samples, segment_length, windowed_power, SpectrumTrace, HANN_ENBW_BINS};
pub use ringdown::{ideal_intensity, ringdown_experiment, RingdownTrace, MAX_RELATIVE_INTENSITY};
pub use snr::{measure_snr, noise_floor, tone_peak_bin, FLOOR_EXCLUSION_BINS, FLOOR_WINDOW_BINS};

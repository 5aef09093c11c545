//! Digital twin of a whispering-gallery-mode optomechanical magnetometer.
//!
//! The crate is split along the measurement chain:
//!
//! - [`model`]: physical parameter types and closed-form relations.
//! - [`dynamics`]: time-domain simulation of the locked Pound-Drever-Hall
//!   readout, including magnetostrictive drive, thermal motion, laser and
//!   detection noise and the PID lock.
//! - [`instruments`]: virtual spectrum analyzer, network analyzer and
//!   ringdown oscilloscope.
//! - [`analysis`]: ringdown fitting, reference-tone and spectral
//!   sensitivity calibration, linearity and noise-crossover analysis.
//!
//! All quantities are SI. Frequencies are stored in Hz; angular conversions
//! happen at the point of use.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod instruments;
pub mod model;
pub mod rng;

pub use error::{Error, Result};

//! End-to-end measurement chains built from the instruments.

use super::sensitivity::{sensitivity_spectrum, GridAlignment, SensitivityResult, TraceProvenance};
use crate::dynamics::{run_stream, RunMetadata};
use crate::error::Result;
use crate::instruments::{compute_psd, measure_snr, network_sweep, required_samples, ResponseTrace, SpectrumTrace};
use crate::model::{CalibrationTone, DriveProgram, Scenario};

/// Random stream of reference-tone runs.
pub const REFERENCE_STREAM: u64 = 1;
/// Random stream of the field-free noise run.
pub const NOISE_STREAM: u64 = 2;

/// Copy of `scenario` long enough for the configured number of averages.
pub fn spectrum_scenario(scenario: &Scenario) -> Scenario {
    let inst = &scenario.instruments;
    let n = required_samples(scenario.sample_rate_hz, inst.rbw_hz, inst.averages);
    scenario.with_duration(n as f64 / scenario.sample_rate_hz)
}

/// Simulates the error signal under `drive` and returns its PSD.
pub fn measure_spectrum(scenario: &Scenario, drive: DriveProgram, stream: u64) -> Result<(SpectrumTrace, RunMetadata)> {
    let run = spectrum_scenario(scenario).with_drive(drive);
    let out = run_stream(&run, stream)?;
    let trace = compute_psd(&out.error_signal, scenario.instruments.rbw_hz)?;
    Ok((trace, out.metadata))
}

/// Spectrum with the reference tone applied, at `frequency_hz`.
pub fn reference_spectrum(scenario: &Scenario, frequency_hz: f64) -> Result<(SpectrumTrace, RunMetadata)> {
    let amp = scenario.instruments.reference_amplitude_t;
    measure_spectrum(scenario, DriveProgram::tone(amp, frequency_hz), REFERENCE_STREAM)
}

/// Field-free spectrum S.
pub fn noise_spectrum(scenario: &Scenario) -> Result<(SpectrumTrace, RunMetadata)> {
    measure_spectrum(scenario, DriveProgram::Off, NOISE_STREAM)
}

/// Reference measurement at `frequency_hz`: simulates the tone and reads
/// its SNR off the spectrum.
pub fn measure_calibration_tone(scenario: &Scenario, frequency_hz: f64) -> Result<(CalibrationTone, SpectrumTrace)> {
    let (trace, _) = reference_spectrum(scenario, frequency_hz)?;
    let snr = measure_snr(&trace, frequency_hz)?;
    let tone = CalibrationTone::new(
        scenario.instruments.reference_amplitude_t,
        frequency_hz,
        snr,
        trace.resolution_bw_hz,
    )?;
    Ok((tone, trace))
}

/// Network sweep over the scenario's configured grid.
pub fn measure_response(scenario: &Scenario) -> Result<ResponseTrace> {
    let sweep = &scenario.instruments.sweep;
    network_sweep(scenario, &sweep.frequencies(), sweep.drive_amplitude_t)
}

#[derive(Debug, Clone)]
pub struct SensitivityRun {
    pub calibration: CalibrationTone,
    pub reference_spectrum: SpectrumTrace,
    /// Field-free spectrum before smoothing.
    pub noise_spectrum: SpectrumTrace,
    pub response: ResponseTrace,
    pub result: SensitivityResult,
}

/// Applies the spectral transfer to already measured traces. `noise` is
/// smoothed over the scenario's configured number of bins first.
pub fn sensitivity_from_traces(
    scenario: &Scenario,
    noise: &SpectrumTrace,
    response: &ResponseTrace,
    calibration: &CalibrationTone,
) -> Result<SensitivityResult> {
    let smoothed = noise.smoothed(scenario.instruments.noise_smoothing_bins);
    let mut result = sensitivity_spectrum(&smoothed, response, calibration, GridAlignment::Resample)?;
    result.spectrum = TraceProvenance {
        label: "noise_spectrum".into(),
        seed: Some(scenario.seed),
    };
    result.response = TraceProvenance {
        label: "network_sweep".into(),
        seed: Some(scenario.seed),
    };
    Ok(result)
}

/// Reference tone, field-free spectrum, network sweep, then the transfer
/// of the reference sensitivity across the spectrum.
pub fn sensitivity_pipeline(scenario: &Scenario) -> Result<SensitivityRun> {
    let (calibration, reference) =
        measure_calibration_tone(scenario, scenario.instruments.reference_frequency_hz)?;
    let (noise, _) = noise_spectrum(scenario)?;
    let response = measure_response(scenario)?;
    let result = sensitivity_from_traces(scenario, &noise, &response, &calibration)?;
    Ok(SensitivityRun {
        calibration,
        reference_spectrum: reference,
        noise_spectrum: noise,
        response,
        result,
    })
}

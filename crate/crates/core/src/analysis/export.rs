//! CSV export of analysis results.

use super::{LinearityReport, SensitivityResult};
use crate::instruments::csv::{format_f64, CsvTrace};

/// Version string written into every exported result header.
pub const MODEL_VERSION: &str = env!("CARGO_PKG_VERSION");

impl SensitivityResult {
    /// `frequency_hz, bmin_t_per_rthz`; undefined points are written as NaN.
    pub fn to_csv(&self) -> CsvTrace {
        let y = self.bmin.iter().map(|b| b.unwrap_or(f64::NAN)).collect();
        let mut csv = CsvTrace::new("frequency_hz", "bmin_t_per_rthz", self.frequencies.clone(), y)
            .with_meta("reference_amplitude_t", format_f64(self.reference.amplitude_rms_t))
            .with_meta("reference_frequency_hz", format_f64(self.reference.frequency_hz))
            .with_meta("reference_snr_db", format_f64(self.reference.snr_db()))
            .with_meta("reference_rbw_hz", format_f64(self.reference.resolution_bw_hz))
            .with_meta("reference_bmin_t_per_rthz", format_f64(self.reference_bmin))
            .with_meta("spectrum_source", &self.spectrum.label)
            .with_meta("response_source", &self.response.label);
        if let Some(seed) = self.spectrum.seed {
            csv = csv.with_meta("spectrum_seed", seed);
        }
        if let Some(seed) = self.response.seed {
            csv = csv.with_meta("response_seed", seed);
        }
        csv.with_meta("model_version", MODEL_VERSION)
    }
}

impl LinearityReport {
    /// `amplitude_t, response` with the fitted line in the header.
    pub fn to_csv(&self) -> CsvTrace {
        let mut csv = CsvTrace::new("amplitude_t", "response", self.amplitudes_t.clone(), self.responses.clone())
            .with_meta("slope", format_f64(self.slope))
            .with_meta("intercept", format_f64(self.intercept))
            .with_meta("max_residual", format_f64(self.max_residual))
            .with_meta("saturation_ceiling_t", format_f64(self.saturation_ceiling_t));
        if let Some(c) = self.linear_ceiling_t {
            csv = csv.with_meta("linear_ceiling_t", format_f64(c));
        }
        csv.with_meta("model_version", MODEL_VERSION)
    }

    /// Relative residual of each point from the fitted line.
    pub fn residuals_csv(&self) -> CsvTrace {
        CsvTrace::new("amplitude_t", "relative_residual", self.amplitudes_t.clone(), self.residuals.clone())
            .with_meta("model_version", MODEL_VERSION)
    }
}

#[cfg(test)]
mod tests {
    use crate::analysis::linearity_report;

    #[test]
    fn linearity_csv_keeps_values() {
        let amps = [1e-6, 2e-6, 4e-6];
        let resp = [2.0, 4.0, 8.0];
        let r = linearity_report(&amps, &resp, 1e-4).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.y, resp);
        let back = crate::instruments::csv::CsvTrace::parse(&csv.to_csv_string()).unwrap();
        assert_eq!(back.x, amps);
        assert_eq!(back.get("slope").unwrap().parse::<f64>().unwrap(), r.slope);
    }
}

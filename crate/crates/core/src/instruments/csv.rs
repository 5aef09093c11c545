//! Two-column CSV traces with a `#`-comment metadata header.
//!
//! ```text
//! # command=spectrum
//! # rbw_hz=3.3e2
//! frequency_hz,value
//! 0e0,1.2e-3
//! ```
//!
//! Numbers are written in shortest round-trip exponential form, so
//! parsing a written file restores every value bit for bit.

use super::{ResponseTrace, RingdownTrace, SpectrumTrace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTrace {
    pub metadata: Vec<(String, String)>,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:e}")
}

impl CsvTrace {
    pub fn new(x_label: &str, y_label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            metadata: Vec::new(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&format!("{},{}\n", self.x_label, self.y_label));
        for (x, y) in self.x.iter().zip(&self.y) {
            out.push_str(&format_f64(*x));
            out.push(',');
            out.push_str(&format_f64(*y));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut labels: Option<(String, String)> = None;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("line {}: expected two comma-separated columns", i + 1)))?;
            if labels.is_none() {
                labels = Some((a.trim().to_string(), b.trim().to_string()));
                continue;
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("line {}: {e}: {s:?}", i + 1)))
            };
            x.push(parse(a)?);
            y.push(parse(b)?);
        }
        let (x_label, y_label) = labels.ok_or_else(|| Error::Config("missing column header".into()))?;
        Ok(Self {
            metadata,
            x_label,
            y_label,
            x,
            y,
        })
    }

    fn meta_f64(&self, key: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing metadata key {key}")))?
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("metadata {key}: {e}")))
    }
}

impl SpectrumTrace {
    pub fn to_csv(&self) -> CsvTrace {
        CsvTrace::new("frequency_hz", "value", self.frequencies.clone(), self.psd.clone())
            .with_meta("rbw_hz", format_f64(self.resolution_bw_hz))
            .with_meta("window", &self.window)
            .with_meta("averages", self.averages)
    }

    /// Imports a spectrum written by [`SpectrumTrace::to_csv`] or an
    /// external instrument export with an `rbw_hz` header entry.
    pub fn from_csv(csv: &CsvTrace) -> Result<Self> {
        let mut t = SpectrumTrace::new(csv.x.clone(), csv.y.clone(), csv.meta_f64("rbw_hz")?)?;
        if let Some(w) = csv.get("window") {
            t.window = w.into();
        }
        if let Some(a) = csv.get("averages").and_then(|a| a.parse().ok()) {
            t.averages = a;
        }
        Ok(t)
    }
}

impl ResponseTrace {
    pub fn to_csv(&self) -> CsvTrace {
        CsvTrace::new("frequency_hz", "value", self.frequencies.clone(), self.response.clone())
            .with_meta("drive_amplitude_t", format_f64(self.drive_amplitude_t))
    }

    pub fn from_csv(csv: &CsvTrace) -> Result<Self> {
        ResponseTrace::new(csv.x.clone(), csv.y.clone(), csv.meta_f64("drive_amplitude_t")?)
    }
}

impl RingdownTrace {
    pub fn to_csv(&self) -> CsvTrace {
        CsvTrace::new("time_s", "value", self.times_s.clone(), self.intensity.clone())
            .with_meta("shutter_time_s", format_f64(self.shutter_time_s))
    }

    pub fn from_csv(csv: &CsvTrace) -> Result<Self> {
        Ok(RingdownTrace {
            times_s: csv.x.clone(),
            intensity: csv.y.clone(),
            shutter_time_s: csv.meta_f64("shutter_time_s")?,
        })
    }
}

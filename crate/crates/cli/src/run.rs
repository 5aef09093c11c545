//! The experiment commands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::ValueEnum;
use optomag::analysis::pipeline::{measure_spectrum, REFERENCE_STREAM};
use optomag::analysis::{calibrate, dynamic_range, fit_exponential, sensitivity_pipeline, LINEARITY_THRESHOLD};
use optomag::instruments::csv::{format_f64, CsvTrace};
use optomag::instruments::{measure_snr, network_sweep, ringdown_experiment};
use optomag::model::{q_from_lifetime, ratio_to_db, DriveProgram, Scenario};
use optomag::rng::stream_rng;
use sha2::{Digest, Sha256};

use crate::config::{parse_scenario, ScenarioFile, BUNDLED_DEFAULT, BUNDLED_DEFAULT_PATH};
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

/// Random stream of the ringdown oscilloscope.
pub const RINGDOWN_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Cavity ringdown trace and lifetime fit.
    Ringdown,
    /// Error-signal spectrum with the reference tone (or the configured drive).
    Spectrum,
    /// Network-analyzer sweep of the field response.
    Network,
    /// Reference calibration, noise spectrum, sweep and sensitivity spectrum.
    Sensitivity,
    /// Response versus drive amplitude and linearity report.
    Dynrange,
    /// Tune actuation and phase noise to the calibration targets.
    Calibrate,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Ringdown => "ringdown",
            Command::Spectrum => "spectrum",
            Command::Network => "network",
            Command::Sensitivity => "sensitivity",
            Command::Dynrange => "dynrange",
            Command::Calibrate => "calibrate",
        };
        f.write_str(name)
    }
}

/// Linear frequency grid given as `lo:hi:points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqRange {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub points: usize,
}

impl FromStr for FreqRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:points, got {s:?}"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let (lo_hz, hi_hz) = (num(lo)?, num(hi)?);
        let points = n.trim().parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
        if !(lo_hz > 0.0 && hi_hz >= lo_hz && points >= 1) || (points > 1 && hi_hz == lo_hz) {
            return Err(format!("need 0 < lo < hi and points >= 1, got {s:?}"));
        }
        Ok(Self { lo_hz, hi_hz, points })
    }
}

/// Command-line overrides of scenario values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub freq_range: Option<FreqRange>,
    pub rbw_hz: Option<f64>,
}

impl Overrides {
    fn apply(&self, command: Command, s: &mut Scenario) -> Result<()> {
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(r) = self.freq_range {
            if !matches!(command, Command::Network | Command::Sensitivity) {
                return Err(CliError::Usage(format!("--freq-range does not apply to {command}")));
            }
            s.instruments.sweep.start_hz = r.lo_hz;
            s.instruments.sweep.stop_hz = r.hi_hz;
            s.instruments.sweep.points = r.points;
        }
        if let Some(rbw) = self.rbw_hz {
            if !matches!(command, Command::Spectrum | Command::Sensitivity | Command::Calibrate) {
                return Err(CliError::Usage(format!("--rbw does not apply to {command}")));
            }
            s.instruments.rbw_hz = rbw;
        }
        s.validate().map_err(CliError::Model)
    }
}

/// Scenario text plus where it came from.
#[derive(Debug, Clone)]
pub struct ScenarioSource {
    pub path: String,
    pub text: String,
}

impl ScenarioSource {
    pub fn bundled() -> Self {
        Self {
            path: BUNDLED_DEFAULT_PATH.into(),
            text: BUNDLED_DEFAULT.into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            text,
        })
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        parse_scenario(&self.text, &self.path)
    }
}

/// Header keys common to every output file.
struct Header {
    command: Command,
    seed: u64,
    sha256: String,
}

struct Outputs<'a> {
    dir: &'a Path,
    header: Header,
    written: Vec<String>,
}

impl Outputs<'_> {
    fn header_lines(&self, units: &str) -> String {
        let h = &self.header;
        format!(
            "# command={}\n# seed={}\n# scenario_sha256={}\n# units={units}\n",
            h.command, h.seed, h.sha256
        )
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(path, e))?;
        self.written.push(name.into());
        Ok(())
    }

    fn csv(&mut self, name: &str, units: &str, trace: CsvTrace) -> Result<()> {
        let text = self.header_lines(units) + &trace.to_csv_string();
        self.write_text(name, &text)
    }
}

/// Runs `command` on the scenario, writes its outputs and the manifest
/// into `out_dir` (created if missing) and returns the manifest.
pub fn run_command(
    command: Command,
    source: &ScenarioSource,
    overrides: &Overrides,
    out_dir: &Path,
) -> Result<RunManifest> {
    let started = Instant::now();
    let mut scenario = source.scenario()?;
    overrides.apply(command, &mut scenario)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut out = Outputs {
        dir: out_dir,
        header: Header {
            command,
            seed: scenario.seed,
            sha256: source.sha256(),
        },
        written: Vec::new(),
    };
    match command {
        Command::Ringdown => ringdown(&scenario, &mut out)?,
        Command::Spectrum => spectrum(&scenario, &mut out)?,
        Command::Network => network(&scenario, &mut out)?,
        Command::Sensitivity => sensitivity(&scenario, &mut out)?,
        Command::Dynrange => dynrange(&scenario, &mut out)?,
        Command::Calibrate => calibration(&scenario, &mut out)?,
    }
    let manifest = RunManifest {
        command: command.to_string(),
        scenario_path: source.path.clone(),
        scenario_sha256: out.header.sha256.clone(),
        seed: scenario.seed,
        outputs: out.written,
        wall_clock_s: started.elapsed().as_secs_f64(),
        software_version: env!("CARGO_PKG_VERSION").into(),
    };
    manifest.verify(out_dir)?;
    manifest.write(out_dir)?;
    Ok(manifest)
}

fn ringdown(s: &Scenario, out: &mut Outputs) -> Result<()> {
    let settings = &s.instruments.ringdown;
    let mut rng = stream_rng(s.seed, RINGDOWN_STREAM, 0);
    let trace = ringdown_experiment(&s.cavity, settings, &mut rng)?;
    let fit = fit_exponential(&trace, settings.fit_window_s)?;
    let q = q_from_lifetime(fit.lifetime_s, s.cavity.wavelength_m())?;
    let csv = trace
        .to_csv()
        .with_meta("noise_level", format_f64(settings.noise_level))
        .with_meta("fit_window_start_s", format_f64(settings.fit_window_s.0))
        .with_meta("fit_window_stop_s", format_f64(settings.fit_window_s.1))
        .with_meta("fit_lifetime_s", format_f64(fit.lifetime_s))
        .with_meta("fit_amplitude", format_f64(fit.amplitude))
        .with_meta("fit_residual_rms", format_f64(fit.residual_rms))
        .with_meta("fit_iterations", fit.iterations)
        .with_meta("quality_factor", format_f64(q));
    out.csv("ringdown.csv", "time_s; intensity relative to pre-shutter level", csv)
}

fn spectrum(s: &Scenario, out: &mut Outputs) -> Result<()> {
    let drive = if s.drive.is_off() {
        DriveProgram::tone(s.instruments.reference_amplitude_t, s.instruments.reference_frequency_hz)
    } else {
        s.drive.clone()
    };
    let (trace, meta) = measure_spectrum(s, drive.clone(), REFERENCE_STREAM)?;
    let mut csv = trace
        .to_csv()
        .with_meta("lock_rms_hz", format_f64(meta.lock_rms_hz))
        .with_meta("saturation_warning", meta.saturation_warning);
    if let DriveProgram::Tones(tones) = &drive {
        for (i, tone) in tones.iter().enumerate() {
            let snr = measure_snr(&trace, tone.frequency_hz)?;
            csv = csv
                .with_meta(&format!("tone{i}_frequency_hz"), format_f64(tone.frequency_hz))
                .with_meta(&format!("tone{i}_amplitude_t"), format_f64(tone.amplitude_rms_t))
                .with_meta(&format!("tone{i}_snr_db"), format_f64(ratio_to_db(snr)));
        }
    }
    out.csv("spectrum.csv", "frequency_hz; error-signal psd Hz^2/Hz", csv)
}

fn network(s: &Scenario, out: &mut Outputs) -> Result<()> {
    let sweep = &s.instruments.sweep;
    let trace = network_sweep(s, &sweep.frequencies(), sweep.drive_amplitude_t)?;
    out.csv("network.csv", "frequency_hz; response Hz^2/T^2", trace.to_csv())
}

fn sensitivity(s: &Scenario, out: &mut Outputs) -> Result<()> {
    let run = sensitivity_pipeline(s)?;
    let mut csv = run.result.to_csv();
    if let Some((f, b)) = run.result.minimum(s.instruments.minimum_smoothing_bins) {
        csv = csv
            .with_meta("minimum_frequency_hz", format_f64(f))
            .with_meta("minimum_bmin_t_per_rthz", format_f64(b))
            .with_meta("minimum_smoothing_bins", s.instruments.minimum_smoothing_bins);
    }
    out.csv("sensitivity.csv", "frequency_hz; field sensitivity T/sqrt(Hz)", csv)?;
    out.csv(
        "reference_spectrum.csv",
        "frequency_hz; error-signal psd Hz^2/Hz",
        run.reference_spectrum.to_csv(),
    )?;
    out.csv(
        "noise_spectrum.csv",
        "frequency_hz; error-signal psd Hz^2/Hz",
        run.noise_spectrum.to_csv(),
    )?;
    out.csv("response.csv", "frequency_hz; response Hz^2/T^2", run.response.to_csv())
}

fn dynrange(s: &Scenario, out: &mut Outputs) -> Result<()> {
    let settings = &s.instruments.dynamic_range;
    let report = dynamic_range(s, &settings.amplitudes_t, settings.tone_hz)?;
    let csv = report
        .to_csv()
        .with_meta("tone_hz", format_f64(settings.tone_hz))
        .with_meta("linear", report.max_residual < LINEARITY_THRESHOLD);
    out.csv("dynrange.csv", "amplitude_t; error-signal tone amplitude Hz", csv)?;
    out.csv(
        "dynrange_residuals.csv",
        "amplitude_t; relative residual",
        report.residuals_csv(),
    )
}

fn calibration(s: &Scenario, out: &mut Outputs) -> Result<()> {
    let (calibrated, report) = calibrate(s)?;
    let (x, y) = report.history.iter().copied().unzip();
    let csv = CsvTrace::new("actuation_scale", "snr_db", x, y)
        .with_meta("final_actuation_scale", format_f64(report.actuation_scale))
        .with_meta("phase_psd_amplitude", format_f64(report.phase_psd_amplitude))
        .with_meta("final_snr_db", format_f64(report.final_snr_db))
        .with_meta("target_snr_db", format_f64(report.target_snr_db))
        .with_meta("crossover_hz", format_f64(report.crossover_hz));
    out.csv("calibration.csv", "actuation scale (dimensionless); snr dB", csv)?;
    let toml = ScenarioFile::from_scenario("calibrated", &calibrated).to_toml()?;
    let text = out.header_lines("SI") + &toml;
    out.write_text("calibrated_scenario.toml", &text)
}

/// Default output directory for a command.
pub fn default_out_dir(command: Command) -> PathBuf {
    PathBuf::from("out").join(command.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freq_range_parses() {
        let r: FreqRange = "1e3:2e5:11".parse().unwrap();
        assert_eq!((r.lo_hz, r.hi_hz, r.points), (1e3, 2e5, 11));
        assert!("1e3:2e5".parse::<FreqRange>().is_err());
        assert!("5e3:1e3:3".parse::<FreqRange>().is_err());
        assert!("1e3:2e3:x".parse::<FreqRange>().is_err());
    }

    #[test]
    fn edited_scenario_changes_hash() {
        let a = ScenarioSource::bundled();
        let mut b = a.clone();
        b.text = b.text.replace("seed = 20161127", "seed = 1");
        assert_ne!(a.sha256(), b.sha256());
        assert_eq!(a.sha256().len(), 64);
    }

    #[test]
    fn overrides_reject_inapplicable_flags() {
        let mut s = Scenario::default_device();
        let o = Overrides {
            rbw_hz: Some(100.0),
            ..Default::default()
        };
        assert!(o.apply(Command::Ringdown, &mut s).is_err());
        let o = Overrides {
            seed: Some(3),
            ..Default::default()
        };
        o.apply(Command::Ringdown, &mut s).unwrap();
        assert_eq!(s.seed, 3);
    }

    #[test]
    fn ringdown_writes_manifest_and_headers() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_command(Command::Ringdown, &ScenarioSource::bundled(), &Overrides::default(), dir.path()).unwrap();
        assert_eq!(m.outputs, vec!["ringdown.csv".to_string()]);
        assert_eq!(RunManifest::read(dir.path()).unwrap(), m);
        let csv = CsvTrace::parse(&std::fs::read_to_string(dir.path().join("ringdown.csv")).unwrap()).unwrap();
        assert_eq!(csv.get("command"), Some("ringdown"));
        assert_eq!(csv.get("seed"), Some("20161127"));
        let tau: f64 = csv.get("fit_lifetime_s").unwrap().parse().unwrap();
        assert!((tau / 233e-9 - 1.0).abs() < 0.02);
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use optomag_cli::run::default_out_dir;
use optomag_cli::{run_command, CliError, Command, FreqRange, Overrides, ScenarioSource};

/// Virtual experiments on a whispering-gallery-mode optomechanical
/// magnetometer.
#[derive(Debug, Parser)]
#[command(name = "optomag", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (TOML). Defaults to the bundled default scenario.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory. Defaults to out/<command>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep grid as lo:hi:points (Hz), for network and sensitivity.
    #[arg(long, value_name = "LO:HI:POINTS")]
    freq_range: Option<FreqRange>,
    /// Resolution bandwidth, Hz.
    #[arg(long)]
    rbw: Option<f64>,
}

fn write_error_record(dir: &std::path::Path, command: Command, err: &CliError) {
    let record = serde_json::json!({
        "command": command.to_string(),
        "kind": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
    });
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("error.json"), format!("{record:#}\n"));
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out = args.out.clone().unwrap_or_else(|| default_out_dir(args.command));
    let overrides = Overrides {
        seed: args.seed,
        freq_range: args.freq_range,
        rbw_hz: args.rbw,
    };
    let result = match &args.scenario {
        Some(path) => ScenarioSource::load(path),
        None => Ok(ScenarioSource::bundled()),
    }
    .and_then(|source| run_command(args.command, &source, &overrides, &out));
    match result {
        Ok(manifest) => {
            println!(
                "{}: wrote {} file(s) to {} in {:.1} s",
                manifest.command,
                manifest.outputs.len(),
                out.display(),
                manifest.wall_clock_s
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error [{}]: {err}", err.kind());
            write_error_record(&out, args.command, &err);
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

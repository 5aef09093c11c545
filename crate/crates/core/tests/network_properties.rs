use optomag::analysis::dynamic_range;
use optomag::dynamics::transfer::response_power;
use optomag::dynamics::run;
use optomag::instruments::{lock_in, measure_response, network_sweep};
use optomag::model::{log_spaced, DriveProgram, Scenario, Tone};

#[test]
fn response_is_independent_of_drive_amplitude() {
    let s = Scenario::default_device();
    for f in [69.8e3, 124e3, 200e3] {
        let a = measure_response(&s, f, 7.8e-6).unwrap();
        let b = measure_response(&s, f, 3.9e-6).unwrap();
        assert!((a / b - 1.0).abs() < 0.01, "{f}: {a} vs {b}");
    }
}

#[test]
fn linear_over_two_decades() {
    let s = Scenario::default_device();
    let amps = log_spaced(0.5e-6, 50e-6, 5);
    let r = dynamic_range(&s, &amps, 200e3).unwrap();
    assert!(r.max_residual < 0.005, "{:?}", r.residuals);
}

#[test]
fn two_tones_superpose() {
    let s = Scenario::default_device().noiseless().with_duration(4e-3);
    let (f1, f2) = (100e3, 180e3);
    let single = |f: f64| {
        let out = run(&s.with_drive(DriveProgram::tone(5e-6, f))).unwrap();
        lock_in(&out.error_signal.samples, s.sample_rate_hz, f, 4000)
    };
    let both = run(&s.with_drive(DriveProgram::Tones(vec![Tone::new(5e-6, f1), Tone::new(5e-6, f2)]))).unwrap();
    for f in [f1, f2] {
        let alone = single(f);
        let mixed = lock_in(&both.error_signal.samples, s.sample_rate_hz, f, 4000);
        assert!((mixed - alone).norm() / alone.norm() < 0.01, "{f}");
    }
}

#[test]
fn response_rolls_off_above_resonances() {
    let s = Scenario::default_device();
    let top = 10.0 * s.highest_mode_frequency();
    let r = network_sweep(&s, &[69.8e3, top], 7.8e-6).unwrap();
    let db = 10.0 * (r.response[0] / r.response[1]).log10();
    assert!(db >= 20.0, "{db} dB");
}

#[test]
fn sweep_is_repeatable_and_ordered() {
    let s = Scenario::default_device();
    let f = [150e3, 30e3, 90e3];
    let a = network_sweep(&s, &f, 7.8e-6);
    // Unsorted grids are rejected by the trace invariant.
    assert!(a.is_err());
    let f = [30e3, 90e3, 150e3];
    let a = network_sweep(&s, &f, 7.8e-6).unwrap();
    let b = network_sweep(&s, &f, 7.8e-6).unwrap();
    assert_eq!(a, b);
    for (fi, ni) in f.iter().zip(&a.response) {
        assert!((ni / response_power(&s, *fi) - 1.0).abs() < 0.02);
    }
}

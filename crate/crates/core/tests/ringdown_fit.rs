use optomag::analysis::fit_exponential;
use optomag::instruments::ringdown_experiment;
use optomag::model::{q_from_lifetime, CavityParams, Scenario};
use optomag::rng::stream_rng;

#[test]
fn recovers_lifetime_in_noise() {
    let s = Scenario::default_device();
    let settings = s.instruments.ringdown;
    let mut good = 0;
    for seed in 0..100 {
        let mut rng = stream_rng(seed, 0, 0);
        let trace = ringdown_experiment(&s.cavity, &settings, &mut rng).unwrap();
        let fit = fit_exponential(&trace, settings.fit_window_s).unwrap();
        if (fit.lifetime_s / 233e-9 - 1.0).abs() < 0.01 {
            good += 1;
        }
    }
    assert!(good >= 95, "{good} of 100");
}

#[test]
fn fitted_lifetime_gives_quality_factor() {
    let cavity = CavityParams::new(1550e-9, 233e-9).unwrap();
    let mut settings = Scenario::default_device().instruments.ringdown;
    settings.noise_level = 0.0;
    let mut rng = stream_rng(1, 0, 0);
    let trace = ringdown_experiment(&cavity, &settings, &mut rng).unwrap();
    let fit = fit_exponential(&trace, settings.fit_window_s).unwrap();
    assert!((fit.lifetime_s / 233e-9 - 1.0).abs() < 1e-4);
    let q = q_from_lifetime(fit.lifetime_s, 1550e-9).unwrap();
    assert!((q / 2.8e8 - 1.0).abs() < 0.02);
}

//! Checks the baseband discriminator against a full-rate simulation of the
//! phase-modulated field, the cavity and the mixer.

use num_complex::Complex64;
use optomag::dynamics::PdhDiscriminator;
use optomag::model::{CavityParams, PdhSettings};
use std::f64::consts::TAU;

/// Integrates `a' = -(kappa/2) a + sqrt(kappa_ex) s_in` with RK4, forms the
/// reflected power and demodulates it at the modulation frequency.
fn synthesize(cavity: &CavityParams, settings: &PdhSettings, phase: f64, detuning_hz: f64) -> f64 {
    let kappa = cavity.kappa();
    let root_kex = cavity.kappa_external().sqrt();
    let omega = TAU * settings.modulation_hz;
    let delta = TAU * detuning_hz;
    let beta = settings.modulation_depth_rad;
    let period = 1.0 / settings.modulation_hz;
    let dt = period / 256.0;
    let input = |t: f64| Complex64::from_polar(1.0, delta * t + beta * (omega * t).sin());
    let deriv = |t: f64, a: Complex64| -0.5 * kappa * a + root_kex * input(t);

    let settle_periods = (30.0 * cavity.lifetime_s() / period).ceil() as usize;
    let average_periods = 40;
    let mut a = Complex64::new(0.0, 0.0);
    let mut t = 0.0;
    let mut sum = 0.0;
    let mut count = 0usize;
    for step in 0..(settle_periods + average_periods) * 256 {
        if step >= settle_periods * 256 {
            let out = input(t) - root_kex * a;
            sum += out.norm_sqr() * (omega * t + phase).cos();
            count += 1;
        }
        let k1 = deriv(t, a);
        let k2 = deriv(t + 0.5 * dt, a + 0.5 * dt * k1);
        let k3 = deriv(t + 0.5 * dt, a + 0.5 * dt * k2);
        let k4 = deriv(t + dt, a + dt * k3);
        a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
    }
    2.0 * sum / count as f64
}

#[test]
fn baseband_matches_full_rate_synthesis() {
    let cavity = CavityParams::new(1550e-9, 233e-9).unwrap();
    let settings = PdhSettings::half_power(13.6e6);
    let d = PdhDiscriminator::new(&cavity, &settings).unwrap();
    let span = cavity.linewidth_hz();
    for i in -8..=8 {
        if i == 0 {
            continue;
        }
        let delta = span * i as f64 / 8.0;
        let full = synthesize(&cavity, &settings, d.demodulation_phase(), delta);
        let base = d.error(delta);
        assert!((full / base - 1.0).abs() < 0.01, "detuning {delta}: synthesized {full}, baseband {base}");
    }
}

#[test]
fn synthesis_vanishes_on_resonance() {
    let cavity = CavityParams::new(1550e-9, 233e-9).unwrap();
    let settings = PdhSettings::half_power(13.6e6);
    let d = PdhDiscriminator::new(&cavity, &settings).unwrap();
    let near = synthesize(&cavity, &settings, d.demodulation_phase(), 0.0);
    let scale = d.error(0.1 * cavity.linewidth_hz()).abs();
    assert!(near.abs() < 1e-3 * scale);
}

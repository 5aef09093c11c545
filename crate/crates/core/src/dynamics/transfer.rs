//! Closed-form small-signal response of the locked readout.

use num_complex::Complex64;

use crate::model::{Scenario, TWO_PI};

/// Cavity detuning per applied field at `frequency_hz`, Hz/T: sum of the
/// driven mechanical modes and the broadband background.
pub fn detuning_response(scenario: &Scenario, frequency_hz: f64) -> Complex64 {
    let w = TWO_PI * frequency_hz;
    let modal: Complex64 = scenario
        .modes
        .iter()
        .map(|m| {
            let wm = m.angular_frequency();
            let gain = m.transduction_hz_per_m() * m.actuation_n_per_t() / m.effective_mass_kg();
            gain / Complex64::new(wm * wm - w * w, m.damping_rate() * w)
        })
        .sum();
    modal + scenario.background.response(frequency_hz)
}

/// Fraction of a detuning disturbance that remains in the error signal
/// under the sampled lock loop, `1 / (1 + z^-1 C(z))`.
pub fn loop_sensitivity(scenario: &Scenario, frequency_hz: f64) -> Complex64 {
    let dt = scenario.time_step();
    let zi = Complex64::from_polar(1.0, -TWO_PI * frequency_hz * dt);
    let one = Complex64::new(1.0, 0.0);
    let p = &scenario.pid;
    let integral = if p.ki == 0.0 { Complex64::new(0.0, 0.0) } else { p.ki * dt / (one - zi) };
    let controller = p.kp + integral + p.kd / dt * (one - zi);
    one / (one + zi * controller)
}

/// Error-signal response to applied field, Hz/T.
pub fn error_response(scenario: &Scenario, frequency_hz: f64) -> Complex64 {
    detuning_response(scenario, frequency_hz) * loop_sensitivity(scenario, frequency_hz)
}

/// Tone power in the error signal per unit drive power, Hz^2/T^2.
pub fn response_power(scenario: &Scenario, frequency_hz: f64) -> f64 {
    error_response(scenario, frequency_hz).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PidSettings;

    #[test]
    fn static_limit_sums_mode_weights() {
        let mut s = Scenario::default_device();
        s.pid = PidSettings::disabled();
        let expected: f64 = s.modes.iter().map(|m| m.static_response_hz_per_t()).sum::<f64>()
            + s.background.gain_hz_per_t;
        let h = detuning_response(&s, 1e-3);
        assert!((h.re / expected - 1.0).abs() < 1e-6);
    }

    #[test]
    fn loop_suppresses_low_frequencies_only() {
        let s = Scenario::default_device();
        assert!(loop_sensitivity(&s, 10.0).norm() < 0.02);
        assert!((loop_sensitivity(&s, 100e3).norm() - 1.0).abs() < 0.02);
    }
}

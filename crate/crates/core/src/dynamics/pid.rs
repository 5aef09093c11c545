use crate::error::{Error, Result};
use crate::model::PidSettings;

/// Discrete PID acting on the normalized error signal. The actuator output
/// is applied to the laser one sample later.
#[derive(Debug, Clone)]
pub struct Pid {
    kp: f64,
    ki_dt: f64,
    kd_over_dt: f64,
    integrator: f64,
    previous_error: f64,
}

impl Pid {
    pub fn new(settings: &PidSettings, dt: f64) -> Self {
        Self {
            kp: settings.kp,
            ki_dt: settings.ki * dt,
            kd_over_dt: settings.kd / dt,
            integrator: 0.0,
            previous_error: 0.0,
        }
    }

    pub fn update(&mut self, error: f64) -> f64 {
        self.integrator += error;
        let derivative = error - self.previous_error;
        self.previous_error = error;
        self.kp * error + self.ki_dt * self.integrator + self.kd_over_dt * derivative
    }

    /// Accumulated error sum times `ki dt`, i.e. the integral term of the output.
    pub fn integral_term(&self) -> f64 {
        self.ki_dt * self.integrator
    }
}

/// Characteristic polynomial of the sampled loop (unit plant gain, one
/// sample actuator delay), highest power first:
/// `z^3 + (a + b + c - 1) z^2 - (a + 2c) z + c` with `a = kp`, `b = ki dt`,
/// `c = kd / dt`. Without integral action the factor `z - 1` cancels and
/// the quadratic `z^2 + (a + c) z - c` is returned.
pub fn loop_polynomial(settings: &PidSettings, dt: f64) -> Vec<f64> {
    let (a, b, c) = (settings.kp, settings.ki * dt, settings.kd / dt);
    if b == 0.0 {
        vec![1.0, a + c, -c]
    } else {
        vec![1.0, a + b + c - 1.0, -(a + 2.0 * c), c]
    }
}

/// True when every root of the polynomial (highest power first) lies
/// strictly inside the unit circle (Schur-Cohn recursion).
pub fn is_schur_stable(coefficients: &[f64]) -> bool {
    // Work with ascending powers: p[k] multiplies z^k.
    let mut p: Vec<f64> = coefficients.iter().rev().copied().collect();
    while p.len() > 1 && p[p.len() - 1] == 0.0 {
        p.pop();
    }
    while p.len() > 1 {
        let n = p.len() - 1;
        let (p0, pn) = (p[0], p[n]);
        if !(p0.abs() < pn.abs()) {
            return false;
        }
        p = (1..=n).map(|k| pn * p[k] - p0 * p[n - k]).collect();
    }
    true
}

pub fn check_loop_stability(settings: &PidSettings, dt: f64) -> Result<()> {
    let poly = loop_polynomial(settings, dt);
    if is_schur_stable(&poly) {
        Ok(())
    } else {
        Err(Error::UnstableLoop {
            coefficients: poly,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Expands prod (z - r_i) for real roots, highest power first.
    fn from_roots(roots: &[f64]) -> Vec<f64> {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= r * ci;
            }
            c = next;
        }
        c
    }

    #[test]
    fn default_integrator_is_stable() {
        let s = PidSettings::integral_with_bandwidth(1e3);
        assert!(check_loop_stability(&s, 0.25e-6).is_ok());
    }

    #[test]
    fn excessive_gain_is_unstable() {
        let s = PidSettings { kp: 2.5, ki: 0.0, kd: 0.0 };
        match check_loop_stability(&s, 0.25e-6) {
            Err(Error::UnstableLoop { coefficients }) => assert_eq!(coefficients.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn proportional_gain_limit() {
        // Proportional only: e[n] = d[n] - kp e[n-1], a root at z = -kp.
        let dt = 1e-6;
        assert!(check_loop_stability(&PidSettings { kp: 0.9, ki: 0.0, kd: 0.0 }, dt).is_ok());
        assert!(check_loop_stability(&PidSettings { kp: 1.1, ki: 0.0, kd: 0.0 }, dt).is_err());
        assert!(check_loop_stability(&PidSettings::disabled(), dt).is_ok());
    }

    #[test]
    fn pid_output_sequence() {
        let mut pid = Pid::new(&PidSettings { kp: 1.0, ki: 10.0, kd: 0.5 }, 0.1);
        assert!((pid.update(1.0) - (1.0 + 1.0 + 5.0)).abs() < 1e-12);
        assert!((pid.update(1.0) - (1.0 + 2.0 + 0.0)).abs() < 1e-12);
        assert!((pid.integral_term() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_loop_simulation_agrees_with_test() {
        // Iterate the loop directly and confirm decay or growth.
        for (settings, stable) in [
            (PidSettings { kp: 0.5, ki: 1e5, kd: 0.0 }, true),
            (PidSettings { kp: 0.0, ki: 3e6, kd: 0.0 }, false),
        ] {
            let dt = 1e-6;
            assert_eq!(check_loop_stability(&settings, dt).is_ok(), stable);
            let mut pid = Pid::new(&settings, dt);
            let mut u = 0.0;
            let mut last = 0.0;
            for n in 0..20_000 {
                let d = if n == 0 { 1.0 } else { 0.0 };
                let e = d - u;
                u = pid.update(e);
                last = e;
            }
            assert_eq!(last.abs() < 1e-6, stable, "{settings:?}");
        }
    }

    proptest! {
        #[test]
        fn matches_root_locations(roots in proptest::collection::vec(-1.5f64..1.5, 1..6)) {
            let inside = roots.iter().all(|r| r.abs() < 1.0 - 1e-6);
            let outside = roots.iter().any(|r| r.abs() > 1.0 + 1e-6);
            let stable = is_schur_stable(&from_roots(&roots));
            if inside { prop_assert!(stable); }
            if outside { prop_assert!(!stable); }
        }
    }
}

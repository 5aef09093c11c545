//! Baseband Pound-Drever-Hall discriminator.
//!
//! The phase-modulated field `exp(i beta sin(Omega t))` is expanded into
//! Bessel sidebands; each reflects off the cavity with
//! `F(D) = 1 - kappa_ex / (kappa/2 + i D)`. The detected power at the
//! modulation frequency is `2 Re(C e^{i Omega t})` with
//! `C = sum_m J_{m+1} J_m F(D + (m+1) Omega) conj(F(D + m Omega))`, and the
//! mixer output is `2 Re(C e^{-i phi})`, in units of input power.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{CavityParams, PdhSettings, TWO_PI};

/// Sideband orders kept on each side of the carrier.
const SIDEBAND_ORDERS: i32 = 8;

/// Bessel function of the first kind, integer order, by power series.
/// Accurate to ~1e-15 for `|x| <= 5`.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let n = order.unsigned_abs();
    let sign = if order < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for k in 1..60 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sign * sum
}

/// Modulation depth at which the carrier keeps half the optical power,
/// `J0(beta)^2 = 1/2`.
pub fn half_power_modulation_depth() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 2.4_f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bessel_j(0, mid).powi(2) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Field reflection coefficient at angular detuning `detuning` (rad/s).
pub fn reflection(cavity: &CavityParams, detuning: f64) -> Complex64 {
    let kex = cavity.kappa_external();
    Complex64::new(1.0, 0.0) - kex / Complex64::new(0.5 * cavity.kappa(), detuning)
}

#[derive(Debug, Clone)]
pub struct PdhDiscriminator {
    half_kappa: f64,
    kappa_ex: f64,
    omega_mod: f64,
    /// `(m, J_{m+1} J_m)` for every retained sideband pair.
    pairs: Vec<(f64, f64)>,
    rotation: Complex64,
    phase: f64,
    slope: f64,
}

impl PdhDiscriminator {
    pub fn new(cavity: &CavityParams, settings: &PdhSettings) -> Result<Self> {
        if !(settings.modulation_hz >= 3.0 * cavity.linewidth_hz()) {
            return Err(Error::Config(format!(
                "PDH modulation frequency {} Hz must be >= 3 x cavity linewidth = {} Hz",
                settings.modulation_hz,
                3.0 * cavity.linewidth_hz()
            )));
        }
        let beta = settings.modulation_depth_rad;
        let pairs = (-SIDEBAND_ORDERS..SIDEBAND_ORDERS)
            .map(|m| (m as f64, bessel_j(m + 1, beta) * bessel_j(m, beta)))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        let mut d = Self {
            half_kappa: 0.5 * cavity.kappa(),
            kappa_ex: cavity.kappa_external(),
            omega_mod: TWO_PI * settings.modulation_hz,
            pairs,
            rotation: Complex64::new(1.0, 0.0),
            phase: 0.0,
            slope: 0.0,
        };
        let derivative = d.carrier_derivative();
        d.phase = settings.demodulation_phase_rad.unwrap_or_else(|| derivative.arg());
        d.rotation = Complex64::from_polar(1.0, -d.phase);
        d.slope = 2.0 * (derivative * d.rotation).re;
        if !(d.slope > 0.0) {
            return Err(Error::Config(format!(
                "demodulation phase {} rad gives non-positive discriminator slope {}",
                d.phase, d.slope
            )));
        }
        Ok(d)
    }

    fn reflect(&self, detuning: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.kappa_ex / Complex64::new(self.half_kappa, detuning)
    }

    /// Complex beat amplitude at the modulation frequency.
    pub fn carrier_term(&self, detuning_hz: f64) -> Complex64 {
        let d = TWO_PI * detuning_hz;
        self.pairs
            .iter()
            .map(|&(m, w)| {
                w * self.reflect(d + (m + 1.0) * self.omega_mod) * self.reflect(d + m * self.omega_mod).conj()
            })
            .sum()
    }

    /// d C / d(detuning in Hz) at zero detuning.
    fn carrier_derivative(&self) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let sum: Complex64 = self
            .pairs
            .iter()
            .map(|&(m, w)| {
                let (d1, d0) = ((m + 1.0) * self.omega_mod, m * self.omega_mod);
                let z1 = Complex64::new(self.half_kappa, d1);
                let z0 = Complex64::new(self.half_kappa, d0);
                let f1 = self.reflect(d1);
                let f0c = self.reflect(d0).conj();
                let df1 = i * self.kappa_ex / (z1 * z1);
                let df0c = -i * self.kappa_ex / (z0.conj() * z0.conj());
                w * (df1 * f0c + f1 * df0c)
            })
            .sum();
        sum * TWO_PI
    }

    fn raw(&self, detuning_hz: f64) -> f64 {
        2.0 * (self.carrier_term(detuning_hz) * self.rotation).re
    }

    /// Demodulated error signal, input-power units. Exactly odd in detuning.
    pub fn error(&self, detuning_hz: f64) -> f64 {
        0.5 * (self.raw(detuning_hz) - self.raw(-detuning_hz))
    }

    /// Error signal divided by the zero-detuning slope: equals the detuning
    /// in Hz for small detunings.
    pub fn normalized(&self, detuning_hz: f64) -> f64 {
        self.error(detuning_hz) / self.slope
    }

    /// Discriminant `d error / d detuning` at zero, per Hz.
    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn demodulation_phase(&self) -> f64 {
        self.phase
    }
}

/// Convenience wrapper for a one-off evaluation.
pub fn pdh_error_baseband(detuning_hz: f64, cavity: &CavityParams, settings: &PdhSettings) -> Result<f64> {
    Ok(PdhDiscriminator::new(cavity, settings)?.error(detuning_hz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup() -> (CavityParams, PdhSettings) {
        (CavityParams::new(1550e-9, 233e-9).unwrap(), PdhSettings::half_power(13.6e6))
    }

    #[test]
    fn bessel_reference_values() {
        // Tabulated values.
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(2, 2.5) - 0.446_059_058_439_617_2).abs() < 1e-14);
        assert!((bessel_j(-1, 1.0) + bessel_j(1, 1.0)).abs() < 1e-16);
        assert!((bessel_j(0, 2.404_825_557_695_773)).abs() < 1e-14);
    }

    #[test]
    fn half_power_depth_splits_power() {
        let b = half_power_modulation_depth();
        assert!((bessel_j(0, b).powi(2) - 0.5).abs() < 1e-12);
        let total: f64 = (-20..=20).map(|n| bessel_j(n, b).powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_at_resonance() {
        let (c, s) = setup();
        let d = PdhDiscriminator::new(&c, &s).unwrap();
        assert_eq!(d.error(0.0), 0.0);
    }

    #[test]
    fn slope_matches_finite_difference() {
        let (c, s) = setup();
        let d = PdhDiscriminator::new(&c, &s).unwrap();
        let h = 1.0;
        let fd = (d.error(h) - d.error(-h)) / (2.0 * h);
        assert!(d.slope() > 0.0);
        assert!((fd / d.slope() - 1.0).abs() < 1e-3, "{fd} vs {}", d.slope());
    }

    #[test]
    fn monotone_inside_half_linewidth() {
        let (c, s) = setup();
        let d = PdhDiscriminator::new(&c, &s).unwrap();
        let lim = c.half_linewidth_hz();
        let mut prev = d.error(-lim);
        for i in 1..=400 {
            let x = -lim + 2.0 * lim * i as f64 / 400.0;
            let e = d.error(x);
            assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn saturates_far_from_resonance() {
        let (c, s) = setup();
        let d = PdhDiscriminator::new(&c, &s).unwrap();
        let k = c.linewidth_hz();
        assert!(d.error(10.0 * k).abs() < d.error(0.5 * k).abs());
    }

    #[test]
    fn low_modulation_frequency_is_rejected() {
        let (c, _) = setup();
        let s = PdhSettings::half_power(2.0 * c.linewidth_hz());
        assert!(matches!(PdhDiscriminator::new(&c, &s), Err(Error::Config(_))));
    }

    #[test]
    fn wrong_quadrature_is_rejected() {
        let (c, mut s) = setup();
        let d = PdhDiscriminator::new(&c, &s).unwrap();
        s.demodulation_phase_rad = Some(d.demodulation_phase() + std::f64::consts::PI);
        assert!(PdhDiscriminator::new(&c, &s).is_err());
    }

    proptest! {
        #[test]
        fn odd_symmetry(delta in -5e6f64..5e6) {
            let (c, s) = setup();
            let d = PdhDiscriminator::new(&c, &s).unwrap();
            let (a, b) = (d.error(delta), d.error(-delta));
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }
}

use crate::error::{Error, Result};
use crate::instruments::RingdownTrace;

const MIN_SAMPLES: usize = 10;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitInit {
    LogLinear,
    /// Used when the window holds non-positive samples.
    Direct,
}

/// Result of fitting `a exp(-t / tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFit {
    pub lifetime_s: f64,
    /// Amplitude referred to `t = 0`.
    pub amplitude: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    pub samples: usize,
    pub init: FitInit,
}

/// Least-squares fit of `a exp(-t / tau)` to the samples inside `window`
/// (inclusive). Levenberg-Marquardt on `(a, 1/tau)`, started from a
/// log-linear regression when every sample is positive.
pub fn fit_exponential(trace: &RingdownTrace, window: (f64, f64)) -> Result<ExponentialFit> {
    let (t0, t1) = window;
    let (first, last) = match (trace.times_s.first(), trace.times_s.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Config("empty ringdown trace".into())),
    };
    if !(t0 < t1 && t0 >= first && t1 <= last) {
        return Err(Error::Config(format!(
            "fit window [{t0}, {t1}] s not inside trace span [{first}, {last}] s"
        )));
    }
    let (ts, ys): (Vec<f64>, Vec<f64>) = trace
        .times_s
        .iter()
        .zip(&trace.intensity)
        .filter(|(t, _)| **t >= t0 && **t <= t1)
        .map(|(t, y)| (t - t0, *y))
        .unzip();
    if ts.len() < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "fit window holds {} samples, need at least {MIN_SAMPLES}",
            ts.len()
        )));
    }
    let (init, start) = if ys.iter().all(|&y| y > 0.0) {
        (FitInit::LogLinear, log_linear(&ts, &ys))
    } else {
        (FitInit::Direct, direct_guess(&ts, &ys))
    };
    let (amp, rate, iterations) = levenberg_marquardt(&ts, &ys, start)?;
    let residual_rms = (ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - amp * (-rate * t).exp()).powi(2))
        .sum::<f64>()
        / ts.len() as f64)
        .sqrt();
    Ok(ExponentialFit {
        lifetime_s: 1.0 / rate,
        amplitude: amp * (rate * t0).exp(),
        residual_rms,
        iterations,
        samples: ts.len(),
        init,
    })
}

/// Straight line through `(t, ln y)`: returns `(amplitude, rate)`.
fn log_linear(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let ml = ly.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in ts.iter().zip(&ly) {
        sxy += (t - mt) * (l - ml);
        sxx += (t - mt) * (t - mt);
    }
    let slope = sxy / sxx;
    ((ml - slope * mt).exp(), -slope)
}

/// Start values from the means of the first and last quarter.
fn direct_guess(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let q = (ts.len() / 4).max(1);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (y0, y1) = (mean(&ys[..q]), mean(&ys[ys.len() - q..]));
    let (ta, tb) = (mean(&ts[..q]), mean(&ts[ts.len() - q..]));
    let span = ts[ts.len() - 1] - ts[0];
    let rate = if y0 > 0.0 && y1 > 0.0 && y0 > y1 {
        (y0 / y1).ln() / (tb - ta)
    } else {
        1.0 / span
    };
    (y0.abs().max(f64::MIN_POSITIVE) * (rate * ta).exp(), rate)
}

fn levenberg_marquardt(ts: &[f64], ys: &[f64], start: (f64, f64)) -> Result<(f64, f64, usize)> {
    // Scale time to the window length so both parameters are O(1).
    let span = ts[ts.len() - 1].max(f64::MIN_POSITIVE);
    let (mut a, mut k) = (start.0, start.1 * span);
    let cost = |a: f64, k: f64| -> f64 {
        ts.iter()
            .zip(ys)
            .map(|(t, y)| (y - a * (-k * t / span).exp()).powi(2))
            .sum()
    };
    let mut current = cost(a, k);
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let (mut jaa, mut jak, mut jkk, mut ga, mut gk) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (t, y) in ts.iter().zip(ys) {
            let u = t / span;
            let e = (-k * u).exp();
            let r = y - a * e;
            let (da, dk) = (e, -a * u * e);
            jaa += da * da;
            jak += da * dk;
            jkk += dk * dk;
            ga += da * r;
            gk += dk * r;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let (m11, m22) = (jaa * (1.0 + lambda), jkk * (1.0 + lambda));
            let det = m11 * m22 - jak * jak;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step_a = (m22 * ga - jak * gk) / det;
            let step_k = (m11 * gk - jak * ga) / det;
            let (na, nk) = (a + step_a, k + step_k);
            let trial = cost(na, nk);
            if trial.is_finite() && trial <= current {
                let small = step_a.abs() <= 1e-12 * a.abs().max(1e-300) && step_k.abs() <= 1e-12 * k.abs().max(1e-300);
                let flat = current - trial <= 1e-15 * current;
                a = na;
                k = nk;
                current = trial;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if small || flat {
                    return finish(a, k, span, iteration);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No descent direction left: at a minimum to working precision.
            return finish(a, k, span, iteration);
        }
    }
    Err(Error::Fit {
        iterations: MAX_ITERATIONS,
        reason: format!("no convergence; last estimate amplitude {a}, rate {}", k / span),
    })
}

fn finish(a: f64, k: f64, span: f64, iterations: usize) -> Result<(f64, f64, usize)> {
    if !(k > 0.0 && a.is_finite() && k.is_finite()) {
        return Err(Error::Fit {
            iterations,
            reason: format!("non-decaying solution: amplitude {a}, rate {}", k / span),
        });
    }
    Ok((a, k / span, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(tau: f64, amp: f64, offset_noise: impl Fn(usize) -> f64) -> RingdownTrace {
        let times_s: Vec<f64> = (0..1500).map(|i| i as f64 * 1e-9).collect();
        let intensity = times_s
            .iter()
            .enumerate()
            .map(|(i, t)| amp * (-t / tau).exp() + offset_noise(i))
            .collect();
        RingdownTrace {
            times_s,
            intensity,
            shutter_time_s: 0.0,
        }
    }

    #[test]
    fn exact_recovery() {
        let t = synthetic(233e-9, 2.0, |_| 0.0);
        let f = fit_exponential(&t, (221e-9, 454e-9)).unwrap();
        assert!((f.lifetime_s / 233e-9 - 1.0).abs() < 1e-4);
        assert!((f.amplitude / 2.0 - 1.0).abs() < 1e-4);
        assert_eq!(f.init, FitInit::LogLinear);
        assert!(f.residual_rms < 1e-12);
    }

    #[test]
    fn falls_back_with_non_positive_samples() {
        let t = synthetic(100e-9, 1.0, |i| if i % 2 == 0 { 0.004 } else { -0.004 });
        let f = fit_exponential(&t, (0.0, 1.4e-6)).unwrap();
        assert_eq!(f.init, FitInit::Direct);
        assert!((f.lifetime_s / 100e-9 - 1.0).abs() < 0.01);
    }

    #[test]
    fn scale_invariant_lifetime() {
        let t = synthetic(233e-9, 1.0, |i| 0.01 * ((i * 7919) % 13) as f64 / 13.0);
        let a = fit_exponential(&t, (221e-9, 454e-9)).unwrap();
        let b = fit_exponential(&t.scaled(5.0), (221e-9, 454e-9)).unwrap();
        assert!((a.lifetime_s / b.lifetime_s - 1.0).abs() < 1e-9);
        assert!((b.amplitude / a.amplitude - 5.0).abs() < 1e-8);
    }

    #[test]
    fn window_checks() {
        let t = synthetic(233e-9, 1.0, |_| 0.0);
        assert!(fit_exponential(&t, (221e-9, 2e-6)).is_err());
        assert!(fit_exponential(&t, (221e-9, 225e-9)).is_err());
    }

    #[test]
    fn rising_data_fails_with_diagnostics() {
        let times_s: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let intensity = times_s.iter().map(|t| (0.05 * t).exp()).collect();
        let t = RingdownTrace {
            times_s,
            intensity,
            shutter_time_s: 0.0,
        };
        assert!(matches!(fit_exponential(&t, (0.0, 99.0)), Err(Error::Fit { .. })));
    }
}

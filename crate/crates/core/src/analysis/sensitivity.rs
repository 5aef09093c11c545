use crate::error::{Error, Result};
use crate::instruments::{ResponseTrace, SpectrumTrace};
use crate::model::CalibrationTone;

/// Smallest detectable field at the reference frequency,
/// `B_ref / sqrt(snr * BW)`, T/sqrt(Hz).
pub fn sensitivity_at_reference(cal: &CalibrationTone) -> Result<f64> {
    if !(cal.snr > 1.0) {
        return Err(Error::BelowNoiseFloor { snr: cal.snr });
    }
    if !(cal.amplitude_rms_t > 0.0) {
        return Err(Error::domain("amplitude_rms_t", cal.amplitude_rms_t, "> 0"));
    }
    if !(cal.resolution_bw_hz > 0.0) {
        return Err(Error::domain("resolution_bw_hz", cal.resolution_bw_hz, "> 0"));
    }
    Ok(cal.amplitude_rms_t / (cal.snr * cal.resolution_bw_hz).sqrt())
}

/// How [`sensitivity_spectrum`] treats differing S and N grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAlignment {
    /// Grids must coincide.
    Exact,
    /// N is interpolated (linearly in log power) onto the S grid.
    Resample,
}

/// Identifies the measurement a trace came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceProvenance {
    pub label: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    pub frequencies: Vec<f64>,
    /// T/sqrt(Hz); `None` where the response vanishes or is not covered.
    pub bmin: Vec<Option<f64>>,
    pub reference: CalibrationTone,
    pub reference_bmin: f64,
    pub spectrum: TraceProvenance,
    pub response: TraceProvenance,
}

impl SensitivityResult {
    /// Location and value of the minimum of a running geometric mean of
    /// `B_min` over `2 half_width + 1` defined points.
    pub fn minimum(&self, half_width: usize) -> Option<(f64, f64)> {
        let defined: Vec<(f64, f64)> = self
            .frequencies
            .iter()
            .zip(&self.bmin)
            .filter_map(|(f, b)| b.map(|b| (*f, b.ln())))
            .collect();
        let n = defined.len();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half_width);
                let hi = (i + half_width).min(n - 1);
                let mean = defined[lo..=hi].iter().map(|p| p.1).sum::<f64>() / (hi - lo + 1) as f64;
                (defined[i].0, mean.exp())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Value at the grid point nearest `frequency_hz`.
    pub fn at(&self, frequency_hz: f64) -> Option<f64> {
        let i = self
            .frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - frequency_hz).abs().total_cmp(&(b.1 - frequency_hz).abs()))?
            .0;
        self.bmin[i]
    }
}

/// Interpolates `(xs, ys)` at `x`, linearly in `ln y` where both
/// neighbours are positive and linearly in `y` otherwise. `None` outside
/// the grid.
pub fn interpolate_log_power(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let n = xs.len();
    if n == 0 || x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let j = xs.partition_point(|&v| v <= x);
    if j == 0 {
        return Some(ys[0]);
    }
    let i = j - 1;
    if xs[i] == x || i + 1 == n {
        return Some(ys[i]);
    }
    let u = (x - xs[i]) / (xs[i + 1] - xs[i]);
    let (a, b) = (ys[i], ys[i + 1]);
    Some(if a > 0.0 && b > 0.0 {
        (a.ln() + u * (b.ln() - a.ln())).exp()
    } else {
        a + u * (b - a)
    })
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()))
}

/// Transfers the reference sensitivity to every frequency:
/// `B_min(f) = sqrt(S(f) N(f_ref) / (S(f_ref) N(f))) B_min(f_ref)`.
pub fn sensitivity_spectrum(
    spectrum: &SpectrumTrace,
    response: &ResponseTrace,
    cal: &CalibrationTone,
    alignment: GridAlignment,
) -> Result<SensitivityResult> {
    let reference_bmin = sensitivity_at_reference(cal)?;
    let grid = &spectrum.frequencies;
    let aligned = same_grid(grid, &response.frequencies);
    if !aligned && alignment == GridAlignment::Exact {
        return Err(Error::Grid(format!(
            "spectrum grid ({} points) and response grid ({} points) differ and resampling is disabled",
            grid.len(),
            response.frequencies.len()
        )));
    }
    let f_ref = cal.frequency_hz;
    let s_ref = interpolate_log_power(grid, &spectrum.psd, f_ref);
    let n_ref = interpolate_log_power(&response.frequencies, &response.response, f_ref);
    let (s_ref, n_ref) = match (s_ref, n_ref) {
        (Some(s), Some(n)) => (s, n),
        _ => {
            return Err(Error::Calibration(format!(
                "reference frequency {f_ref} Hz outside the common grid"
            )))
        }
    };
    if !(s_ref > 0.0 && n_ref > 0.0) {
        return Err(Error::Calibration(format!(
            "S({f_ref} Hz) = {s_ref} and N({f_ref} Hz) = {n_ref} must both be positive"
        )));
    }
    let bmin = grid
        .iter()
        .zip(&spectrum.psd)
        .enumerate()
        .map(|(i, (&f, &s))| {
            let n = if aligned {
                Some(response.response[i])
            } else {
                interpolate_log_power(&response.frequencies, &response.response, f)
            }?;
            if n > 0.0 {
                Some((s * n_ref / (s_ref * n)).sqrt() * reference_bmin)
            } else {
                None
            }
        })
        .collect();
    Ok(SensitivityResult {
        frequencies: grid.clone(),
        bmin,
        reference: *cal,
        reference_bmin,
        spectrum: TraceProvenance {
            label: "spectrum".into(),
            seed: None,
        },
        response: TraceProvenance {
            label: "response".into(),
            seed: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cal(f: f64) -> CalibrationTone {
        CalibrationTone::new(2.0, f, 4.0, 1.0).unwrap()
    }

    fn traces() -> (SpectrumTrace, ResponseTrace) {
        let f: Vec<f64> = (0..11).map(|k| k as f64 * 10.0).collect();
        let s = SpectrumTrace::new(f.clone(), f.iter().map(|x| 1.0 + x).collect(), 1.0).unwrap();
        let n = ResponseTrace::new(f.clone(), f.iter().map(|x| 2.0 + x * x).collect(), 1.0).unwrap();
        (s, n)
    }

    #[test]
    fn reference_formula() {
        let c = CalibrationTone::from_db(7.8e-6, 200e3, 49.7, 330.0).unwrap();
        let b = sensitivity_at_reference(&c).unwrap();
        assert!((b - 1.40e-9).abs() < 0.05e-9, "{b}");
        assert_eq!(sensitivity_at_reference(&cal(1.0)).unwrap(), 1.0);
        let q = CalibrationTone::new(2.0, 1.0, 16.0, 1.0).unwrap();
        assert_eq!(sensitivity_at_reference(&q).unwrap(), 0.5);
        let unity = CalibrationTone::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(sensitivity_at_reference(&unity), Err(Error::BelowNoiseFloor { .. })));
    }

    #[test]
    fn identity_at_reference() {
        let (s, n) = traces();
        let r = sensitivity_spectrum(&s, &n, &cal(30.0), GridAlignment::Exact).unwrap();
        assert_eq!(r.at(30.0), Some(r.reference_bmin));
    }

    #[test]
    fn scaling_laws() {
        let (s, n) = traces();
        let base = sensitivity_spectrum(&s, &n, &cal(30.0), GridAlignment::Exact).unwrap();
        let mut n4 = n.clone();
        n4.response[7] *= 4.0;
        let r = sensitivity_spectrum(&s, &n4, &cal(30.0), GridAlignment::Exact).unwrap();
        assert!((r.bmin[7].unwrap() / base.bmin[7].unwrap() - 0.5).abs() < 1e-12);
        let mut s4 = s.clone();
        s4.psd[7] *= 4.0;
        let r = sensitivity_spectrum(&s4, &n, &cal(30.0), GridAlignment::Exact).unwrap();
        assert!((r.bmin[7].unwrap() / base.bmin[7].unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_response_is_undefined() {
        let (s, mut n) = traces();
        n.response[5] = 0.0;
        let r = sensitivity_spectrum(&s, &n, &cal(30.0), GridAlignment::Exact).unwrap();
        assert_eq!(r.bmin[5], None);
        assert!(r.bmin[4].is_some());
    }

    #[test]
    fn grid_handling() {
        let (s, n) = traces();
        let shifted = ResponseTrace::new(
            n.frequencies.iter().map(|f| f + 5.0).collect(),
            n.response.clone(),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            sensitivity_spectrum(&s, &shifted, &cal(30.0), GridAlignment::Exact),
            Err(Error::Grid(_))
        ));
        let r = sensitivity_spectrum(&s, &shifted, &cal(30.0), GridAlignment::Resample).unwrap();
        assert_eq!(r.bmin[0], None);
        assert!(r.bmin[3].is_some());
        assert!(matches!(
            sensitivity_spectrum(&s, &n, &cal(500.0), GridAlignment::Exact),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn log_interpolation_is_exact_for_exponentials() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 10.0, 100.0];
        assert!((interpolate_log_power(&xs, &ys, 1.5).unwrap() - 10f64.powf(1.5)).abs() < 1e-9);
        assert_eq!(interpolate_log_power(&xs, &ys, 3.0), None);
    }

    proptest! {
        #[test]
        fn gain_cancels(g in 1e-6f64..1e6) {
            let (s, n) = traces();
            let a = sensitivity_spectrum(&s, &n, &cal(30.0), GridAlignment::Exact).unwrap();
            let b = sensitivity_spectrum(&s.scaled(g), &n.scaled(g), &cal(30.0), GridAlignment::Exact).unwrap();
            for (x, y) in a.bmin.iter().zip(&b.bmin) {
                prop_assert!((x.unwrap() / y.unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }
}

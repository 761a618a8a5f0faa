use num_complex::Complex64;

use super::ModeProbeResult;
use crate::{Error, Result};

/// Relative amplitude floor below which log derivatives are discarded.
pub const AMPLITUDE_FLOOR: f64 = 1e-10;

/// `c_k(t)^{-1} dc_k/dt` by finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivativeSeries {
    pub mode: i64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub valid: Vec<bool>,
    /// Mean over valid times.
    pub mean: Complex64,
    /// `max |L - mean| / |mean|`.
    pub complex_variation: f64,
    /// `(max Re L - min Re L) / |mean Re L|`.
    pub real_variation: f64,
}

/// Second-order differences of a uniformly sampled series, one-sided at the ends.
fn derivative(c: &[Complex64], dt: f64) -> Vec<Complex64> {
    let n = c.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * dt)
            } else if i == n - 1 {
                (3.0 * c[n - 1] - 4.0 * c[n - 2] + c[n - 3]) / (2.0 * dt)
            } else {
                (c[i + 1] - c[i - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

pub fn log_derivative(probe: &ModeProbeResult, k: i64) -> Result<LogDerivativeSeries> {
    log_derivative_of(&probe.times, &probe.history(k), k, probe.amplitude.abs())
}

/// Log derivative of an arbitrary uniformly sampled coefficient history.
pub fn log_derivative_of(
    times: &[f64],
    history: &[Complex64],
    mode: i64,
    reference_amplitude: f64,
) -> Result<LogDerivativeSeries> {
    if times.len() < 3 || times.len() != history.len() {
        return Err(Error::Precondition(
            "log derivative needs at least 3 snapshots".into(),
        ));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt)
    {
        return Err(Error::Precondition("snapshots must be uniformly spaced".into()));
    }
    let floor = AMPLITUDE_FLOOR * reference_amplitude;
    let d = derivative(history, dt);
    let mut values = Vec::with_capacity(history.len());
    let mut valid = Vec::with_capacity(history.len());
    for (c, dc) in history.iter().zip(&d) {
        let ok = c.norm() >= floor && c.norm() > 0.0;
        valid.push(ok);
        values.push(if ok { dc / c } else { Complex64::new(f64::NAN, f64::NAN) });
    }
    let good: Vec<Complex64> = values
        .iter()
        .zip(&valid)
        .filter(|(_, &v)| v)
        .map(|(l, _)| *l)
        .collect();
    let (mean, complex_variation, real_variation) = if good.is_empty() {
        (Complex64::new(f64::NAN, f64::NAN), f64::NAN, f64::NAN)
    } else {
        let mean = good.iter().sum::<Complex64>() / good.len() as f64;
        let cv = good.iter().map(|l| (l - mean).norm()).fold(0.0, f64::max) / mean.norm();
        let (lo, hi) = good
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| (a.min(l.re), b.max(l.re)));
        (mean, cv, (hi - lo) / mean.re.abs())
    };
    Ok(LogDerivativeSeries {
        mode,
        times: times.to_vec(),
        values,
        valid,
        mean,
        complex_variation,
        real_variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_is_constant() {
        let lam = Complex64::new(-0.4, -6.0);
        let dt = 0.1 / lam.norm();
        let times: Vec<f64> = (0..30).map(|i| i as f64 * dt).collect();
        let h: Vec<Complex64> = times.iter().map(|&t| (lam * t).exp()).collect();
        let s = log_derivative_of(&times, &h, 1, 1.0).unwrap();
        // Central differences: relative error about (lam dt)^2 / 6.
        assert!(s.complex_variation < 0.01);
        assert!((s.mean - lam).norm() / lam.norm() < 0.01);
        assert!(s.valid.iter().all(|&v| v));
    }

    #[test]
    fn small_amplitudes_marked_invalid() {
        let times = [0.0, 1.0, 2.0, 3.0];
        let h = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(1e-12, 0.0),
            Complex64::new(0.1, 0.0),
        ];
        let s = log_derivative_of(&times, &h, 2, 1.0).unwrap();
        assert_eq!(s.valid, vec![true, true, false, true]);
    }

    #[test]
    fn too_few_snapshots() {
        let h = [Complex64::new(1.0, 0.0); 2];
        assert!(log_derivative_of(&[0.0, 1.0], &h, 1, 1.0).is_err());
    }
}

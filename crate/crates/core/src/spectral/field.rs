use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{WaveGrid, ROUND_TRIP_TOL};
use crate::{Error, Result};

/// Truncated Fourier representation of a real periodic field,
/// coefficients stored for `k = -n_modes ..= n_modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: WaveGrid,
    coefficients: Vec<Complex64>,
    time: f64,
}

impl SpectralField {
    pub fn new(grid: WaveGrid, coefficients: Vec<Complex64>, time: f64) -> Result<Self> {
        if coefficients.len() != grid.n_coeffs() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                grid.n_coeffs(),
                coefficients.len()
            )));
        }
        if !(time >= 0.0) {
            return Err(Error::Domain(format!("time stamp must be >= 0, got {time}")));
        }
        Ok(Self {
            grid,
            coefficients,
            time,
        })
    }

    /// Build from the non-negative half `c_0 ..= c_{n}`; negative
    /// wavenumbers are filled by conjugation.
    pub fn from_half(grid: WaveGrid, half: &[Complex64], time: f64) -> Result<Self> {
        if half.len() != grid.n_modes() + 1 {
            return Err(Error::Shape(format!(
                "expected {} non-negative coefficients, got {}",
                grid.n_modes() + 1,
                half.len()
            )));
        }
        let n = grid.n_modes();
        let mut coefficients = vec![Complex64::new(0.0, 0.0); grid.n_coeffs()];
        coefficients[n] = Complex64::new(half[0].re, 0.0);
        for k in 1..=n {
            coefficients[n + k] = half[k];
            coefficients[n - k] = half[k].conj();
        }
        Self::new(grid, coefficients, time)
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if self.grid.contains(k) {
            self.coefficients[self.grid.index(k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Coefficients `c_0 ..= c_{n_modes}`.
    pub fn half(&self) -> &[Complex64] {
        &self.coefficients[self.grid.n_modes()..]
    }

    pub(crate) fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Largest deviation from `c_{-k} = conj(c_k)`, relative to the largest coefficient.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.n_modes();
        let scale = self
            .coefficients
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut defect = self.coefficients[n].im.abs();
        for k in 1..=n {
            let d = (self.coefficients[n - k] - self.coefficients[n + k].conj()).norm();
            defect = defect.max(d);
        }
        defect / scale
    }

    /// Point evaluation `sum_k c_k exp(i k_x x)` of the real field.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut acc = self.coeff(0).re;
        for (k, c) in self.half().iter().enumerate().skip(1) {
            let phase = self.grid.wavenumber(k as i64) * x;
            acc += 2.0 * (c * Complex64::from_polar(1.0, phase)).re;
        }
        acc
    }
}

/// Discrete Fourier analysis of samples on `grid`.
pub fn analyze(grid: &WaveGrid, values: &[f64]) -> Result<SpectralField> {
    let n_pts = grid.n_points();
    if values.len() != n_pts {
        return Err(Error::Shape(format!(
            "field has {} samples, grid expects {n_pts}",
            values.len()
        )));
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n_pts).process(&mut buf);
    let scale = 1.0 / n_pts as f64;
    let half: Vec<Complex64> = (0..=grid.n_modes()).map(|k| buf[k] * scale).collect();
    SpectralField::from_half(*grid, &half, 0.0)
}

/// Real samples of the field on its grid.
pub fn synthesize(field: &SpectralField) -> Result<Vec<f64>> {
    let defect = field.symmetry_defect();
    if defect > ROUND_TRIP_TOL {
        return Err(Error::Consistency(format!(
            "coefficients are not conjugate symmetric (defect {defect:.3e})"
        )));
    }
    let grid = field.grid();
    let n_pts = grid.n_points();
    let mut buf = vec![Complex64::new(0.0, 0.0); n_pts];
    for k in -(grid.n_modes() as i64)..=grid.n_modes() as i64 {
        let slot = k.rem_euclid(n_pts as i64) as usize;
        buf[slot] += field.coeff(k);
    }
    FftPlanner::new().plan_fft_inverse(n_pts).process(&mut buf);
    Ok(buf.into_iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    #[test]
    fn constant_field_has_only_mean() {
        let g = WaveGrid::minimal(1.0, 8).unwrap();
        let f = analyze(&g, &vec![1.0; g.n_points()]).unwrap();
        assert!((f.coeff(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for k in 1..=8 {
            assert!(f.coeff(k).norm() < 1e-15);
            assert!(f.coeff(-k).norm() < 1e-15);
        }
    }

    #[test]
    fn cosine_is_split_between_plus_minus_one() {
        let g = WaveGrid::minimal(1.0, 8).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| (2.0 * PI * x).cos()).collect();
        let f = analyze(&g, &v).unwrap();
        for k in -8..=8i64 {
            let expect = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.coeff(k) - Complex64::new(expect, 0.0)).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn synthesize_constant_and_cosine() {
        let g = WaveGrid::minimal(1.0, 4).unwrap();
        let mut half = vec![Complex64::new(0.0, 0.0); 5];
        half[0] = Complex64::new(2.0, 0.0);
        let v = synthesize(&SpectralField::from_half(g, &half, 0.0).unwrap()).unwrap();
        assert!(v.iter().all(|x| (x - 2.0).abs() < 1e-14));

        let mut half = vec![Complex64::new(0.0, 0.0); 5];
        half[1] = Complex64::new(0.5, 0.0);
        let v = synthesize(&SpectralField::from_half(g, &half, 0.0).unwrap()).unwrap();
        for (x, y) in g.points().iter().zip(&v) {
            assert!(((2.0 * PI * x).cos() - y).abs() < 1e-14);
        }
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let g = WaveGrid::minimal(1.0, 2).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); 5];
        c[3] = Complex64::new(1.0, 0.0);
        let f = SpectralField::new(g, c, 0.0).unwrap();
        assert!(matches!(synthesize(&f), Err(Error::Consistency(_))));
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        let g = WaveGrid::minimal(1.0, 2).unwrap();
        assert!(matches!(analyze(&g, &[1.0; 4]), Err(Error::Shape(_))));
    }

    #[test]
    fn point_evaluation_matches_synthesis() {
        let g = WaveGrid::minimal(1.0, 6).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| (-(x - 0.3f64).powi(2) / 0.02).exp()).collect();
        let f = analyze(&g, &v).unwrap();
        for (x, y) in g.points().iter().zip(&v) {
            assert!((f.evaluate(*x) - y).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn analyze_synthesize_round_trip(v in prop::collection::vec(-10.0f64..10.0, 33)) {
            let g = WaveGrid::minimal(1.7, 16).unwrap();
            let back = synthesize(&analyze(&g, &v).unwrap()).unwrap();
            let scale = v.iter().fold(1e-300f64, |m, x| m.max(x.abs()));
            for (a, b) in v.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn synthesize_analyze_round_trip(
            re in prop::collection::vec(-1.0f64..1.0, 13),
            im in prop::collection::vec(-1.0f64..1.0, 13),
        ) {
            let g = WaveGrid::minimal(1.0, 12).unwrap();
            let half: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
            let f = SpectralField::from_half(g, &half, 0.0).unwrap();
            let back = analyze(&g, &synthesize(&f).unwrap()).unwrap();
            for (a, b) in f.coefficients().iter().zip(back.coefficients()) {
                prop_assert!((a - b).norm() < 1e-13);
            }
        }
    }
}

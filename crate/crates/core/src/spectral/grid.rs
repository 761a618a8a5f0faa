use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Periodic 1D grid with `n_modes` retained positive wavenumbers and
/// `n_points` equispaced samples `x_i = i * L / n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveGrid {
    domain_length: f64,
    n_modes: usize,
    n_points: usize,
}

impl WaveGrid {
    pub fn new(domain_length: f64, n_modes: usize, n_points: usize) -> Result<Self> {
        if !(domain_length > 0.0) || !domain_length.is_finite() {
            return Err(Error::Domain(format!(
                "domain length must be positive, got {domain_length}"
            )));
        }
        if n_points < 2 * n_modes + 1 {
            return Err(Error::Domain(format!(
                "{n_points} samples cannot resolve {n_modes} modes (need at least {})",
                2 * n_modes + 1
            )));
        }
        Ok(Self {
            domain_length,
            n_modes,
            n_points,
        })
    }

    /// Grid with the minimal sample count `2 n_modes + 1`.
    pub fn minimal(domain_length: f64, n_modes: usize) -> Result<Self> {
        Self::new(domain_length, n_modes, 2 * n_modes + 1)
    }

    /// Largest grid whose modes are resolved by `n_points` samples.
    pub fn for_samples(domain_length: f64, n_points: usize) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::Domain("grid needs at least one sample".into()));
        }
        Self::new(domain_length, (n_points - 1) / 2, n_points)
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Number of stored coefficients, `2 n_modes + 1`.
    pub fn n_coeffs(&self) -> usize {
        2 * self.n_modes + 1
    }

    /// Angular wavenumber `2 pi k / L`.
    pub fn wavenumber(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.domain_length
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.domain_length / self.n_points as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Storage index of wavenumber `k` in a coefficient vector.
    pub(crate) fn index(&self, k: i64) -> usize {
        (k + self.n_modes as i64) as usize
    }

    pub(crate) fn contains(&self, k: i64) -> bool {
        k.unsigned_abs() as usize <= self.n_modes
    }

    /// Same domain and mode count, different sample count.
    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(self.domain_length, self.n_modes, n_points)
    }

    pub(crate) fn same_modes(&self, other: &WaveGrid) -> bool {
        self.n_modes == other.n_modes
            && (self.domain_length - other.domain_length).abs()
                <= 1e-14 * self.domain_length.max(other.domain_length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_scales_with_domain() {
        let g = WaveGrid::new(2.0, 4, 9).unwrap();
        assert!((g.wavenumber(1) - PI).abs() < 1e-15);
        assert!((g.wavenumber(-3) + 3.0 * PI).abs() < 1e-15);
        assert_eq!(g.point(3), 3.0 * 2.0 / 9.0);
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(WaveGrid::new(1.0, 4, 8).is_err());
        assert!(WaveGrid::new(0.0, 4, 9).is_err());
        assert_eq!(WaveGrid::for_samples(1.0, 128).unwrap().n_modes(), 63);
    }
}

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObsPoint {
    pub x: f64,
    pub t: f64,
}

/// Observations `d_j` at space-time points, with optional i.i.d. Gaussian noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub points: Vec<ObsPoint>,
    pub values: Vec<f64>,
    pub noise: Option<f64>,
}

impl ObservationSet {
    pub fn new(points: Vec<ObsPoint>, values: Vec<f64>, noise: Option<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} observation points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::Precondition("observation set is empty".into()));
        }
        if let Some(s) = noise {
            if !(s > 0.0) {
                return Err(Error::Domain(format!("noise level must be positive, got {s}")));
            }
        }
        if points.iter().any(|p| !(p.t >= 0.0) || !p.x.is_finite()) {
            return Err(Error::Domain("observation times must be >= 0".into()));
        }
        let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.t, p.x)).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("observation points must be distinct".into()));
        }
        Ok(Self {
            points,
            values,
            noise,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Noise level used to weight the misfit; 1 for deterministic data.
    pub fn sigma(&self) -> f64 {
        self.noise.unwrap_or(1.0)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `n` equispaced points `x_i = i L / n` at one time.
pub fn spatial_points(domain_length: f64, n: usize, t: f64) -> Vec<ObsPoint> {
    (0..n)
        .map(|i| ObsPoint {
            x: i as f64 * domain_length / n as f64,
            t,
        })
        .collect()
}

/// Time series `t_j = j dt`, `j = 1..=n`, at one location.
pub fn time_series_points(x: f64, dt: f64, n: usize) -> Vec<ObsPoint> {
    (1..=n).map(|j| ObsPoint { x, t: j as f64 * dt }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_rejected() {
        let p = vec![ObsPoint { x: 0.1, t: 0.5 }; 2];
        assert!(ObservationSet::new(p, vec![0.0, 1.0], None).is_err());
    }

    #[test]
    fn bad_noise_rejected() {
        let p = spatial_points(1.0, 3, 0.5);
        assert!(ObservationSet::new(p, vec![0.0; 3], Some(0.0)).is_err());
    }

    #[test]
    fn plans() {
        let s = spatial_points(2.0, 4, 0.3);
        assert_eq!(s[3].x, 1.5);
        let t = time_series_points(0.5, 0.005, 100);
        assert_eq!(t.len(), 100);
        assert!((t[99].t - 0.5).abs() < 1e-15);
    }
}

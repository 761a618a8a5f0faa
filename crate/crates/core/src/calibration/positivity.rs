use serde::{Deserialize, Serialize};

use crate::spectral::{propagate_exact, synthesize, OperatorSpectrum, SpectralField, TransportConstants};
use crate::Result;

/// Minimum of the evolved field over a space-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_value: f64,
    pub x_at_min: f64,
    pub t_at_min: f64,
    /// Largest value over the same grid.
    pub peak: f64,
}

impl PositivityReport {
    pub fn relative_min(&self) -> f64 {
        self.min_value / self.peak
    }
}

/// Evaluate the evolved field at `n_points` equispaced locations for each time.
pub fn positivity_diagnostic(
    spectrum: &OperatorSpectrum,
    c0: &SpectralField,
    constants: &TransportConstants,
    times: &[f64],
    n_points: usize,
) -> Result<PositivityReport> {
    let grid = c0.grid().with_points(n_points.max(2 * c0.grid().n_modes() + 1))?;
    let start = SpectralField::new(grid, c0.coefficients().to_vec(), 0.0)?;
    let xs = grid.points();
    let mut report = PositivityReport {
        min_value: f64::INFINITY,
        x_at_min: 0.0,
        t_at_min: 0.0,
        peak: f64::NEG_INFINITY,
    };
    for &t in times {
        let v = synthesize(&propagate_exact(&start, spectrum, constants, t)?)?;
        for (x, c) in xs.iter().zip(v) {
            if c < report.min_value {
                report.min_value = c;
                report.x_at_min = *x;
                report.t_at_min = t;
            }
            report.peak = report.peak.max(c);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{fickian_spectrum, InitialCondition, WaveGrid};

    #[test]
    fn heat_equation_stays_positive() {
        let g = WaveGrid::minimal(1.0, 32).unwrap();
        let c0 = InitialCondition::gaussian_bump(0.5, 0.1).field(&g).unwrap();
        let c = TransportConstants::new(1.0, 0.01, 2.0).unwrap();
        let s = fickian_spectrum(0.01, &g).unwrap();
        let r = positivity_diagnostic(&s, &c0, &c, &[0.0, 0.5, 1.0], 512).unwrap();
        assert!(r.relative_min() > -1e-6);
        assert!(r.peak > 0.9);
    }
}

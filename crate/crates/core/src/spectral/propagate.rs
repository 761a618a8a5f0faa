use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{analyze, OperatorSpectrum, SpectralField, WaveGrid};
use crate::{Error, Result};

/// Mean velocity, molecular diffusivity and fractional order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConstants {
    pub mean_velocity: f64,
    pub diffusivity: f64,
    pub fractional_order: f64,
}

impl TransportConstants {
    pub fn new(mean_velocity: f64, diffusivity: f64, fractional_order: f64) -> Result<Self> {
        let c = Self {
            mean_velocity,
            diffusivity,
            fractional_order,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean_velocity.is_finite() {
            return Err(Error::Domain("mean velocity must be finite".into()));
        }
        if !(self.diffusivity >= 0.0) || !self.diffusivity.is_finite() {
            return Err(Error::Domain(format!(
                "diffusivity must be >= 0, got {}",
                self.diffusivity
            )));
        }
        if !(1.0..=2.0).contains(&self.fractional_order) {
            return Err(Error::Domain(format!(
                "fractional order {} outside [1, 2]",
                self.fractional_order
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `exp(-(x - center)^2 / width^2)` with periodic distance.
    GaussianBump { center: f64, width: f64 },
    /// `cos(k_x x - phase)`; `phase = pi/2` gives the sine mode.
    SingleMode {
        mode: i64,
        #[serde(default)]
        phase: f64,
    },
    /// Values at the grid sample points.
    Sampled { values: Vec<f64> },
}

impl InitialCondition {
    pub fn gaussian_bump(center: f64, width: f64) -> Self {
        Self::GaussianBump { center, width }
    }

    pub fn cosine(mode: i64) -> Self {
        Self::SingleMode { mode, phase: 0.0 }
    }

    pub fn sine(mode: i64) -> Self {
        Self::SingleMode {
            mode,
            phase: std::f64::consts::FRAC_PI_2,
        }
    }

    /// Value at `x` on a periodic domain of length `domain_length`.
    pub fn value_at(&self, x: f64, domain_length: f64) -> Result<f64> {
        match self {
            Self::GaussianBump { center, width } => {
                let mut d = (x - center).rem_euclid(domain_length);
                if d > 0.5 * domain_length {
                    d -= domain_length;
                }
                Ok((-(d * d) / (width * width)).exp())
            }
            Self::SingleMode { mode, phase } => {
                let kx = 2.0 * std::f64::consts::PI * *mode as f64 / domain_length;
                Ok((kx * x - phase).cos())
            }
            Self::Sampled { .. } => Err(Error::Precondition(
                "sampled initial condition has no point evaluation".into(),
            )),
        }
    }

    /// Samples at arbitrary points.
    pub fn sample_points(&self, xs: &[f64], domain_length: f64) -> Result<Vec<f64>> {
        if let Self::Sampled { values } = self {
            if values.len() != xs.len() {
                return Err(Error::Shape(format!(
                    "sampled initial condition has {} values, need {}",
                    values.len(),
                    xs.len()
                )));
            }
            return Ok(values.clone());
        }
        self.validate()?;
        xs.iter().map(|&x| self.value_at(x, domain_length)).collect()
    }

    /// Samples at the grid points.
    pub fn sample(&self, grid: &WaveGrid) -> Result<Vec<f64>> {
        self.sample_points(&grid.points(), grid.domain_length())
    }

    /// Fourier analysis of the sampled condition at time zero.
    pub fn field(&self, grid: &WaveGrid) -> Result<SpectralField> {
        analyze(grid, &self.sample(grid)?)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::GaussianBump { width, .. } if !(*width > 0.0) => Err(Error::Domain(format!(
                "bump width must be positive, got {width}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Per-mode growth factor `exp((mu_k - i u k_x) t)`.
pub(crate) fn mode_factor(mu: Complex64, velocity: f64, kx: f64, t: f64) -> Complex64 {
    ((mu - Complex64::new(0.0, velocity * kx)) * t).exp()
}

/// Exact solution of the generalized ADE after elapsed time `t`.
pub fn propagate_exact(
    c0: &SpectralField,
    spectrum: &OperatorSpectrum,
    constants: &TransportConstants,
    t: f64,
) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("propagation time must be >= 0, got {t}")));
    }
    let grid = *c0.grid();
    if !grid.same_modes(spectrum.grid()) {
        return Err(Error::Shape(format!(
            "field has {} modes, spectrum has {}",
            grid.n_modes(),
            spectrum.grid().n_modes()
        )));
    }
    let n = grid.n_modes() as i64;
    let coeffs: Vec<Complex64> = (-n..=n)
        .map(|k| {
            if k == 0 {
                c0.coeff(0)
            } else {
                c0.coeff(k)
                    * mode_factor(spectrum.mu(k), constants.mean_velocity, grid.wavenumber(k), t)
            }
        })
        .collect();
    Ok(SpectralField::new(grid, coeffs, c0.time() + t)?.with_time(c0.time() + t))
}

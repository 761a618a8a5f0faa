use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Grid2D;
use crate::{Error, Result};

/// Statistics of `log kappa`: a stationary Gaussian field with separable
/// squared-exponential covariance `var * exp(-dx^2/(2 lx^2)) exp(-dy^2/(2 ly^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormalStats {
    pub log_mean: f64,
    pub log_variance: f64,
    pub corr_x: f64,
    pub corr_y: f64,
}

impl LogNormalStats {
    pub fn homogeneous(kappa: f64) -> Self {
        Self {
            log_mean: kappa.ln(),
            log_variance: 0.0,
            corr_x: 0.1,
            corr_y: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.log_variance >= 0.0) || !self.log_mean.is_finite() {
            return Err(Error::Domain(format!(
                "log-permeability variance must be >= 0, got {}",
                self.log_variance
            )));
        }
        if !(self.corr_x > 0.0 && self.corr_y > 0.0) {
            return Err(Error::Domain(format!(
                "correlation lengths must be positive, got ({}, {})",
                self.corr_x, self.corr_y
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermeabilityRealization {
    pub grid: Grid2D,
    pub kappa: Vec<f64>,
    pub seed: u64,
    pub stats: LogNormalStats,
}

impl PermeabilityRealization {
    pub fn constant(grid: Grid2D, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::Domain(format!("permeability must be positive, got {kappa}")));
        }
        Ok(Self {
            grid,
            kappa: vec![kappa; grid.n_cells()],
            seed: 0,
            stats: LogNormalStats::homogeneous(kappa),
        })
    }

    /// Permeability varying only with depth, `kappa(i, j) = layers[j]`.
    pub fn layered(grid: Grid2D, layers: &[f64]) -> Result<Self> {
        if layers.len() != grid.ny {
            return Err(Error::Shape(format!(
                "{} layers for {} rows",
                layers.len(),
                grid.ny
            )));
        }
        if layers.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::Domain("layer permeabilities must be positive".into()));
        }
        let mut kappa = Vec::with_capacity(grid.n_cells());
        for _ in 0..grid.nx {
            kappa.extend_from_slice(layers);
        }
        let logs: Vec<f64> = layers.iter().map(|k| k.ln()).collect();
        let m = logs.iter().sum::<f64>() / logs.len() as f64;
        let v = logs.iter().map(|l| (l - m).powi(2)).sum::<f64>() / logs.len() as f64;
        Ok(Self {
            grid,
            kappa,
            seed: 0,
            stats: LogNormalStats {
                log_mean: m,
                log_variance: v,
                corr_x: f64::INFINITY,
                corr_y: grid.dy(),
            },
        })
    }

    pub fn from_values(grid: Grid2D, kappa: Vec<f64>) -> Result<Self> {
        grid.check_len(kappa.len(), "permeability")?;
        if kappa.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
            return Err(Error::Domain("permeability must be positive and finite".into()));
        }
        let logs: Vec<f64> = kappa.iter().map(|k| k.ln()).collect();
        let m = logs.iter().sum::<f64>() / logs.len() as f64;
        let v = logs.iter().map(|l| (l - m).powi(2)).sum::<f64>() / logs.len() as f64;
        Ok(Self {
            grid,
            kappa,
            seed: 0,
            stats: LogNormalStats {
                log_mean: m,
                log_variance: v,
                corr_x: grid.dx(),
                corr_y: grid.dy(),
            },
        })
    }
}

/// Eigenvalues of the circulant correlation matrix of the periodized
/// squared-exponential kernel on `n` points spaced `h` apart, normalized
/// to unit variance.
fn periodic_spectrum(n: usize, h: f64, corr: f64) -> Vec<f64> {
    let period = n as f64 * h;
    let images = (3.0 * corr / period).ceil() as i64 + 1;
    let kernel = |d: f64| -> f64 {
        (-images..=images)
            .map(|m| {
                let s = (d + m as f64 * period) / corr;
                (-0.5 * s * s).exp()
            })
            .sum()
    };
    let c0 = kernel(0.0);
    let mut row: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(kernel(i as f64 * h) / c0, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut row);
    row.iter().map(|z| z.re.max(0.0)).collect()
}

/// Lower Cholesky factor of the depthwise correlation matrix, with
/// escalating diagonal jitter.
fn depth_factor(ys: &[f64], corr: f64) -> Result<DMatrix<f64>> {
    let n = ys.len();
    let c = DMatrix::from_fn(n, n, |a, b| {
        let s = (ys[a] - ys[b]) / corr;
        (-0.5 * s * s).exp()
    });
    let mut jitter = 0.0;
    loop {
        let m = &c + DMatrix::identity(n, n) * jitter;
        if let Some(ch) = m.cholesky() {
            if jitter > 0.0 {
                log::debug!("depth covariance factored with jitter {jitter:.1e}");
            }
            return Ok(ch.l());
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
        if jitter > 1e-6 {
            return Err(Error::Numerical(format!(
                "depth covariance (correlation length {corr}) not positive definite after jitter 1e-6"
            )));
        }
    }
}

/// Sample a log-normal permeability field, periodic in x.
pub fn sample_permeability(
    grid: Grid2D,
    stats: LogNormalStats,
    seed: u64,
) -> Result<PermeabilityRealization> {
    stats.validate()?;
    let (nx, ny) = (grid.nx, grid.ny);
    if stats.log_variance == 0.0 {
        return Ok(PermeabilityRealization {
            grid,
            kappa: vec![stats.log_mean.exp(); grid.n_cells()],
            seed,
            stats,
        });
    }
    if stats.corr_y >= grid.ly {
        log::warn!(
            "correlation length {} >= depth {}; depth covariance is near singular",
            stats.corr_y,
            grid.ly
        );
    }
    let root: Vec<f64> = periodic_spectrum(nx, grid.dx(), stats.corr_x)
        .into_iter()
        .map(f64::sqrt)
        .collect();
    let ly = depth_factor(&grid.ys(), stats.corr_y)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..grid.n_cells())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();

    // Circulant square root along x for each depth row.
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nx);
    let inv = planner.plan_fft_inverse(nx);
    let mut ax = vec![0.0; grid.n_cells()];
    let mut buf = vec![Complex64::new(0.0, 0.0); nx];
    for j in 0..ny {
        for i in 0..nx {
            buf[i] = Complex64::new(z[grid.idx(i, j)], 0.0);
        }
        fwd.process(&mut buf);
        for (b, r) in buf.iter_mut().zip(&root) {
            *b *= *r;
        }
        inv.process(&mut buf);
        for i in 0..nx {
            ax[grid.idx(i, j)] = buf[i].re / nx as f64;
        }
    }

    let sd = stats.log_variance.sqrt();
    let mut kappa = vec![0.0; grid.n_cells()];
    for i in 0..nx {
        let row = &ax[i * ny..(i + 1) * ny];
        for j in 0..ny {
            let mut g = 0.0;
            for m in 0..=j {
                g += ly[(j, m)] * row[m];
            }
            kappa[grid.idx(i, j)] = (stats.log_mean + sd * g).exp();
        }
    }
    Ok(PermeabilityRealization {
        grid,
        kappa,
        seed,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(var: f64) -> LogNormalStats {
        LogNormalStats {
            log_mean: 0.3,
            log_variance: var,
            corr_x: 0.1,
            corr_y: 0.1,
        }
    }

    #[test]
    fn zero_variance_is_constant() {
        let g = Grid2D::square(16).unwrap();
        let p = sample_permeability(g, stats(0.0), 7).unwrap();
        assert!(p.kappa.iter().all(|&k| (k - 0.3f64.exp()).abs() < 1e-15));
    }

    #[test]
    fn seed_determinism() {
        let g = Grid2D::square(32).unwrap();
        let a = sample_permeability(g, stats(1.0), 11).unwrap();
        let b = sample_permeability(g, stats(1.0), 11).unwrap();
        let c = sample_permeability(g, stats(1.0), 12).unwrap();
        assert_eq!(a.kappa, b.kappa);
        assert_ne!(a.kappa, c.kappa);
        assert!(a.kappa.iter().all(|&k| k > 0.0));
    }

    #[test]
    fn circulant_spectrum_reproduces_kernel() {
        // Inverse transform of the eigenvalues must give back the first row.
        let n = 32;
        let h = 1.0 / n as f64;
        let lam = periodic_spectrum(n, h, 0.1);
        let mut buf: Vec<Complex64> = lam.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        assert!((buf[0].re / n as f64 - 1.0).abs() < 1e-12);
        let d = 3.0 * h;
        let expect: f64 = (-3..=3)
            .map(|m| (-0.5 * ((d + m as f64) / 0.1).powi(2)).exp())
            .sum();
        assert!((buf[3].re / n as f64 - expect).abs() < 1e-10);
    }

    #[test]
    fn long_depth_correlation_still_factors() {
        let ys: Vec<f64> = (0..32).map(|j| (j as f64 + 0.5) / 32.0).collect();
        assert!(depth_factor(&ys, 2.0).is_ok());
    }

    #[test]
    fn rejects_bad_stats() {
        let g = Grid2D::square(8).unwrap();
        assert!(sample_permeability(g, stats(-1.0), 0).is_err());
        let mut s = stats(1.0);
        s.corr_x = 0.0;
        assert!(sample_permeability(g, s, 0).is_err());
    }
}

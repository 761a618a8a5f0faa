use num_complex::Complex64;
use rayon::prelude::*;

use crate::highfid::{run_member, PermeabilitySource, Pipeline};
use crate::spectral::{
    analyze, propagate_exact, synthesize, InitialCondition, OperatorSpectrum, SpectralField,
    TransportConstants, WaveGrid,
};
use crate::{Error, Result};

/// Model whose response to single Fourier modes is probed.
#[derive(Debug, Clone)]
pub enum ProbeSource {
    /// 2D Darcy transport, depth averaged; ensemble members are averaged.
    HighFidelity {
        pipeline: Pipeline,
        permeability: PermeabilitySource,
    },
    /// The generalized 1D ADE itself, sampled on `grid`.
    Exact {
        grid: WaveGrid,
        spectrum: OperatorSpectrum,
        constants: TransportConstants,
    },
}

impl ProbeSource {
    /// Grid on which upscaled fields are analysed.
    pub fn analysis_grid(&self) -> Result<WaveGrid> {
        match self {
            Self::HighFidelity { pipeline, .. } => {
                WaveGrid::for_samples(pipeline.grid.lx, pipeline.grid.nx)
            }
            Self::Exact { grid, .. } => Ok(*grid),
        }
    }

    /// Real-field histories (per time, sampled profile) of `ic`, one per member.
    fn run_real(&self, ic: &InitialCondition, times: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        match self {
            Self::HighFidelity {
                pipeline,
                permeability,
            } => {
                let profile = ic.sample_points(&pipeline.grid.xs(), pipeline.grid.lx)?;
                permeability
                    .seeds()
                    .par_iter()
                    .map(|&s| {
                        let perm = permeability.realize(pipeline.grid, s)?;
                        run_member(&profile, &perm, pipeline, times)
                    })
                    .collect()
            }
            Self::Exact {
                grid,
                spectrum,
                constants,
            } => {
                let c0 = ic.field(grid)?;
                let snaps = times
                    .iter()
                    .map(|&t| synthesize(&propagate_exact(&c0, spectrum, constants, t)?))
                    .collect::<Result<_>>()?;
                Ok(vec![snaps])
            }
        }
    }
}

/// Fourier coefficients `c_k(t)`, `k = -n..=n`, of the response to the
/// complex mode `amplitude * exp(i k'_x x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProbeResult {
    pub probe: i64,
    pub amplitude: f64,
    pub grid: WaveGrid,
    pub times: Vec<f64>,
    /// `coefficients[n][k + n_modes]` at `times[n]`.
    pub coefficients: Vec<Vec<Complex64>>,
    pub seeds: Vec<u64>,
}

impl ModeProbeResult {
    pub fn coeff(&self, time_index: usize, k: i64) -> Complex64 {
        let n = self.grid.n_modes() as i64;
        if k.abs() > n {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients[time_index][(k + n) as usize]
    }

    /// `c_k(t)` over all times.
    pub fn history(&self, k: i64) -> Vec<Complex64> {
        (0..self.times.len()).map(|i| self.coeff(i, k)).collect()
    }
}

fn mean_analysis(grid: &WaveGrid, members: &[Vec<Vec<f64>>], t: usize) -> Result<Vec<Complex64>> {
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.n_coeffs()];
    for m in members {
        let f: SpectralField = analyze(grid, &m[t])?;
        for (a, c) in acc.iter_mut().zip(f.coefficients()) {
            *a += c;
        }
    }
    let n = members.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Propagate `amplitude * exp(i k' x)` as a cosine and a sine run and
/// recombine the analysed coefficients.
pub fn propagate_mode(
    source: &ProbeSource,
    probe: i64,
    amplitude: f64,
    times: &[f64],
) -> Result<ModeProbeResult> {
    let grid = source.analysis_grid()?;
    if probe.unsigned_abs() as usize > grid.n_modes() || probe == 0 {
        return Err(Error::Precondition(format!(
            "probe mode {probe} outside 1..={} of the analysis grid",
            grid.n_modes()
        )));
    }
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("probe times must be strictly increasing".into()));
    }
    let scaled = |ic: InitialCondition| -> Result<InitialCondition> {
        let vals = ic.sample_points(&source_points(source, &grid), grid.domain_length())?;
        Ok(InitialCondition::Sampled {
            values: vals.iter().map(|v| v * amplitude).collect(),
        })
    };
    let cos_ic = scaled(InitialCondition::cosine(probe))?;
    let sin_ic = scaled(InitialCondition::sine(probe))?;
    let (cos_runs, sin_runs) = rayon::join(
        || source.run_real(&cos_ic, times),
        || source.run_real(&sin_ic, times),
    );
    let (cos_runs, sin_runs) = (cos_runs?, sin_runs?);
    let i = Complex64::new(0.0, 1.0);
    let coefficients = (0..times.len())
        .map(|t| {
            let a = mean_analysis(&grid, &cos_runs, t)?;
            let b = mean_analysis(&grid, &sin_runs, t)?;
            Ok(a.iter().zip(&b).map(|(x, y)| x + i * y).collect())
        })
        .collect::<Result<_>>()?;
    let seeds = match source {
        ProbeSource::HighFidelity { permeability, .. } => permeability.seeds(),
        ProbeSource::Exact { .. } => vec![],
    };
    Ok(ModeProbeResult {
        probe,
        amplitude,
        grid,
        times: times.to_vec(),
        coefficients,
        seeds,
    })
}

fn source_points(source: &ProbeSource, grid: &WaveGrid) -> Vec<f64> {
    match source {
        ProbeSource::HighFidelity { pipeline, .. } => pipeline.grid.xs(),
        ProbeSource::Exact { .. } => grid.points(),
    }
}

/// Uniform snapshot times `0, dt, .., n dt` with `dt` resolving the expected
/// decay and rotation of `probe`: `|mu - i u k_x| dt = resolution`.
pub fn snapshot_times(
    grid: &WaveGrid,
    probe: i64,
    velocity: f64,
    diffusivity: f64,
    resolution: f64,
    n_snapshots: usize,
) -> Vec<f64> {
    let kx = grid.wavenumber(probe.abs());
    let rate = (velocity * kx).hypot(diffusivity * kx * kx);
    let dt = resolution / rate;
    (0..n_snapshots).map(|n| n as f64 * dt).collect()
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    depth_average, evolve_to_times, sample_permeability, solve_darcy, Concentration2D,
    DarcyConstants, Grid2D, LogNormalStats, PermeabilityRealization, TransportOptions,
};
use crate::spectral::InitialCondition;
use crate::{Error, Result};

/// Where permeability fields come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PermeabilitySource {
    Homogeneous { kappa: f64 },
    Realization { stats: LogNormalStats, seed: u64 },
    /// Members use seeds `base_seed + i`.
    Ensemble { stats: LogNormalStats, base_seed: u64, size: usize },
}

impl PermeabilitySource {
    pub fn seeds(&self) -> Vec<u64> {
        match *self {
            Self::Homogeneous { .. } => vec![0],
            Self::Realization { seed, .. } => vec![seed],
            Self::Ensemble { base_seed, size, .. } => (0..size as u64).map(|i| base_seed + i).collect(),
        }
    }

    pub fn realize(&self, grid: Grid2D, seed: u64) -> Result<PermeabilityRealization> {
        match *self {
            Self::Homogeneous { kappa } => PermeabilityRealization::constant(grid, kappa),
            Self::Realization { stats, .. } | Self::Ensemble { stats, .. } => {
                sample_permeability(grid, stats, seed)
            }
        }
    }
}

/// Grid, flow and transport settings of the 2D model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub grid: Grid2D,
    pub darcy: DarcyConstants,
    pub transport: TransportOptions,
}

/// Depth-averaged snapshots `c(x_i, t_n)` with ensemble standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct UpscaledSeries {
    pub x: Vec<f64>,
    pub domain_length: f64,
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
}

impl UpscaledSeries {
    pub fn ensemble_size(&self) -> usize {
        self.seeds.len()
    }
}

/// Transport `profile` (uniform in depth) through one permeability field and
/// return the depth-averaged snapshots.
pub fn run_member(
    profile: &[f64],
    perm: &PermeabilityRealization,
    pipeline: &Pipeline,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let vel = solve_darcy(perm, &pipeline.darcy)?;
    let c0 = Concentration2D::from_profile(pipeline.grid, profile, 0.0)?;
    let snaps = evolve_to_times(&c0, &vel, &pipeline.transport, times)?;
    Ok(snaps.iter().map(depth_average).collect())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "output times must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Mean and standard error over members, in member order.
pub(crate) fn aggregate(members: &[Vec<Vec<f64>>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = members.len() as f64;
    let (nt, nx) = (members[0].len(), members[0][0].len());
    let mut mean = vec![vec![0.0; nx]; nt];
    let mut se = vec![vec![0.0; nx]; nt];
    for m in members {
        for t in 0..nt {
            for i in 0..nx {
                mean[t][i] += m[t][i];
            }
        }
    }
    mean.iter_mut().flatten().for_each(|v| *v /= n);
    if members.len() > 1 {
        for m in members {
            for t in 0..nt {
                for i in 0..nx {
                    se[t][i] += (m[t][i] - mean[t][i]).powi(2);
                }
            }
        }
        se.iter_mut()
            .flatten()
            .for_each(|v| *v = (*v / (n - 1.0) / n).sqrt());
    }
    (mean, se)
}

/// Depth-averaged evolution of `ic` for one field or an ensemble.
pub fn run_upscaled(
    ic: &InitialCondition,
    source: &PermeabilitySource,
    pipeline: &Pipeline,
    times: &[f64],
) -> Result<UpscaledSeries> {
    check_times(times)?;
    let grid = pipeline.grid;
    let x = grid.xs();
    let profile = ic.sample_points(&x, grid.lx)?;
    let seeds = source.seeds();
    if seeds.is_empty() {
        return Err(Error::Precondition("ensemble size must be at least 1".into()));
    }
    let members: Vec<Vec<Vec<f64>>> = seeds
        .par_iter()
        .map(|&s| run_member(&profile, &source.realize(grid, s)?, pipeline, times))
        .collect::<Result<_>>()?;
    let (mean, std_error) = aggregate(&members);
    Ok(UpscaledSeries {
        x,
        domain_length: grid.lx,
        times: times.to_vec(),
        mean,
        std_error,
        seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highfid::{FlowDrive, Limiter};

    fn pipeline(n: usize) -> Pipeline {
        Pipeline {
            grid: Grid2D::square(n).unwrap(),
            darcy: DarcyConstants::new(1.0, 1.0, FlowDrive::MeanVelocity(1.0)),
            transport: TransportOptions::new(1e-3, Limiter::VanLeer),
        }
    }

    fn stats() -> LogNormalStats {
        LogNormalStats {
            log_mean: 0.0,
            log_variance: 1.0,
            corr_x: 0.2,
            corr_y: 0.2,
        }
    }

    #[test]
    fn ensemble_of_one_equals_single() {
        let p = pipeline(16);
        let ic = InitialCondition::gaussian_bump(0.25, 0.1);
        let a = run_upscaled(&ic, &PermeabilitySource::Realization { stats: stats(), seed: 5 }, &p, &[0.0, 0.05]).unwrap();
        let b = run_upscaled(
            &ic,
            &PermeabilitySource::Ensemble { stats: stats(), base_seed: 5, size: 1 },
            &p,
            &[0.0, 0.05],
        )
        .unwrap();
        assert_eq!(a.mean, b.mean);
        assert!(b.std_error.iter().flatten().all(|&s| s == 0.0));
    }

    #[test]
    fn constant_ensemble_has_zero_error() {
        let p = pipeline(16);
        let ic = InitialCondition::gaussian_bump(0.25, 0.1);
        let mut s = stats();
        s.log_variance = 0.0;
        let r = run_upscaled(&ic, &PermeabilitySource::Ensemble { stats: s, base_seed: 0, size: 4 }, &p, &[0.05]).unwrap();
        assert!(r.std_error.iter().flatten().all(|&v| v < 1e-15));
    }

    #[test]
    fn decreasing_times_rejected() {
        let p = pipeline(8);
        let ic = InitialCondition::cosine(1);
        assert!(run_upscaled(&ic, &PermeabilitySource::Homogeneous { kappa: 1.0 }, &p, &[0.2, 0.1]).is_err());
    }
}

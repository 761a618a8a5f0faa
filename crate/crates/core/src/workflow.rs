//! End-to-end pipelines shared by the command-line driver, the acceptance
//! suite and the Python bindings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calibration::{
    check_derivatives, newton_map, DerivativeReport, run_chains, sensitivity_cutoff, spatial_points, time_series_points, Bounds, Chain,
    Coordinates, NewtonResult, ObsPoint, ObservationModel, ObservationSet, PosteriorTarget,
    SensitivityReport, SpectralModel, Subspace,
};
use crate::highfid::{run_upscaled, UpscaledSeries};
use crate::interrogation::{
    assumption_report, propagate_mode, snapshot_times, AssumptionReport, ModeProbeResult,
    ProbeSource,
};
use crate::io::{
    BoundsKind, CalibrationConfig, ExperimentConfig, InitialGuess, ObservationLayout,
    SensitivityPoint,
};
use crate::spectral::{
    analyze, fickian_spectrum, frade_spectrum, propagate_exact, synthesize, unrescale,
    OperatorSpectrum, RescaledParameters, SpectralField, TransportConstants, WaveGrid,
};
use crate::{Error, Result};

/// Smallest admissible radius used by the `admissible` bounds.
pub const RADIUS_FLOOR: f64 = 1e-12;

/// Space-time points of an observation plan.
pub fn observation_points(layout: &ObservationLayout, domain_length: f64) -> Vec<ObsPoint> {
    match *layout {
        ObservationLayout::Spatial { n, time } => spatial_points(domain_length, n, time),
        ObservationLayout::TimeSeries { x, dt, n } => time_series_points(x, dt, n),
    }
}

/// Add i.i.d. Gaussian noise with standard deviation `fraction * max|clean|`.
pub fn add_noise(clean: &[f64], fraction: f64, seed: u64) -> (Vec<f64>, f64) {
    let sigma = fraction * clean.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = clean
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sigma * z
        })
        .collect();
    (noisy, sigma)
}

/// Synthetic fractional-ADE scenario.
#[derive(Debug, Clone)]
pub struct FradeData {
    pub initial: SpectralField,
    pub truth: OperatorSpectrum,
    pub clean: Vec<f64>,
    pub observations: ObservationSet,
}

pub fn initial_field(cfg: &ExperimentConfig) -> Result<SpectralField> {
    cfg.initial_condition.field(&cfg.grid.wave_grid()?)
}

pub fn generate_frade(cfg: &ExperimentConfig) -> Result<FradeData> {
    let grid = cfg.grid.wave_grid()?;
    let initial = cfg.initial_condition.field(&grid)?;
    let truth = frade_spectrum(&cfg.constants, &grid)?;
    let points = observation_points(&cfg.observations.layout, grid.domain_length());
    let model = SpectralModel::new(&initial, &cfg.constants, &points, Coordinates::Physical)?;
    let clean = model.predict(&model.params_of(&truth)?)?;
    let (values, noise) = match cfg.observations.noise_fraction {
        Some(f) => {
            let (v, s) = add_noise(&clean, f, cfg.observations.noise_seed);
            (v, Some(s))
        }
        None => (clean.clone(), None),
    };
    let observations = ObservationSet::new(points, values, noise)?;
    Ok(FradeData {
        initial,
        truth,
        clean,
        observations,
    })
}

pub fn initial_spectrum(guess: &InitialGuess, grid: &WaveGrid) -> Result<OperatorSpectrum> {
    match *guess {
        InitialGuess::Fickian { diffusivity } => fickian_spectrum(diffusivity, grid),
        InitialGuess::PriorCenter => {
            let n = grid.n_modes();
            unrescale(&RescaledParameters {
                grid: *grid,
                r_star: vec![0.5; n],
                theta_star: vec![0.5; n],
            })
        }
    }
}

/// Deterministic calibration result; parameters are rescaled.
#[derive(Debug, Clone)]
pub struct MapOutcome {
    pub start: Vec<f64>,
    pub params: Vec<f64>,
    pub spectrum: OperatorSpectrum,
    pub sensitivity: SensitivityReport,
    /// Parameters optimized by Newton.
    pub optimized: Vec<usize>,
    pub newton: NewtonResult,
}

impl MapOutcome {
    /// Indices of the modes retained by the sensitivity analysis.
    pub fn active(&self) -> Vec<usize> {
        self.sensitivity.active_indices()
    }
}

fn calibration_bounds(model: &SpectralModel, kind: BoundsKind) -> Result<Bounds> {
    match kind {
        BoundsKind::Admissible => {
            let (lo, hi) = model.admissible_bounds(RADIUS_FLOOR);
            Bounds::new(lo, hi)
        }
        BoundsKind::UnitBox => Ok(Bounds::uniform(model.n_params(), 0.0, 1.0)),
    }
}

fn sensitivity_at(
    cfg: &CalibrationConfig,
    c0: &SpectralField,
    constants: &TransportConstants,
    obs: &ObservationSet,
    spectrum: &OperatorSpectrum,
) -> Result<SensitivityReport> {
    let model = SpectralModel::new(c0, constants, &obs.points, cfg.sensitivity_coordinates)?;
    let p = model.params_of(spectrum)?;
    sensitivity_cutoff(
        &model,
        &p,
        &obs.values,
        cfg.sensitivity_tolerance,
        cfg.sensitivity_gn_only,
    )
}

fn mode_indices(n: usize, modes: usize) -> Vec<usize> {
    (0..modes).chain(n..n + modes).collect()
}

/// Sensitivities at the configured initial guess.
pub fn start_sensitivity(
    cfg: &CalibrationConfig,
    c0: &SpectralField,
    constants: &TransportConstants,
    obs: &ObservationSet,
) -> Result<SensitivityReport> {
    let start = initial_spectrum(&cfg.initial_guess, c0.grid())?;
    sensitivity_at(cfg, c0, constants, obs, &start)
}

/// Derivative check of the rescaled spectral model at a random point:
/// `n_obs` random space-time points in `[0, L] x [0.01, 0.21]`, small
/// radii (`r* < 0.02`, so every mode stays observable), random arguments
/// and random data.
pub fn random_derivative_check(
    cfg: &ExperimentConfig,
    n_modes: usize,
    n_obs: usize,
    h: f64,
    seed: u64,
) -> Result<DerivativeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = WaveGrid::minimal(cfg.grid.domain_length, n_modes)?;
    let c0 = cfg.initial_condition.field(&grid)?;
    let l = grid.domain_length();
    let points: Vec<ObsPoint> = (0..n_obs)
        .map(|_| ObsPoint {
            x: l * rng.random::<f64>(),
            t: 0.01 + 0.2 * rng.random::<f64>(),
        })
        .collect();
    let model = SpectralModel::new(&c0, &cfg.constants, &points, Coordinates::Rescaled)?;
    let p: Vec<f64> = (0..2 * n_modes)
        .map(|i| if i < n_modes { 0.02 * rng.random::<f64>() } else { rng.random::<f64>() })
        .collect();
    let data: Vec<f64> = (0..n_obs).map(|_| rng.random::<f64>()).collect();
    check_derivatives(&model, &p, &data, h)
}

/// Sensitivity analysis and projected Newton in rescaled coordinates.
pub fn calibrate_map(
    cfg: &CalibrationConfig,
    c0: &SpectralField,
    constants: &TransportConstants,
    obs: &ObservationSet,
) -> Result<MapOutcome> {
    let grid = *c0.grid();
    let n = grid.n_modes();
    let model = SpectralModel::new(c0, constants, &obs.points, Coordinates::Rescaled)?;
    let start_spectrum = initial_spectrum(&cfg.initial_guess, &grid)?;
    let start = model.params_of(&start_spectrum)?;
    let bounds = calibration_bounds(&model, cfg.bounds)?;

    let (optimized, sensitivity) = match cfg.sensitivity_point {
        SensitivityPoint::Initial => {
            let s = sensitivity_at(cfg, c0, constants, obs, &start_spectrum)?;
            log::info!("sensitivity cutoff at the initial guess: {} modes", s.cutoff);
            (s.active_indices(), Some(s))
        }
        SensitivityPoint::Optimum => (mode_indices(n, cfg.map_modes.unwrap_or(n).min(n)), None),
    };
    let sub = Subspace::new(&model, start.clone(), optimized.clone())?;
    let newton = newton_map(
        &sub,
        &sub.project(&start),
        &obs.values,
        obs.sigma(),
        &bounds.select(&optimized),
        &cfg.newton,
    )?;
    log::info!(
        "newton: {:?} after {} iterations, objective {:.6e}",
        newton.termination,
        newton.iterations,
        newton.objective
    );
    let params = sub.embed(&newton.params);
    let spectrum = model.spectrum(&params)?;
    let sensitivity = match sensitivity {
        Some(s) => s,
        None => sensitivity_at(cfg, c0, constants, obs, &spectrum)?,
    };
    Ok(MapOutcome {
        start,
        params,
        spectrum,
        sensitivity,
        optimized,
        newton,
    })
}

/// Bayesian calibration: MAP, then Langevin chains over the active modes
/// with the remaining parameters frozen at the MAP.
#[derive(Debug, Clone)]
pub struct McmcOutcome {
    pub map: MapOutcome,
    pub active: Vec<usize>,
    pub chains: Vec<Chain>,
    /// Pooled central credible intervals, one per active parameter.
    pub intervals: Vec<(f64, f64)>,
}

pub fn calibrate_mcmc(
    cfg: &CalibrationConfig,
    c0: &SpectralField,
    constants: &TransportConstants,
    obs: &ObservationSet,
) -> Result<McmcOutcome> {
    if obs.noise.is_none() {
        return Err(Error::Precondition(
            "sampling needs observations with a known noise level".into(),
        ));
    }
    let map = calibrate_map(cfg, c0, constants, obs)?;
    let model = SpectralModel::new(c0, constants, &obs.points, Coordinates::Rescaled)?;
    let active = map.active();
    let sub = Subspace::new(&model, map.params.clone(), active.clone())?;
    let start = sub.project(&map.params);
    let prior = Bounds::uniform(active.len(), 0.0, 1.0);
    if !prior.contains(&start) {
        return Err(Error::Precondition(
            "MAP lies outside the prior box; use unit_box bounds".into(),
        ));
    }
    let target = PosteriorTarget::new(&sub, &obs.values, obs.sigma(), prior)?;
    let chains = run_chains(&target, &start, &cfg.chain, cfg.n_chains)?;
    let intervals = (0..active.len())
        .map(|i| pooled_interval(&chains, i, cfg.credible_level))
        .collect();
    Ok(McmcOutcome {
        map,
        active,
        chains,
        intervals,
    })
}

/// Central interval of parameter `i` over all chains.
pub fn pooled_interval(chains: &[Chain], i: usize, level: f64) -> (f64, f64) {
    let pooled = Chain {
        states: chains.iter().flat_map(|c| c.states.iter().cloned()).collect(),
        log_posterior: vec![],
        acceptance_rate: 0.0,
        step_size: 0.0,
        seed: 0,
    };
    pooled.interval(i, level)
}

/// Samples of the field evolved under `spectrum` at each time.
pub fn evolve(
    c0: &SpectralField,
    spectrum: &OperatorSpectrum,
    constants: &TransportConstants,
    times: &[f64],
    n_points: Option<usize>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let grid = match n_points {
        Some(p) => c0.grid().with_points(p)?,
        None => *c0.grid(),
    };
    let start = SpectralField::new(grid, c0.coefficients().to_vec(), 0.0)?;
    let fields = times
        .iter()
        .map(|&t| synthesize(&propagate_exact(&start, spectrum, constants, t)?))
        .collect::<Result<_>>()?;
    Ok((grid.points(), fields))
}

/// Calibration of the 1D model against one snapshot of an upscaled series.
#[derive(Debug, Clone)]
pub struct UpscaledCalibration {
    pub map: MapOutcome,
    pub initial: SpectralField,
    /// `||prediction - data|| / ||data||` at every series time.
    pub relative_errors: Vec<f64>,
}

pub fn calibrate_upscaled(
    cfg: &CalibrationConfig,
    constants: &TransportConstants,
    series: &UpscaledSeries,
    calibration_index: usize,
) -> Result<UpscaledCalibration> {
    if series.times.first() != Some(&0.0) {
        return Err(Error::Precondition("upscaled series must start at t = 0".into()));
    }
    if calibration_index == 0 || calibration_index >= series.times.len() {
        return Err(Error::Precondition("calibration time index out of range".into()));
    }
    let grid = WaveGrid::for_samples(series.domain_length, series.x.len())?;
    let initial = analyze(&grid, &series.mean[0])?;
    let t = series.times[calibration_index];
    let points: Vec<ObsPoint> = series.x.iter().map(|&x| ObsPoint { x, t }).collect();
    let obs = ObservationSet::new(points, series.mean[calibration_index].clone(), None)?;
    let map = calibrate_map(cfg, &initial, constants, &obs)?;
    let (_, fields) = evolve(&initial, &map.spectrum, constants, &series.times, None)?;
    let relative_errors = fields
        .iter()
        .zip(&series.mean)
        .map(|(p, d)| {
            let num: f64 = p.iter().zip(d).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = d.iter().map(|b| b * b).sum();
            (num / den).sqrt()
        })
        .collect();
    Ok(UpscaledCalibration {
        map,
        initial,
        relative_errors,
    })
}

/// Upscaled series of the configured 2D experiment.
pub fn upscale(cfg: &ExperimentConfig) -> Result<UpscaledSeries> {
    let hf = &cfg.highfid;
    run_upscaled(&cfg.initial_condition, &hf.permeability, &hf.pipeline(), &hf.times)
}

/// Mode probes of the configured 2D model and the resulting verdicts.
pub fn interrogate(cfg: &ExperimentConfig) -> Result<(Vec<ModeProbeResult>, AssumptionReport)> {
    let mut pipeline = cfg.highfid.pipeline();
    pipeline.transport.limiter = cfg.interrogation.limiter;
    let source = ProbeSource::HighFidelity {
        pipeline,
        permeability: cfg.highfid.permeability,
    };
    let grid = source.analysis_grid()?;
    let probes = cfg
        .interrogation
        .probes
        .iter()
        .map(|&k| {
            let times = snapshot_times(
                &grid,
                k,
                cfg.constants.mean_velocity,
                pipeline.transport.diffusivity,
                cfg.interrogation.resolution,
                cfg.interrogation.n_snapshots,
            );
            propagate_mode(&source, k, 1.0, &times)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = assumption_report(&probes, cfg.interrogation.thresholds)?;
    Ok((probes, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.grid.n_modes = 32;
        cfg.observations.layout = ObservationLayout::Spatial { n: 32, time: 0.5 };
        cfg
    }

    #[test]
    fn noise_is_reproducible_and_scaled() {
        let clean = vec![1.0, -2.0, 0.5];
        let (a, s) = add_noise(&clean, 0.01, 7);
        let (b, _) = add_noise(&clean, 0.01, 7);
        let (c, _) = add_noise(&clean, 0.01, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(s, 0.02);
    }

    #[test]
    fn noiseless_map_recovers_frade_modes() {
        let cfg = small();
        let data = generate_frade(&cfg).unwrap();
        let out =
            calibrate_map(&cfg.calibration, &data.initial, &cfg.constants, &data.observations)
                .unwrap();
        assert!(out.newton.converged(), "{:?}", out.newton.termination);
        for k in 1..=out.sensitivity.cutoff as i64 {
            let (a, b) = (out.spectrum.mu(k), data.truth.mu(k));
            assert!((a - b).norm() / b.norm() < 1e-3, "mode {k} of {}: {a} vs {b}; {:?} {}", out.sensitivity.cutoff, out.newton.termination, out.newton.objective);
        }
    }

    #[test]
    fn evolve_at_zero_returns_initial_samples() {
        let cfg = small();
        let c0 = initial_field(&cfg).unwrap();
        let s = frade_spectrum(&cfg.constants, c0.grid()).unwrap();
        let (x, f) = evolve(&c0, &s, &cfg.constants, &[0.0], None).unwrap();
        for (xi, v) in x.iter().zip(&f[0]) {
            assert!((c0.evaluate(*xi) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn random_check_passes() {
        let r = random_derivative_check(&small(), 8, 20, 1e-6, 3).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn sampling_requires_noise() {
        let cfg = small();
        let data = generate_frade(&cfg).unwrap();
        assert!(matches!(
            calibrate_mcmc(&cfg.calibration, &data.initial, &cfg.constants, &data.observations),
            Err(Error::Precondition(_))
        ));
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::{ChainOptions, Coordinates, NewtonOptions, SENSITIVITY_TOL};
use crate::highfid::{
    DarcyConstants, FlowDrive, Grid2D, Limiter, LogNormalStats, PermeabilitySource, Pipeline,
    TransportOptions,
};
use crate::interrogation::{Thresholds, DEFAULT_PROBES};
use crate::spectral::{InitialCondition, TransportConstants, WaveGrid};
use crate::{Error, Result};

/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "OPSPEC_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub domain_length: f64,
    pub n_modes: usize,
    /// Defaults to `2 n_modes + 1`.
    pub n_points: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            domain_length: 1.0,
            n_modes: 256,
            n_points: None,
        }
    }
}

impl GridConfig {
    pub fn wave_grid(&self) -> Result<WaveGrid> {
        WaveGrid::new(
            self.domain_length,
            self.n_modes,
            self.n_points.unwrap_or(2 * self.n_modes + 1),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservationLayout {
    /// `n` equispaced points over the domain at one time.
    Spatial { n: usize, time: f64 },
    /// Samples `t_j = j dt`, `j = 1..=n`, at one location.
    TimeSeries { x: f64, dt: f64, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservationPlan {
    pub layout: ObservationLayout,
    /// Noise standard deviation as a fraction of the peak of the clean data;
    /// absent for deterministic data.
    pub noise_fraction: Option<f64>,
    pub noise_seed: u64,
}

impl Default for ObservationPlan {
    fn default() -> Self {
        Self {
            layout: ObservationLayout::Spatial { n: 64, time: 0.5 },
            noise_fraction: None,
            noise_seed: 0,
        }
    }
}

/// Starting point of the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialGuess {
    /// Spectrum of `nu d^2/dx^2`.
    Fickian { diffusivity: f64 },
    /// Centre of the unit box in rescaled coordinates.
    PriorCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsKind {
    /// `r > 0`, `theta in [pi/2, 3pi/2]`.
    Admissible,
    /// Unit box in rescaled coordinates (support of the uniform prior).
    UnitBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityPoint {
    /// Sensitivities at the initial guess; Newton runs on the active modes only.
    Initial,
    /// Newton over the fitted modes first, then sensitivities at the optimum.
    Optimum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub sensitivity_tolerance: f64,
    pub sensitivity_coordinates: Coordinates,
    pub sensitivity_gn_only: bool,
    pub sensitivity_point: SensitivityPoint,
    pub initial_guess: InitialGuess,
    pub bounds: BoundsKind,
    /// Modes optimized before the sensitivity analysis when it is taken at
    /// the optimum; all modes when absent.
    pub map_modes: Option<usize>,
    pub newton: NewtonOptions,
    pub chain: ChainOptions,
    pub n_chains: usize,
    pub credible_level: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let mut chain = ChainOptions::new(100_000, 10_000, 0);
        chain.thin = 1;
        Self {
            sensitivity_tolerance: SENSITIVITY_TOL,
            sensitivity_coordinates: Coordinates::Physical,
            sensitivity_gn_only: false,
            sensitivity_point: SensitivityPoint::Initial,
            initial_guess: InitialGuess::Fickian { diffusivity: 1e-3 },
            bounds: BoundsKind::Admissible,
            map_modes: None,
            newton: NewtonOptions::default(),
            chain,
            n_chains: 1,
            credible_level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HighFidConfig {
    pub grid: Grid2D,
    pub permeability: PermeabilitySource,
    pub darcy: DarcyConstants,
    pub transport: TransportOptions,
    /// Output times of the upscaled series.
    pub times: Vec<f64>,
}

impl Default for HighFidConfig {
    fn default() -> Self {
        Self {
            grid: Grid2D {
                lx: 1.0,
                ly: 1.0,
                nx: 128,
                ny: 128,
            },
            permeability: PermeabilitySource::Realization {
                stats: LogNormalStats {
                    log_mean: 0.0,
                    log_variance: 1.0,
                    corr_x: 0.1,
                    corr_y: 0.1,
                },
                seed: 0,
            },
            darcy: DarcyConstants::new(1.0, 1.0, FlowDrive::MeanVelocity(1.0)),
            transport: TransportOptions::new(1e-3, Limiter::VanLeer),
            times: vec![0.0, 0.5, 1.0, 1.5, 2.0],
        }
    }
}

impl HighFidConfig {
    pub fn pipeline(&self) -> Pipeline {
        Pipeline {
            grid: self.grid,
            darcy: self.darcy,
            transport: self.transport,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterrogationConfig {
    pub probes: Vec<i64>,
    /// `|mu - i u k_x| dt` of the snapshot spacing.
    pub resolution: f64,
    pub n_snapshots: usize,
    /// Reconstruction used by the probe runs; must be linear in the data.
    pub limiter: Limiter,
    pub thresholds: Thresholds,
}

impl Default for InterrogationConfig {
    fn default() -> Self {
        Self {
            probes: DEFAULT_PROBES.to_vec(),
            resolution: 0.1,
            n_snapshots: 21,
            limiter: Limiter::Fromm,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub times: Vec<f64>,
    /// Real-space samples per output time.
    pub n_points: Option<usize>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            times: vec![0.5, 1.5],
            n_points: None,
        }
    }
}

/// One experiment. Every section is optional; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub grid: GridConfig,
    pub constants: TransportConstants,
    pub initial_condition: InitialCondition,
    pub observations: ObservationPlan,
    pub calibration: CalibrationConfig,
    pub highfid: HighFidConfig,
    pub interrogation: InterrogationConfig,
    pub evolve: EvolveConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: None,
            grid: GridConfig::default(),
            constants: TransportConstants {
                mean_velocity: 1.0,
                diffusivity: 0.01,
                fractional_order: 1.5,
            },
            initial_condition: InitialCondition::gaussian_bump(0.25, 0.05),
            observations: ObservationPlan::default(),
            calibration: CalibrationConfig::default(),
            highfid: HighFidConfig::default(),
            interrogation: InterrogationConfig::default(),
            evolve: EvolveConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.grid.wave_grid().map_err(wrap)?;
        self.constants.validate().map_err(wrap)?;
        if let Some(f) = self.observations.noise_fraction {
            if !(f > 0.0) {
                return Err(Error::Config("noise_fraction must be positive".into()));
            }
        }
        let c = &self.calibration;
        if !(c.sensitivity_tolerance > 0.0 && c.sensitivity_tolerance <= 1.0) {
            return Err(Error::Config("sensitivity_tolerance must lie in (0, 1]".into()));
        }
        if !(c.credible_level > 0.0 && c.credible_level < 1.0) {
            return Err(Error::Config("credible_level must lie in (0, 1)".into()));
        }
        if c.n_chains == 0 {
            return Err(Error::Config("n_chains must be at least 1".into()));
        }
        if self.highfid.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("highfid.times must be increasing".into()));
        }
        if self.interrogation.limiter == Limiter::VanLeer {
            return Err(Error::Config(
                "interrogation needs a linear reconstruction (fromm or upwind)".into(),
            ));
        }
        Ok(())
    }

    /// Canonical TOML serialization.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    /// Output directory: explicit flag, then the environment, then the config.
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(f) = flag {
            return f.to_path_buf();
        }
        if let Ok(env) = std::env::var(OUTPUT_DIR_ENV) {
            if !env.is_empty() {
                return PathBuf::from(env);
            }
        }
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash().unwrap(), c.hash().unwrap());
        assert_eq!(c.hash().unwrap().len(), 64);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = ExperimentConfig::from_toml_str(
            "seed = 3\n[constants]\nmean_velocity = 0.5\ndiffusivity = 0.1\nfractional_order = 2.0\n\
             [observations.layout]\nkind = \"time_series\"\nx = 0.5\ndt = 0.005\nn = 100\n",
        )
        .unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.grid.n_modes, 256);
        assert!(matches!(c.observations.layout, ObservationLayout::TimeSeries { n: 100, .. }));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("sede = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::from_toml_str("[grid]\nn_mode = 3\n").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let e = ExperimentConfig::from_toml_str(
            "[constants]\nmean_velocity = 1.0\ndiffusivity = 0.1\nfractional_order = 2.5\n",
        );
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
    }
}

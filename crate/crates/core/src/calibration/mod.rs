//! Deterministic and Bayesian calibration of the operator spectrum.

mod derivcheck;
mod mcmc;
mod misfit;
mod model;
mod newton;
mod observations;
mod positivity;

pub use derivcheck::{check_derivatives, step_sweep, DerivativeReport, GRADIENT_TOL, HESSIAN_TOL};
pub use mcmc::{
    batch_means_se, histogram, mcmc_sample, regularize, run_chains, Chain, ChainOptions,
    LogTarget, PosteriorTarget, UniformBox, METRIC_FLOOR,
};
pub use misfit::{evaluate, misfit, misfit_gradient, sensitivity_cutoff, MisfitEvaluation, SensitivityReport};
pub use model::{forward_observe, Coordinates, LinearModel, ObservationModel, SpectralModel, Subspace};
pub use newton::{newton_map, Bounds, IterationRecord, NewtonOptions, NewtonResult, Termination};
pub use observations::{spatial_points, time_series_points, ObsPoint, ObservationSet};
pub use positivity::{positivity_diagnostic, PositivityReport};

/// Default relative sensitivity tolerance.
pub const SENSITIVITY_TOL: f64 = 1e-2;

//! Fourier-space machinery for the generalized 1D advection-diffusion
//! equation `c_t + u c_x = D c` on a periodic domain, where `D` is a
//! shift-invariant operator known only through its eigenvalues `mu_k`.

mod field;
mod grid;
mod propagate;
mod spectrum;

pub use field::{analyze, synthesize, SpectralField};
pub use grid::WaveGrid;
pub use propagate::{propagate_exact, InitialCondition, TransportConstants};
pub use spectrum::{
    fickian_spectrum, frade_spectrum, lambda_from_mu, mu_from_lambda, radius_map, rescale, unrescale,
    OperatorSpectrum, RescaledParameters,
};

/// Relative tolerance for transform round trips and realness checks.
pub const ROUND_TRIP_TOL: f64 = 1e-12;

//! High-fidelity data model: log-normal permeability, incompressible Darcy
//! flow, 2D advection-diffusion transport and depthwise upscaling.

mod darcy;
mod grid;
mod permeability;
mod transport;
mod upscale;

pub use darcy::{solve_darcy, DarcyConstants, DarcyVelocity, FlowDrive};
pub use grid::{depth_average, Concentration2D, Grid2D};
pub use permeability::{sample_permeability, LogNormalStats, PermeabilityRealization};
pub use transport::{advance_ade2d, courant_number, evolve_to_times, stable_step, Limiter, TransportOptions};
pub use upscale::{run_member, run_upscaled, Pipeline, PermeabilitySource, UpscaledSeries};

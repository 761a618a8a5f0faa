//! Inference of the eigenvalue spectrum of an unknown shift-invariant
//! diffusion operator embedded in a 1D advection-diffusion model.
//!
//! The crate is organised around five pieces:
//!
//! * [`spectral`] : Fourier representation of the generalized 1D ADE, exact
//!   propagation, polar/rescaled operator parametrizations and the
//!   fractional-ADE reference spectrum.
//! * [`highfid`] : the 2D Darcy-flow transport model used to generate
//!   calibration data, with depthwise upscaling.
//! * [`calibration`] : misfit, analytic Jacobian/Hessian, sensitivity-based
//!   dimension reduction, projected Newton MAP and Hessian-preconditioned
//!   Langevin MCMC.
//! * [`interrogation`] : single Fourier-mode probes of the 2D model testing
//!   shift invariance and time independence of the 1D closure.
//! * [`io`] : experiment configuration, the columnar text format and the
//!   binary 2D snapshot format.
//! * [`workflow`] : the experiment pipelines built from the above.

pub mod calibration;
pub mod error;
pub mod highfid;
pub mod interrogation;
pub mod io;
pub mod spectral;
pub mod workflow;

pub use error::{Error, Result};
pub use num_complex::Complex64;

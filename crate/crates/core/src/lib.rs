//! Numerical laboratory for quantized damped transversal waves.
//!
//! * [`canonical`]: generator-potential mechanics and the zero-Hamiltonian check.
//! * [`analytic`]: closed-form oscillator, Gaussian and Airy packets.
//! * [`operators`]: spectral derivatives, commutators and the damped state equation.
//! * [`propagator`]: split-step evolution of the state equation.
//! * [`metrics`]: mass, width, deflection and shape-correlation observables.
//! * [`io`]: binary field files, sidecars and CSV reports.

pub mod analytic;
pub mod canonical;
pub mod error;
pub mod io;
pub mod model;
pub mod metrics;
pub mod operators;
pub mod propagator;
mod spectral;

pub use error::{Error, Result};

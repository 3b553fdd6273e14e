//! Numerical toolkit for the quantum billiard problem: a wave packet that
//! scatters off its own time-shifted image after traversing a wormhole time
//! machine. The crate evaluates the scattering kernel, solves the
//! self-consistency requirement for Gaussian packets, analyzes the stability
//! of those solutions, and simulates the effective non-linear Schrödinger
//! dynamics.

pub mod cli;
pub mod error;
pub mod kernel;
pub mod model;
pub mod nls;
pub mod quad;
pub(crate) mod radial;
pub mod selfcons;
pub mod specfun;
pub mod stability;

pub use error::{Error, Result};

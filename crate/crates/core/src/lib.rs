//! Private release of manifold-valued summaries via diffusion mechanisms.

pub mod calibration;
pub mod error;
pub mod frechet;
pub mod harness;
pub mod manifold;
pub mod mechanisms;
pub mod parallel;
pub mod quadrature;
pub mod release;
pub mod rng;

pub use error::{Error, Result};

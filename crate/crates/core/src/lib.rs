//! NEAT neuroevolution with an optional Gaussian-process surrogate that
//! decides which offspring are worth a real fitness evaluation.

pub mod cmaes;
pub mod env;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod gp;
pub mod neat;
pub mod network;

pub use error::{Error, Result};

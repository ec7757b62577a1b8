pub mod beamformer;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod sim;
pub mod verifier;

pub use error::{Error, Result};

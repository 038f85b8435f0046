//! Simulation and extraction pipeline for a dipole-noise true random number
//! generator: Monte Carlo current traces, the analog front end that turns
//! them into bits, statistical analyses, a statistical test battery, an
//! NLFSR throughput expander and applications consuming the bits.

pub mod analysis;
pub mod bits;
pub mod chain;
pub mod config;
pub mod crypto;
pub mod error;
pub mod nist;
pub mod nlfsr;
pub mod pipeline;
pub mod pnm;
pub mod sim;
pub mod special;

pub use bits::BitStream;
pub use error::{Error, Result};

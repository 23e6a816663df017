//! Hardware-to-threshold simulation of distributed toric surface codes.
//!
//! The pipeline runs from physical GHZ-generation models through noisy stabilizer
//! superoperator tables to Monte Carlo decoding and threshold fits.

pub mod decoders;
pub mod error;
pub mod harness;
pub mod noise;
pub mod protocols;
pub mod quantum;
pub mod schemes;
pub mod superop;
pub mod surface;

pub use error::{Error, Result};

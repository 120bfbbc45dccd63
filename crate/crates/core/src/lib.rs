//! Monte-Carlo dimensioning of indoor wireless access networks.
//!
//! Estimates how many access points per km^2 a Wi-Fi network, a
//! frequency-planned pico-cellular network and a multi-cell zero-forcing
//! network need to carry a given monthly data demand per user, on a
//! rectangular indoor floor with an optional grid of walls.

// `!(x > 0.0)` style checks are how parameter validation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod link;
pub mod oracle;
pub mod output;
pub mod planning;
pub mod rng;
pub mod scenario;
pub mod static_cellular;
pub mod stats;
pub mod wifi;
pub mod zf;

pub use error::{Error, Result};

//! Segmented Best Path for revenue online dial-a-ride.
//!
//! All times, distances and revenues are exact rationals ([`Scalar`]).

// Errors carry exact rationals; boxing them buys nothing here.
#![allow(clippy::result_large_err)]

pub mod adversary;
pub mod analysis;
pub mod bipartite;
pub mod model;
pub mod online;
pub mod oracle;
pub mod random;
pub mod sbp;
pub mod scalar;

pub use model::*;
pub use scalar::Scalar;

//! Coverage simulation for a millimeter-wave link served through a flat
//! passive reflector at the corner of an L-shaped corridor.
//!
//! The library synthesizes received-signal-strength (RSS) grids for the
//! non-line-of-sight corridor leg, applies a location-dependent RSS
//! back-off for conservative link adaptation, estimates outage probability
//! under user movement via Monte Carlo, evaluates multi-user selection
//! gains as CCDFs, and models the LiDAR field of view obtained by sensing
//! through the mirror aperture.
//!
//! All randomness flows from explicit 64-bit seeds; equal seeds produce
//! bit-identical results regardless of thread count.

pub mod backoff;
pub mod config;
pub mod error;
pub mod grid;
pub mod lidar;
pub mod outage;
pub mod rng;
pub mod scene;
pub mod scheduler;
pub mod stats;
pub mod synth;
pub mod units;

pub use error::{Error, Result};

//! Eavesdropping success probability (ESP) for millimeter-wave SWIPT downlinks.
//!
//! Two engines answer the same question, "how often does a passive
//! eavesdropper see an SINR above a threshold?":
//!
//! * [`analytic`] evaluates the closed-form stochastic-geometry expressions
//!   for independent and colluding eavesdroppers.
//! * [`montecarlo`] draws random obstacle/reflector maps, traces LOS and
//!   first-order specular paths, and measures the empirical ESP.
//!
//! [`sweep`] drives both over parameter grids and emits CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod antenna;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod montecarlo;
pub mod numeric;
pub mod propagation;
pub mod sweep;
pub mod units;

pub use config::SystemParams;
pub use error::{ConfigError, Error, ModelError};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

//! Downlink performance models for LTE-WLAN path aggregation (LWPA).
//!
//! The crate has two engines that describe the same network:
//!
//! * [`analytic`] evaluates the closed-form density approximations for
//!   active LWPA-mode access points, the interference Laplace transforms,
//!   link success probabilities, ergodic rates and the derived cellular rate
//!   and area spectral efficiency (ASE) improvements.
//! * [`montecarlo`] samples finite toroidal windows of the same spatial model
//!   ([`point_process`]) and estimates every analytic quantity with
//!   confidence intervals.
//!
//! All quantities are in SI units internally: meters, points per square
//! meter, watts and hertz. Conversion from the customary km² densities and
//! dBm powers happens at the boundary via [`params`].

pub mod analytic;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod params;
pub mod pattern;
pub mod point_process;

pub use error::{Error, Result};
pub use params::{dbm_to_watts, reference_params, watts_to_dbm, NetworkParams};
pub use pattern::{Point, PointPattern, Window};

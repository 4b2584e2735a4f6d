//! Deviation detection for prescribed strategy profiles.
//!
//! Players follow behavior strategies over a finite alphabet. A goal fixes a
//! prescribed profile and a target set of infinite plays described by a
//! prefix-free detector. When a play misses the target, a blame function
//! names the player most likely to have deviated.
//!
//! - [`model`]: histories, strategies, detectors, episode simulation
//! - [`likelihood`]: the maximum-likelihood blame rule
//! - [`adjacent_ones`] and [`random_walk`]: the two worked goals with their
//!   explicit blame functions
//! - [`deviations`]: adversarial strategies
//! - [`oracle`]: exact enumeration of small horizons
//! - [`montecarlo`]: seeded trial runners, interval estimates, calibration

pub mod adjacent_ones;
pub mod deviations;
pub mod error;
pub mod likelihood;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod random_walk;
pub mod single_bit;

pub use error::{Error, Result};

//! Longitudinal carrier-landing simulation for an F/A-18-class airframe.
//!
//! The crate couples a nonlinear point-mass pitch-plane model with actuator
//! lags, a finite-time augmented disturbance observer, a cascaded
//! guidance/sink/velocity/pitch control stack, and a stochastic deck and
//! air-wake environment, all stepped by fixed-step RK4.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuation;
pub mod airframe;
pub mod config;
pub mod control;
pub mod environment;
pub mod error;
pub mod integrate;
pub mod observer;
pub mod sim;
pub mod sweep;
pub mod trimlin;

pub use error::{Error, Result};

//! Estimators of the AR(1) correlation coefficient.
//!
//! Three estimators are provided side by side:
//!
//! - the ACF estimator, the ratio of the lag-1 product sum to the energy of the series;
//! - the sign-process (Kedem) estimator `cos(π(1 − λ̂))`, where `λ̂` is the fraction
//!   of consecutive sign agreements;
//! - a five-segment piecewise-linear replacement for the cosine, evaluable with shifts
//!   and additions only.
//!
//! Alongside the floating-point batch estimators the crate carries bit-accurate
//! fixed-point models of the streaming hardware datapaths ([`streaming`]), a
//! 14-iteration CORDIC ([`fixed`]), closed-form and instrumented operation counts
//! ([`complexity`]), a refitter for the piecewise model ([`pwl_fit`]) and the Monte
//! Carlo bias experiment ([`montecarlo`]).

pub mod ar1;
pub mod cli;
pub mod complexity;
pub mod dyadic;
pub mod error;
pub mod estimators;
pub mod fixed;
pub mod montecarlo;
pub mod pwl_fit;
pub mod streaming;

pub use error::{Error, ErrorKind, Result};

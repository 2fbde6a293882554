//! Boost converter simulation with observer-based harmonic ripple feedback.
//!
//! The dc-link voltage (or inductor current) ripple of a boost converter
//! feeding a six-step motor drive is modelled as a dc level plus three
//! harmonics of the commutation frequency. A discrete Luenberger observer
//! estimates those harmonics, and the duty-cycle controller feeds them back
//! to cancel the ripple.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod controller;
pub mod error;
pub mod harmonic_model;
pub mod numerics;
pub mod observer;
pub mod plant;
pub mod scenario;
pub mod tuner;

pub use error::{Error, Result};

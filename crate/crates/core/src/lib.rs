//! Fock-space simulation of entanglement transfer over fading bosonic channels.
//!
//! The crate builds two-mode entangled states (the two-mode squeezed vacuum and
//! its photon-subtracted, photon-added and photon-replaced descendants, plus NOON
//! states), propagates them through noisy attenuating channels using the Kraus
//! operator-sum representation, averages over a log-negative Weibull fading
//! distribution, and evaluates logarithmic negativity, conditional-entropy
//! bounds and entanglement-generation rates.
//!
//! Everything here is pure computation on `alloc` collections so the crate
//! builds under `no_std`. File formats, the command-line front end and
//! thread pools live in the `fockfade` crate.
#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod channel;
pub mod entanglement;
mod error;
pub mod experiments;
pub mod fading;
pub mod fockstate;
pub mod numeric;

pub use error::{Error, Result};

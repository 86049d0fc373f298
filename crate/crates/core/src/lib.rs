//! Monte Carlo simulation of single-carrier frequency-domain-equalized
//! amplify-and-forward links over Saleh–Valenzuela underwater channels.
//!
//! The crate is organized along the signal chain:
//!
//! - [`channel`]: eigenray channel draws, tap reduction, Doppler evolution,
//!   circulant algebra and hop path gains.
//! - [`txrx`]: modulation, cyclic prefix handling and the unitary DFT pair.
//! - [`relay`]: fixed-gain amplify-and-forward processing.
//! - [`detectors`]: MRC, MMSE, exhaustive ML and per-bin LMS/RLS equalizers.
//! - [`harness`]: seeded, parallel Monte Carlo experiments.
//! - [`report`]: CSV serialization of experiment results.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detectors;
pub mod dft;
pub mod error;
pub mod harness;
pub mod relay;
pub mod report;
pub mod txrx;

pub use error::{Error, Result};

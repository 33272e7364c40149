//! Channel-quality prediction and channel-aware routing for underwater
//! acoustic sensor networks.
//!
//! * [`estimators`]: SNR predictors (mean, EMA, AR(p), nearest-neighbor
//!   regression with a quantized search index and history compression).
//! * [`channel`]: acoustic attenuation, SNR, packet success probability and
//!   synthetic SNR traces.
//! * [`netsim`]: a deterministic discrete-event simulator comparing DBCAR
//!   against DBR and a CARP-like baseline.
//! * [`bench`]: estimator accuracy and optimization benchmarks.
//! * [`cli`]: the `aquannr` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod channel;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod netsim;

pub use error::{Error, Result};

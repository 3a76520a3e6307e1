//! Budget-constrained estimation of low-tail SNR quantiles, and a simulator
//! for the feedback loop that picks an eMBMS multicast rate from them.
//!
//! * [`estimation`]: empirical quantiles, one-step and two-step estimators,
//!   error bounds, Horvitz–Thompson fractions and exponential smoothing.
//! * [`snr`]: 0.1 dB quantization and SNR histograms.
//! * [`venue`]: venues, UE mobility and activity, per-interval SNR draws.
//! * [`controller`]: DyMo and the Optimal, Uniform and Order-Statistics
//!   baselines, group instructions and MCS selection.
//! * [`metrics`]: per-interval records, RMSEs and CSV output.
//! * [`harness`]: run configuration, sweeps, artifacts, estimator checks.

pub mod controller;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod metrics;
pub mod snr;
pub mod venue;

pub use error::{Error, Result};

//! Full-reference audio quality measures and the correlation meta-analysis
//! used to judge them against listening-test scores.
//!
//! The crate is split by concern:
//!
//! - [`signal`]: the [`AudioSignal`] container, WAV I/O, resampling, framing.
//! - [`speech`]: frequency-weighted segmental SNR and the LPC log-likelihood
//!   ratio distance.
//! - [`bss`]: least-squares source-separation decompositions (512-tap FIR and
//!   scale-invariant) and the SDR/SIR/SAR family of energy ratios.
//! - [`models`]: the uniform [`Measure`](models::Measure) interface, external
//!   tool adapters, the two-MOV combiner and the artifacts-only wrapper.
//! - [`stats`]: Pearson, Kendall, Fisher-z aggregation, significance testing
//!   and ranked reports.

pub mod bss;
mod error;
pub mod models;
pub mod signal;
pub mod speech;
pub mod stats;

pub use error::{Error, Result};
pub use signal::AudioSignal;

//! Two-stage analog combining for hybrid MIMO receivers with low-resolution
//! ADCs.
//!
//! The crate covers the full evaluation chain: geometric mmWave channels
//! ([`channel`]), the additive quantization noise model ([`quantization`]),
//! five analog combiner designs ([`combiners`]), the quantized mutual
//! information together with its closed-form rates and bounds ([`metrics`]),
//! and seeded Monte Carlo sweeps ([`simulation`]) driven by a plain-text
//! configuration ([`config`]) and written out as CSV ([`report`]).

pub mod channel;
pub mod combiners;
pub mod config;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod quantization;
pub mod report;
pub mod simulation;
pub mod validation;

pub use combiners::{AngleCodebook, Combiner, DesignTag};
pub use error::{Error, Result};
pub use metrics::MiContext;
pub use quantization::AdcModel;
pub use simulation::{run_sweep, SweepConfig, SweepResult};

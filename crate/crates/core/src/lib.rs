//! Throughput modelling and max-min spreading-factor planning for
//! single-gateway LoRa uplinks under unslotted Aloha.
//!
//! * [`model`]: link budget, SF zones, duty cycles, channel-inversion power.
//! * [`analytic`]: closed-form success probability and zone throughput.
//! * [`simulate`]: Monte-Carlo evaluation of the exact SNR/SIR success event.
//! * [`optimize`]: per-zone duty optimisation and iterative boundary balancing.

pub mod analytic;
pub mod error;
pub mod model;
pub mod optimize;
pub mod report;
pub mod simulate;
pub mod units;

pub use analytic::{ZoneResult, ZoneScenario};
pub use error::{Error, Result};
pub use model::{
    DutyPlan, NetworkConfig, Partition, PathGain, PowerMode, PowerPolicy, SfParams, SfTable,
    SpreadingFactor, NUM_BOUNDARIES, NUM_SF,
};
pub use optimize::{
    BenchmarkScheme, BenchmarkSpec, DutyMode, IbOptions, MaxMinSolution, Termination,
};
pub use report::{ThroughputReport, ZoneReport};
pub use simulate::{FullScenario, McEstimate, PowerControl};

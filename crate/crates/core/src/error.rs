use thiserror::Error;

use crate::model::SpreadingFactor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameters for SF {sf}: {reason}")]
    InvalidSfParams { sf: u8, reason: String },

    #[error("spreading factor {0} outside 7..=12")]
    InvalidSpreadingFactor(u8),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{sf} cannot close the link even at the gateway foot (best SNR {best_snr:.3e} < threshold {threshold:.3e})")]
    UnreachableSf {
        sf: SpreadingFactor,
        best_snr: f64,
        threshold: f64,
    },

    #[error("distance {distance} m outside zone of {sf} [{inner}, {outer}] m")]
    OutOfZone {
        sf: SpreadingFactor,
        distance: f64,
        inner: f64,
        outer: f64,
    },

    #[error("duty cycle {0} outside [0, 1)")]
    InvalidDuty(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

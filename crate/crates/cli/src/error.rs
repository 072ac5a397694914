use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Precondition(String),

    #[error("balancing hit the iteration cap after {0} moves; best partition so far was written")]
    NotConverged(usize),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Config(_) | Failure::Io(_) => 1,
            Failure::NotConverged(_) => 2,
            Failure::Precondition(_) => 3,
        }
    }
}

impl From<lora_maxmin::Error> for Failure {
    fn from(e: lora_maxmin::Error) -> Self {
        use lora_maxmin::Error::*;
        match e {
            UnreachableSf { .. } | OutOfZone { .. } => Failure::Precondition(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

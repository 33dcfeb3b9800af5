use std::io;

use thiserror::Error;

use crate::kernel::KernelError;
use crate::mobility::MobilityError;
use crate::registry::RegistryError;
use crate::scenario::ScenarioError;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

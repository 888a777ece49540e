use thiserror::Error;

use crate::site::Site;

/// Errors raised by the simulation and exact-math layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {0} lies below the floor (z < 0) in half-space mode")]
    BelowFloor(Site),

    #[error("floor vertex {0} cannot be stored as visited")]
    FloorInsert(Site),

    #[error("illegal configuration: {reason} at {site}")]
    IllegalConfiguration { reason: String, site: Site },

    #[error("target {0} is not a floor vertex")]
    NotFloorTarget(Site),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),

    #[error("statistics from different configurations cannot be merged: {0}")]
    ConfigMismatch(String),

    #[error("degenerate design matrix: {0}")]
    DegenerateFit(String),

    #[error("coupling invariant violated at step {step}: {what}")]
    CouplingViolation { step: u64, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;

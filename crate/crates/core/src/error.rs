use thiserror::Error;

use crate::model::ModeIndex;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{name} must be finite")]
    NonFinite { name: &'static str },
    #[error("{name} must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("mode {0} listed twice")]
    DuplicateMode(ModeIndex),
    #[error("mode {0} is not part of this system")]
    MissingMode(ModeIndex),
    #[error("mode {0} cannot couple to itself")]
    SelfCoupling(ModeIndex),
    #[error("quasi-mode {0} has no fixed frequency; poles are undefined")]
    QuasiModePoles(ModeIndex),
    #[error("invalid parameter file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum ResponseError {
    #[error("coefficient matrix is singular at nu = {nu} (pivot ratio {pivot_ratio:.3e})")]
    Singular { nu: f64, pivot_ratio: f64 },
    #[error("elimination block over modes {modes:?} is singular at nu = {nu}")]
    SingularBlock { modes: Vec<ModeIndex>, nu: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no temperature given for mechanical input {0}")]
    MissingTemperature(ModeIndex),
    #[error("temperature of {mode} must be non-negative, got {value}")]
    NegativeTemperature { mode: ModeIndex, value: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

#[derive(Debug, Error)]
pub enum BathError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("at least 2 bath modes are required, got {0}")]
    TooFewModes(usize),
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {needed} observations, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("design matrix is singular: {0}")]
    Singular(&'static str),
    #[error("power must be positive for the inverse model, got {0}")]
    NonPositivePower(f64),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("dataset mixes propagation directions")]
    MixedDirections,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

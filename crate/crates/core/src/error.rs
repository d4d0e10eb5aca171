use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid label set: {0}")]
    LabelSet(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("empty label subset")]
    EmptySubset,

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("weight vector has length {got}, profile has {expected} models")]
    WeightLength { expected: usize, got: usize },

    #[error("model index {index} out of range 1..={models}")]
    ModelIndex { index: usize, models: usize },

    #[error("family too large: {required} profiles required, limit is {limit}")]
    FamilyTooLarge { required: u128, limit: u128 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

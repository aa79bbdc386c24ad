use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("label {label} out of range for group of order {order}")]
    LabelOutOfRange { label: usize, order: usize },
    #[error("operands belong to different groups")]
    GroupMismatch,
    #[error("value is not representable: {0}")]
    NotRepresentable(String),
    #[error("interval scales differ: {0} vs {1}")]
    ScaleMismatch(i32, i32),
    #[error("resolution {have} is too coarse, need at least {need}")]
    InsufficientResolution { have: i64, need: i64 },
    #[error("point is not in the interval")]
    NotInInterval,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unsupported exponent p = {0} for this operation")]
    Exponent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("axis is not unit length (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("matrix is not a rotation (orthonormality error {orthonormality}, det {det})")]
    NotARotation { orthonormality: f64, det: f64 },

    #[error("matrix cannot be orthonormalized (det {det})")]
    NotOrthonormalizable { det: f64 },

    #[error("heading delta {index} is not a pure yaw rotation (deviation {deviation} rad)")]
    NotPureYaw { index: usize, deviation: f64 },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what}: need at least {needed} frames, got {found}")]
    TooFewFrames {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("loss component `{0}` is negative")]
    NegativeLoss(&'static str),

    #[error("sequence of {frames} frames exceeds the solver limit of {limit}")]
    SequenceTooLong { frames: usize, limit: usize },

    #[error("objective not locally decreasable")]
    NotDecreasable,
}

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated data: need {expected} bytes, got {actual}")]
    TruncatedData { expected: usize, actual: usize },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("negative input to {op}")]
    NegativeInput { op: &'static str },

    #[error("singular color matrix (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("non-positive gain {value}")]
    NonPositiveGain { value: f64 },

    #[error("odd dimensions {width}x{height}; Bayer frames need even sides")]
    OddDimensions { width: usize, height: usize },

    #[error("negative signal {value} at pixel {index}")]
    NegativeSignal { index: usize, value: f64 },

    #[error("no bias bucket for shutter {shutter_s} s")]
    UnknownShutter { shutter_s: f64 },

    #[error("crop ({x},{y}) {w}x{h} out of bounds for {frame_w}x{frame_h} frame")]
    CropOutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        frame_w: usize,
        frame_h: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-positive photon-transfer slope {slope}")]
    NonPositiveSlope { slope: f64 },

    #[error("too few frames: need at least {needed}, got {got}")]
    TooFewFrames { needed: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("bin layout mismatch: {0}")]
    BinMismatch(String),

    #[error("zero total noise energy")]
    ZeroTotalEnergy,

    #[error("missing counterpart for {0}")]
    MissingPair(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("schedule step {step} out of range 0..={total}")]
    StepOutOfRange { step: u64, total: u64 },

    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),

    #[error("checkpoint architecture mismatch: {0}")]
    ArchMismatch(String),

    #[error("image {width}x{height} too small for {window}x{window} window")]
    ImageTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("non-finite loss {loss} at step {step}")]
    NonFiniteLoss { step: u64, loss: f64 },

    #[error("image decode: {0}")]
    ImageDecode(String),
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bands overlap: {0}")]
    OverlappingBands(String),

    #[error("{what} at {value} THz lies outside the axis [{start}, {end}] THz")]
    OutsideAxis {
        what: &'static str,
        value: f64,
        start: f64,
        end: f64,
    },

    #[error("axis mismatch between {0} and {1}")]
    AxisMismatch(&'static str, &'static str),

    #[error("joint spectrum has zero norm")]
    ZeroNorm,

    #[error("transmission {0} outside [0, 1]")]
    TransmissionOutOfRange(f64),

    #[error("mean photon number {mean} exceeds the low-gain limit {limit}")]
    GainTooHigh { mean: f64, limit: f64 },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("polynomial is reducible over Q: has the monic factor {factor:?} (ascending coefficients)")]
    Reducible { factor: Vec<i64> },

    #[error("units must be supplied for this field (only degree 1, imaginary quadratic and real quadratic fields are handled automatically)")]
    UnitsRequired,

    #[error("invalid unit data: {0}")]
    InvalidUnits(String),

    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    #[error("precision exhausted at {bits} bits while {context}")]
    PrecisionExhausted { bits: u32, context: String },

    #[error("element is not a unit: |N| = {norm}")]
    NotAUnit { norm: String },

    #[error("unit search exhausted: {0}")]
    UnitSearchExhausted(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("illegal move in round {round}: {reason}")]
    IllegalMove { round: usize, reason: String },

    #[error("critical point avoidance failed: {0}")]
    CriticalPointsDense(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precision(bits: u32, context: impl Into<String>) -> Self {
        Error::PrecisionExhausted {
            bits,
            context: context.into(),
        }
    }

    pub fn is_precision(&self) -> bool {
        matches!(self, Error::PrecisionExhausted { .. })
    }
}

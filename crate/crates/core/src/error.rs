use thiserror::Error;

use crate::model::DataRate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("payload length {0} bytes is outside 1..=255")]
    PayloadOutOfRange(u32),

    #[error("code rate {num}/{den} is not supported (only 1/3 and 2/3)")]
    UnsupportedCodeRate { num: u32, den: u32 },

    #[error("unknown data rate `{0}`")]
    UnknownDataRate(String),

    #[error("calibration document could not be parsed: {0}")]
    CalibrationParse(#[from] serde_json::Error),

    #[error("invalid calibration field `{field}`: {reason}")]
    InvalidCalibration { field: String, reason: String },

    #[error("no transmit-current calibration for {dr} on the {amplifier} amplifier")]
    MissingCalibration {
        dr: DataRate,
        amplifier: &'static str,
    },

    #[error("refusing to extrapolate {what}: {x} is outside the calibrated span [{lo}, {hi}]")]
    Extrapolation {
        what: &'static str,
        x: f64,
        lo: f64,
        hi: f64,
    },

    #[error("hop grid needs at least 2 channels, got {0}")]
    InvalidGrid(u32),

    #[error(
        "notification period {period_ms} ms is shorter than the active duration {active_ms} ms"
    )]
    InfeasiblePeriod { period_ms: f64, active_ms: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn calibration(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidCalibration {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("Fock cutoff n_max = {n_max} leaves tail mass {tail:e} (must be < {limit:e})")]
    CutoffInsufficient { n_max: usize, tail: f64, limit: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error on row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("frequency {ghz} GHz outside table span [{min_ghz}, {max_ghz}] GHz")]
    OutOfRange { ghz: f64, min_ghz: f64, max_ghz: f64 },

    #[error("unphysical geometry: transmissivity {eta:e} exceeds 1 (near-field input)")]
    UnphysicalGeometry { eta: f64 },

    #[error("target undetectable: SNR_eff at {range_m:e} m is {snr_db:.3} dB, below threshold {threshold_db:.3} dB")]
    NoDetection {
        range_m: f64,
        snr_db: f64,
        threshold_db: f64,
    },

    #[error("Albersheim estimator outside its validity box: {0}")]
    ValidityBox(String),

    #[error("covariance is not positive semi-definite: eigenvalue {eigenvalue:e}")]
    NotPsd { eigenvalue: f64 },

    #[error("insufficient trials: {trials} trials cannot resolve p_fa = {p_fa:e} (need at least {needed})")]
    InsufficientTrials { trials: usize, p_fa: f64, needed: usize },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}

/// Checks `value` is finite and strictly positive.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "must be finite and > 0"))
    }
}

/// Checks `value` is finite and non-negative.
pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "must be finite and >= 0"))
    }
}

use thiserror::Error;

/// Problems found while reading or validating a system configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config document: {0}")]
    Syntax(#[from] serde_json::Error),

    #[error("unknown key `{key}` in {section}")]
    UnknownKey { section: String, key: String },

    #[error("unknown unit suffix `{suffix}` in key `{key}` ({section})")]
    UnknownUnit {
        section: String,
        key: String,
        suffix: String,
    },

    #[error("missing required key `{key}` in {section}")]
    MissingKey { section: String, key: String },

    #[error("key `{key}` in {section}: expected {expected}")]
    WrongType {
        section: String,
        key: String,
        expected: &'static str,
    },

    #[error("conflicting keys in {section}: {detail}")]
    Conflict { section: String, detail: String },

    #[error("unknown modulation format `{0}`")]
    UnknownFormat(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl ConfigError {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        ConfigError::Invariant(msg.into())
    }
}

/// Failures inside the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error(
        "integration step underflow ({step_km:e} km) at f1={f1:e} Hz, f2={f2:e} Hz, f={f:e} Hz"
    )]
    StepUnderflow { f1: f64, f2: f64, f: f64, step_km: f64 },

    #[error("non-finite {what} ({value}) at z={z_km} km, f={f_hz:e} Hz")]
    NonFinite {
        what: &'static str,
        value: f64,
        z_km: f64,
        f_hz: f64,
    },

    #[error("quadrature grid too coarse: {points} point(s) per channel, need at least 2")]
    GridTooCoarse { points: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Errors raised while assembling NLI variances.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("channel {coi} outside grid of half-width {m}")]
    InvalidCoi { coi: i32, m: i32 },

    #[error("island ({kappa1}, {kappa2}, {l}) for COI {coi}: {source}")]
    Island {
        coi: i32,
        kappa1: i32,
        kappa2: i32,
        l: i32,
        #[source]
        source: NumericError,
    },

    #[error(transparent)]
    Numeric(#[from] NumericError),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("worker pool: {0}")]
    Pool(String),
}

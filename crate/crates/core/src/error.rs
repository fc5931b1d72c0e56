use thiserror::Error;

/// Problems reading or validating a parameter set.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("invariant violated for {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Evaluation outside the domain where a model expression is meaningful.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0}")]
    Domain(String),
    #[error("side-lobe gain formula breaks down for N={n}: G_s={side:.4} >= G_m={main}; set mainGain/sideGain or gainClampMode=swapSafe")]
    GainBreakdown { n: u32, main: f64, side: f64 },
    #[error("closed-form interference integral is not usable: {0}")]
    Interference(String),
    #[error("model validity: {0}")]
    Validity(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("waveform has {samples} samples, shorter than one {window} sample window")]
    InputTooShort { samples: usize, window: usize },

    #[error("invalid warp factor {0} (must lie in [0.5, 1.5] and fit the band)")]
    InvalidWarp(f64),

    #[error("invalid feature configuration: {0}")]
    InvalidFeatureConfig(String),

    #[error("unknown augmentation mode `{0}`")]
    InvalidMode(String),

    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    #[error("shape mismatch: {0}")]
    ShapeError(String),

    #[error("forward cache does not match the network it is applied to")]
    CacheMismatch,

    #[error("invalid dropout rate {0} (must satisfy 0 <= p < 1)")]
    InvalidRate(f64),

    #[error("forbidden dropout configuration: {0}")]
    ForbiddenConfiguration(String),

    #[error("cell-state dropout cannot be applied at location {0}")]
    WrongLocation(String),

    #[error("invalid dropout policy: {0}")]
    InvalidPolicy(String),

    #[error("utterance `{utterance}`: {frames} frames cannot align {labels} labels ({required} frames required)")]
    InfeasibleAlignment {
        utterance: String,
        frames: usize,
        labels: usize,
        required: usize,
    },

    #[error("non-finite gradient while training utterance `{utterance}`")]
    NonFiniteGradient { utterance: String },

    #[error("invalid learning-rate schedule: {0}")]
    Schedule(String),

    #[error("malformed {kind}: {msg}")]
    Format { kind: &'static str, msg: String },

    #[error("config error at {location}: {msg}")]
    Config { location: String, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(kind: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            kind,
            msg: msg.into(),
        }
    }

    pub(crate) fn config(location: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            msg: msg.into(),
        }
    }
}

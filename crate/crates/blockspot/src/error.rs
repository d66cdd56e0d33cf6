use std::path::PathBuf;

use blockspot_core::blockgen::BlockGenError;
use blockspot_core::crop::CropError;
use blockspot_core::metrics::MetricsError;
use blockspot_core::synth::SynthError;
use blockspot_core::tokenizer::TokenizerError;
use blockspot_core::uvlm::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    Schema { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("block generation failed for record {record}: {source}")]
    BlockGen {
        record: usize,
        #[source]
        source: BlockGenError,
    },
    #[error(transparent)]
    Crop(#[from] CropError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad usage or bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_)
            | Error::Schema { .. }
            | Error::Io { .. }
            | Error::Image { .. }
            | Error::Checkpoint { .. }
            | Error::BlockGen { .. }
            | Error::Crop(_)
            | Error::Metrics(_)
            | Error::Tokenizer(_) => 2,
            Error::Synth(_) | Error::Model(_) | Error::Internal(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

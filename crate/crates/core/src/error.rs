use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected:?}, got {actual:?}")]
    Shape {
        op: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("conv1d channel mismatch: kernel expects {expected} input channels, input has {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("non-causal convolution requires an odd kernel width, got {0}")]
    EvenKernel(usize),
    #[error("invalid convolution geometry: {0}")]
    ConvGeometry(String),
    #[error("id {id} out of range for a table with {rows} rows")]
    IdOutOfRange { id: usize, rows: usize },
    #[error("target {target} is not a predictable class (valid range 1..{classes})")]
    InvalidTarget { target: usize, classes: usize },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarBackward(Vec<usize>),
    #[error("vocabulary is empty after dropping items seen fewer than {min_count} times")]
    EmptyVocabulary { min_count: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("need at least 3 rows to split, got {0}")]
    TooFewRows(usize),
    #[error("sequence with valid length {0} cannot be gap-filled (need at least 2)")]
    TooShort(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("top-{n} requested but only {items} items exist")]
    TopNTooLarge { n: usize, items: usize },
    #[error("training loss became non-finite at epoch {epoch}, step {step}: {loss}")]
    NonFiniteLoss { epoch: usize, step: usize, loss: f64 },
    #[error("checkpoint is corrupt: {0}")]
    Corrupt(String),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

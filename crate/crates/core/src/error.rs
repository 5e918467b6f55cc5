use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty profile")]
    EmptyProfile,
    #[error("no signal")]
    NoSignal,
    #[error("invalid power delay profile: {0}")]
    InvalidProfile(String),
    #[error("threshold must be <= 0 dB, got {0}")]
    PositiveThreshold(f64),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("trace too short to establish reference ({0} samples, need at least {1})")]
    TraceTooShort(usize, usize),
    #[error("normalize first: trace median is {0:.3} dB")]
    NotNormalized(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("degenerate sample")]
    DegenerateSample,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("weibull fit failed")]
    WeibullFitFailed,
    #[error("zero variance reference")]
    ZeroVarianceReference,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sample interval too coarse for rates (state {state}: per-step probability {prob:.4})")]
    IntervalTooCoarse { state: &'static str, prob: f64 },
    #[error("infinite sojourn in state {0}")]
    InfiniteSojourn(&'static str),
    #[error("rates inconsistent with duration")]
    InconsistentEnvelope,
    #[error("model internally inconsistent: {0} consecutive rejected draws")]
    InconsistentModel(usize),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}: no samples")]
    NoSamples { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: &std::path::Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True for failures to reach the filesystem, as opposed to bad content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate regression sample for sector {sector}: {reason}")]
    DegenerateSample { sector: usize, reason: String },

    #[error("bootstrap for sector {sector} exceeded {draws} draws without {reps} usable replicates")]
    BootstrapUnstable { sector: usize, draws: usize, reps: usize },

    #[error("price iteration did not converge after {iterations} iterations (last change {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("price of sector {sector} became non-positive or non-finite")]
    NonpositivePrice { sector: usize },

    #[error("singular or non-M-matrix system: {0}")]
    SingularSystem(String),

    #[error("closed-form CES prices need non-zero gamma, sector {sector} has gamma = 0")]
    ZeroGamma { sector: usize },

    #[error("SCS identity violated: (1 - pi).d = {total}, sum(v - v') = {distributed}")]
    ConsistencyFailure { total: f64, distributed: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("deflator at index {index} is not positive ({value})")]
    NonpositiveDeflator { index: usize, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn parse(path: impl AsRef<std::path::Path>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

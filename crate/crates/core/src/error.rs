use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input outside domain: {0}")]
    InputDomain(String),

    #[error("unsupported weight: {0}")]
    UnsupportedWeight(String),

    #[error("unsupported law: {0}")]
    UnsupportedLaw(String),

    #[error("quadrature tolerance {requested:e} not reached within node budget (achieved {achieved:e})")]
    Resolution { requested: f64, achieved: f64 },

    #[error("non-finite value {value} at node {location}")]
    Numeric { location: String, value: String },

    #[error("degree {degree} exceeds rule capacity {capacity}")]
    Capacity { degree: usize, capacity: usize },

    #[error("gram matrix not positive definite at pivot {pivot} (value {value:e})")]
    Conditioning { pivot: usize, value: f64 },

    #[error("weighted value overflows at {0}")]
    Overflow(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("root exclusion covers {fraction:.3} of the region (limit 0.05)")]
    Geometry { fraction: f64 },

    #[error("root residuals failed for {failed} of {total} roots")]
    Accuracy { failed: usize, total: usize },

    #[error("eigensolver did not converge: {0}")]
    Eigen(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}

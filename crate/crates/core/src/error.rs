use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("metric is not positive-definite at node {node}")]
    NonSpdMetric { node: usize },

    #[error("g_yy is not positive at node {node}")]
    NonPositiveBase { node: usize },

    #[error("non-finite {field} at node {node}")]
    NonFinite { field: &'static str, node: usize },

    #[error("pole regularity violated at {pole}: f'/a = {ratio}")]
    PoleRegularity { pole: &'static str, ratio: f64 },

    #[error("sphere profile is not positive at node {node}")]
    NonPositiveProfile { node: usize },

    #[error("matrix is not symmetric positive-definite")]
    NotSpd,

    #[error("determinant is {0}, expected 1")]
    DeterminantNotOne(f64),

    #[error("holonomy is not hyperbolic")]
    NotHyperbolic,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size fell below dt_min = {dt_min} at t = {time}")]
    StepUnderflow { time: f64, dt_min: f64 },

    #[error("trajectory did not end in a curvature blowup")]
    NoBlowup,

    #[error("conjugate heat density lost positivity at t = {time} (snapshot {index})")]
    NegativeDensity { time: f64, index: usize },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FlowError>;

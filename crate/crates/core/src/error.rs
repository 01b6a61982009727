use thiserror::Error;

/// Errors raised while evaluating fields, sprays and metrics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("requested jet order {requested} exceeds the maximum {max}")]
    Order { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid tangent sample: {0}")]
    InvalidSample(String),

    #[error(
        "homogeneity check failed: y^j d/dy^j f = {euler}, expected {expected} (degree {degree})"
    )]
    Homogeneity {
        degree: i32,
        euler: f64,
        expected: f64,
    },

    #[error("singular metric: rank {rank} < {n}")]
    SingularMetric { rank: usize, n: usize },

    #[error("no positive root of the defining equation at this sample")]
    NoPositiveRoot,

    #[error("trajectory left the domain at t = {t}")]
    LeftDomain { t: f64, x: Vec<f64>, y: Vec<f64> },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl GeomError {
    pub fn domain(msg: impl Into<String>) -> Self {
        GeomError::Domain(msg.into())
    }

    /// True for errors that mean "this sample is outside the field's domain".
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            GeomError::Domain(_) | GeomError::NoPositiveRoot | GeomError::LeftDomain { .. }
        )
    }
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

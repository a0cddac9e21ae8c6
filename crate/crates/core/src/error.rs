use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("radius {radius} is not below half the period {half_period}: the ball would wrap around the torus")]
    BallWraps { radius: f64, half_period: f64 },

    #[error(
        "covariance symbol is not positive semidefinite at k = ({:.6}, {:.6}, {:.6}): most negative eigenvalue {eigenvalue:.3e}",
        k[0], k[1], k[2]
    )]
    NotPositiveSemidefinite { k: [f64; 3], eigenvalue: f64 },

    #[error("kernel support radius {radius} exceeds a quarter period {limit}")]
    KernelTooWide { radius: f64, limit: f64 },

    #[error("no-wraparound budget violated: t + r_test + r_corr = {required} must stay below L/2 = {limit}")]
    WraparoundBudget { required: f64, limit: f64 },

    #[error("room-corridor slabs covering the cone reach {required}, beyond L/2 = {limit}")]
    LayoutOverflow { required: f64, limit: f64 },

    #[error("not enough samples: need at least {required}, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("malformed field dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

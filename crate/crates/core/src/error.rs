use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no unique steady state: spectral radius {0} is not below one")]
    NoUniqueNess(f64),

    #[error("steady-state solve did not converge (residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("singular Green's function at frequency {0}")]
    SingularGreensFunction(f64),

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("correlation matrix eigenvalue {0} outside [0, 1]")]
    Unphysical(f64),

    #[error("reference current is zero; relative errors are undefined")]
    ZeroReference,

    #[error("no crossing between aligned and shifted turnover curves in [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),
}

impl From<ndarray_linalg::error::LinalgError> for ArcError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        ArcError::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ArcError>;

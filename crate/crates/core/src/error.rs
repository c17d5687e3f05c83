use thiserror::Error;

/// Errors raised by the samplers, integrators and model builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("exterior vector potential is singular on the solenoid axis at ({0}, {1}, {2})")]
    OnAxis(f64, f64, f64),

    #[error("field point coincides with the charge at ({0}, {1}, {2})")]
    CoincidentPoint(f64, f64, f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("integration failed: non-finite integrand at {0}")]
    NonFinite(String),

    #[error("operator is not hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("composite dimension {dim} exceeds the dense-matrix cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

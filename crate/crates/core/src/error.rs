use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate triangle: doubled area {area:e} below threshold {threshold:e}")]
    DegenerateTriangle { area: f64, threshold: f64 },

    #[error("error estimate undefined for phi = 0 (field point in the element plane)")]
    EstimatorUndefined,

    #[error(
        "expansion argument k*ell = {k_ell} must be below pi/2; \
         element too large for the wavenumber"
    )]
    ExpansionRange { k_ell: f64 },

    #[error("tolerance {0:e} is outside the supported range")]
    InvalidTolerance(f64),

    #[error("theta range [{lo}, {hi}] reaches +-pi/2")]
    AngleRange { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

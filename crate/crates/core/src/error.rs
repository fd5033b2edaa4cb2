use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OttoError {
    #[error("hot half-gap {eps_h} must exceed cold half-gap {eps_c} > 0")]
    GapOrdering { eps_c: f64, eps_h: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("transition probability {0} outside [0, 1]")]
    TransitionProbability(f64),
    #[error("not a density matrix: {0}")]
    InvalidState(&'static str),
    #[error("quadrature did not converge: error estimate {error:e} on value {value:e}")]
    Quadrature { value: f64, error: f64 },
    #[error("unit eigenvalue of the cycle map is degenerate")]
    DegenerateFixedPoint,
    #[error("thermal channel mixes populations and coherences; repeated-contact lattice unavailable")]
    NotDecoupled,
    #[error("path sum over {cycles} cycles exceeds the enumeration limit of {limit}")]
    TooManyCycles { cycles: usize, limit: usize },
    #[error("cycle count must be at least one")]
    NoCycles,
    #[error("densities need a positive pointer width")]
    PointMasses,
    #[error("grid needs at least two points and max > min")]
    EmptyGrid,
    #[error("{0} requires {1} thermalization")]
    WrongThermalization(&'static str, &'static str),
}

pub type Result<T> = core::result::Result<T, OttoError>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(OttoError::NonPositive { name, value })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(OttoError::Negative { name, value })
    }
}

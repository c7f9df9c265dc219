use thiserror::Error;

use crate::hyperbolic::Model;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("model mismatch: expected {expected}, found {found}")]
    ModelMismatch { expected: Model, found: Model },

    #[error("point {re}{im:+}i lies outside the {model} model")]
    OutsideModel { re: f64, im: f64, model: Model },

    #[error("map sends an interior point to infinity")]
    PointAtInfinity,

    #[error("matrix is singular (ad - bc = 0)")]
    DegenerateMatrix,

    #[error("map does not preserve the {0} model")]
    NotModelPreserving(Model),

    #[error("generators {0} and {1} coincide up to sign")]
    DuplicateGenerator(usize, usize),

    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },

    #[error("invalid tower level {level}; tower has levels 1..={levels}")]
    InvalidLevel { level: usize, levels: usize },

    #[error("invalid tower: {0}")]
    InvalidTower(String),

    #[error("enumeration would produce {count} elements, cap is {cap}")]
    ResourceCap { count: u128, cap: u128 },

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("kernel value {0} is not positive")]
    NonPositiveKernel(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature domain mismatch: {0}")]
    DomainMismatch(String),
}

impl Error {
    /// True for errors caused by the numerical evaluation itself rather than by bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular(_) | Error::NonPositiveKernel(_) | Error::PointAtInfinity
        )
    }
}

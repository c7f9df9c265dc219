//! Bergman kernels, Green functions and covering-tower stability experiments for
//! quotients of the hyperbolic plane by free Fuchsian groups of convergence type.
//!
//! Numeric code is generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! double precision, which is what the command-line tool uses.

pub mod cli;
pub mod error;
pub mod groups;
pub mod hyperbolic;
pub mod kernel;
pub mod scalar;
pub mod summation;
pub mod tower;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point = hyperbolic::ModelPoint<f64>;
pub type Moebius = hyperbolic::MoebiusMap<f64>;
pub type Group = groups::GroupSpec<f64>;
pub type Ball = groups::EnumerationBall<f64>;

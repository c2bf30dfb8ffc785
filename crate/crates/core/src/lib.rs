//! Discrete symplectic systems and their trigonometric and hyperbolic
//! specializations: the matrix functions Sin, Cos, Tan, Cotan, Sinh, Cosh,
//! Tanh and Cotanh computed by recurrence, and residual checks of the
//! identities they satisfy.

pub mod eigen;
pub mod error;
mod family;
pub mod generators;
pub mod hyperbolic;
pub mod matrix;
pub mod report;
pub mod rng;
pub mod symplectic;
pub mod trig;

pub use error::{Error, Result};
pub use family::{Sign, SuiteOptions, DEFAULT_PARTNER_SEED, DEFAULT_SUITE_PIVOT_TOL};
pub use matrix::Matrix;
pub use report::{IdentityRecord, ResidualReport, Scaling};

//! Adaptive P1 finite elements for the Cahn-Hilliard equation.
//!
//! The mixed system in `(u, w)` is advanced with a Crank-Nicolson step solved
//! by Newton's method. Time steps are controlled with a three-level second
//! order time indicator, meshes with either a gradient recovery estimator or a
//! classical residual estimator, using newest-vertex bisection.

pub mod adapt;
pub mod config;
pub mod estimators;
pub mod expr;
pub mod fem;
pub mod mesh;
pub mod output;
pub mod problem;
pub mod recovery;
pub mod scheme;
pub mod verify;

pub use fem::{FeFunction, FeSpace, FemError, ValueKind};
pub use mesh::{Mesh, MeshError, Rect};

/// Any failure raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Scheme(#[from] scheme::SchemeError),
    #[error(transparent)]
    Recovery(#[from] recovery::RecoveryError),
    #[error(transparent)]
    Estimator(#[from] estimators::EstimatorError),
    #[error(transparent)]
    Adapt(#[from] adapt::AdaptError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Problem(#[from] problem::ProblemError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

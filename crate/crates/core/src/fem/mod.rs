//! P1 Lagrange spaces: assembly, discrete operators and norms.

pub mod quadrature;
mod space;
pub mod sparse;

pub use space::{
    assemble_mass, assemble_nonlinear_load, assemble_stiffness, discrete_laplacian, h1_seminorm,
    l2_norm, l2_project, neg_norm, FeSpace,
};
pub(crate) use space::BlockCoefficients;
pub use sparse::{spd_solve, CsrMatrix, SpdSolver};

use crate::mesh::Mesh;

#[derive(Debug, thiserror::Error)]
pub enum FemError {
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("function holds non-finite values")]
    NonFinite,
    #[error("expected a {expected:?} function, found {found:?}")]
    KindMismatch { expected: ValueKind, found: ValueKind },
    #[error("function belongs to mesh generation {found}, expected {expected}")]
    WrongMesh { expected: u64, found: u64 },
    #[error("triangle {0} is degenerate (area {1:e})")]
    Degenerate(usize, f64),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("linear solve residual {residual:e} exceeds tolerance {tol:e}")]
    LinearSolver { residual: f64, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Scalar,
    Vector2,
}

impl ValueKind {
    pub fn components(self) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::Vector2 => 2,
        }
    }
}

/// Nodal coefficients tied to one mesh generation. Vector-valued functions
/// interleave components per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    generation: u64,
    kind: ValueKind,
    values: Vec<f64>,
}

impl FeFunction {
    pub(crate) fn from_parts(generation: u64, kind: ValueKind, values: Vec<f64>) -> Self {
        FeFunction {
            generation,
            kind,
            values,
        }
    }

    pub fn new(mesh: &Mesh, kind: ValueKind, values: Vec<f64>) -> Result<Self, FemError> {
        let expected = mesh.num_vertices() * kind.components();
        if values.len() != expected {
            return Err(FemError::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FemError::NonFinite);
        }
        Ok(FeFunction::from_parts(mesh.generation(), kind, values))
    }

    pub fn scalar(mesh: &Mesh, values: Vec<f64>) -> Result<Self, FemError> {
        FeFunction::new(mesh, ValueKind::Scalar, values)
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        FeFunction::from_parts(mesh.generation(), ValueKind::Scalar, vec![0.0; mesh.num_vertices()])
    }

    /// Nodal interpolant of `f`.
    pub fn scalar_from_fn<F: Fn(f64, f64) -> f64>(mesh: &Mesh, f: F) -> Self {
        let values = mesh.vertices().iter().map(|p| f(p[0], p[1])).collect();
        FeFunction::from_parts(mesh.generation(), ValueKind::Scalar, values)
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fails unless the function is scalar and lives on `mesh`.
    pub fn check_scalar_on(&self, mesh: &Mesh) -> Result<(), FemError> {
        if self.kind != ValueKind::Scalar {
            return Err(FemError::KindMismatch {
                expected: ValueKind::Scalar,
                found: self.kind,
            });
        }
        if self.generation != mesh.generation() {
            return Err(FemError::WrongMesh {
                expected: mesh.generation(),
                found: self.generation,
            });
        }
        Ok(())
    }
}

/// Cubic nonlinearities appearing in the chemical potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// `f(u) = u³ - u`, the derivative of the double-well `¼(u² - 1)²`.
    DoubleWell,
    /// `h(u) = u³`.
    Cubic,
}

impl Nonlinearity {
    #[inline]
    pub fn value(self, u: f64) -> f64 {
        match self {
            Nonlinearity::DoubleWell => u * u * u - u,
            Nonlinearity::Cubic => u * u * u,
        }
    }

    #[inline]
    pub fn derivative(self, u: f64) -> f64 {
        match self {
            Nonlinearity::DoubleWell => 3.0 * u * u - 1.0,
            Nonlinearity::Cubic => 3.0 * u * u,
        }
    }
}

/// Double-well potential `¼(u² - 1)²`.
#[inline]
pub fn double_well(u: f64) -> f64 {
    let s = u * u - 1.0;
    0.25 * s * s
}

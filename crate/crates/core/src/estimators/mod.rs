//! A posteriori indicators: the time and space families of the recovery
//! estimator, the residual estimator and maximum marking.

mod mark;
mod residual;
mod space;
mod time;

pub use mark::mark;
pub use residual::{residual_indicator, residual_indicator_window, ResidualBreakdown};
pub use space::{
    composite_recovery, space_indicator, space_indicator_from, SpaceConstants,
    SpaceIndicatorBreakdown,
};
pub use time::{theta_u, time_indicator, time_indicator_window, TimeIndicatorBreakdown};

use crate::fem::FemError;
use crate::recovery::RecoveryError;
use crate::scheme::SchemeError;

#[derive(Debug, thiserror::Error)]
pub enum EstimatorError {
    #[error("marking fractions must satisfy 0 < tol_c < tol_r < 1, got tol_c = {tol_c}, tol_r = {tol_r}")]
    MarkingFractions { tol_r: f64, tol_c: f64 },
    #[error("indicator field has {found} entries, mesh has {expected} elements")]
    FieldLength { expected: usize, found: usize },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Which terms drive the adaptive loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndicatorMode {
    /// Every term of the time and space families.
    #[default]
    Full,
    /// `θ_u` for time and `ℰ_u` (or `η_{K,1}`) for space.
    Dominant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorKind {
    #[default]
    Recovery,
    Residual,
}

impl std::str::FromStr for IndicatorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(IndicatorMode::Full),
            "dominant" => Ok(IndicatorMode::Dominant),
            _ => Err(format!("unknown indicator mode `{s}` (expected full or dominant)")),
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "recovery" => Ok(EstimatorKind::Recovery),
            "residual" => Ok(EstimatorKind::Residual),
            _ => Err(format!("unknown estimator `{s}` (expected recovery or residual)")),
        }
    }
}

impl std::fmt::Display for IndicatorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IndicatorMode::Full => "full",
            IndicatorMode::Dominant => "dominant",
        })
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimatorKind::Recovery => "recovery",
            EstimatorKind::Residual => "residual",
        })
    }
}

/// Elementwise product helpers for nodal fields.
pub(crate) fn combine<F: Fn(usize) -> f64>(n: usize, f: F) -> Vec<f64> {
    (0..n).map(f).collect()
}

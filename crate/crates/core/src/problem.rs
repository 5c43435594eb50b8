//! Problem registry: initial data, domain and reference parameters.

use crate::adapt::AdaptConfig;
use crate::estimators::IndicatorMode;
use crate::expr::{Expr, ExprError};
use crate::mesh::Rect;

pub const EXAMPLE1: &str =
    "tanh(((x-0.3)^2+y^2-0.25^2)/eps)*tanh(((x+0.3)^2+y^2-0.3^2)/eps)";
pub const EXAMPLE2: &str = "tanh(((x-0.3)^2+y^2-0.2^2)/eps)*tanh(((x+0.3)^2+y^2-0.2^2)/eps)\
*tanh((x^2+(y-0.3)^2-0.2^2)/eps)*tanh((x^2+(y+0.3)^2-0.2^2)/eps)";

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("unknown problem `{0}`")]
    Unknown(String),
    #[error("initial datum: {0}")]
    Expr(#[from] ExprError),
    #[error("initial datum is not finite at ({x}, {y})")]
    NotFinite { x: f64, y: f64 },
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub datum: Expr,
    pub domain: Rect,
    pub eps: f64,
    /// Criss-cross cells per side of the initial mesh.
    pub cells: usize,
    pub adapt: AdaptConfig,
}

impl ProblemSpec {
    pub fn preset(name: &str) -> Result<ProblemSpec, ProblemError> {
        let square = Rect::new(-1.0, 1.0, -1.0, 1.0);
        let base = AdaptConfig {
            tol_t: 50.0,
            tol_t_min: 5.0,
            tol_s: 10.0,
            tol_i: 0.002,
            mode: IndicatorMode::Dominant,
            ..AdaptConfig::default()
        };
        let (src, adapt) = match name {
            "example1" => (EXAMPLE1, base),
            "example2" => (EXAMPLE2, AdaptConfig { tol_s: 4.0, ..base }),
            "constant_one" => ("1", base),
            _ => return Err(ProblemError::Unknown(name.to_string())),
        };
        Ok(ProblemSpec {
            name: name.to_string(),
            datum: Expr::parse(src)?,
            domain: square,
            eps: 0.01,
            cells: 8,
            adapt,
        })
    }

    /// A user datum with the Example 1 parameter block.
    pub fn custom(expr: &str) -> Result<ProblemSpec, ProblemError> {
        Ok(ProblemSpec {
            name: "custom".into(),
            datum: Expr::parse(expr)?,
            ..ProblemSpec::preset("example1")?
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.datum.eval(x, y, self.eps)
    }

    /// Samples the datum on a 65×65 lattice of the domain.
    pub fn check_finite(&self) -> Result<(), ProblemError> {
        let d = self.domain;
        let n = 64;
        for i in 0..=n {
            for j in 0..=n {
                let x = d.x0 + (d.x1 - d.x0) * i as f64 / n as f64;
                let y = d.y0 + (d.y1 - d.y0) * j as f64 / n as f64;
                if !self.eval(x, y).is_finite() {
                    return Err(ProblemError::NotFinite { x, y });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_parameters() {
        let p = ProblemSpec::preset("example1").unwrap();
        assert_eq!(p.eps, 0.01);
        assert_eq!(
            (p.adapt.tol_t, p.adapt.tol_t_min, p.adapt.tol_s, p.adapt.tol_i),
            (50.0, 5.0, 10.0, 0.002)
        );
        assert_eq!(p.adapt.mode, IndicatorMode::Dominant);
        assert_eq!(ProblemSpec::preset("example2").unwrap().adapt.tol_s, 4.0);
        assert!(matches!(ProblemSpec::preset("nope"), Err(ProblemError::Unknown(_))));
    }

    #[test]
    fn example_data() {
        let eps = 0.01f64;
        let p = ProblemSpec::preset("example1").unwrap();
        for &(x, y) in &[(0.3, 0.0), (0.0, 0.0), (-0.3, 0.1), (0.9, -0.8)] {
            let a = (((x - 0.3f64).powi(2) + y * y - 0.0625) / eps).tanh();
            let b = (((x + 0.3f64).powi(2) + y * y - 0.09) / eps).tanh();
            assert!((p.eval(x, y) - a * b).abs() < 1e-15);
        }
        // inside one disc and outside the other
        assert!(p.eval(0.3, 0.0) < -0.9999);
        let q = ProblemSpec::preset("example2").unwrap();
        assert!(q.eval(0.0, 0.3) < -0.999);
        assert!((q.eval(0.0, 0.0) - 5f64.tanh().powi(4)).abs() < 1e-15);
        assert!(q.eval(0.9, 0.9) > 0.9999);
        p.check_finite().unwrap();
        q.check_finite().unwrap();
    }

    #[test]
    fn custom_data() {
        let p = ProblemSpec::custom("x - y").unwrap();
        assert_eq!(p.eval(0.5, 0.25), 0.25);
        assert!(ProblemSpec::custom("x +").is_err());
        assert!(matches!(
            ProblemSpec::custom("1 / x").unwrap().check_finite(),
            Err(ProblemError::NotFinite { .. })
        ));
    }
}

//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` and blank lines are ignored. `problem` selects a
//! preset (`example1`, `example2`, `constant_one`); `datum` sets a custom
//! initial datum instead. Every other key overrides a field of the selected
//! preset.
//!
//! | key | meaning |
//! |---|---|
//! | `problem`, `datum` | preset name or initial-datum expression in `x`, `y`, `eps` |
//! | `eps` | interface width |
//! | `domain.x0`, `domain.x1`, `domain.y0`, `domain.y1` | rectangle |
//! | `mesh.cells` | criss-cross cells per side of the initial mesh |
//! | `adapt.tol_t`, `adapt.tol_t_min`, `adapt.tol_s`, `adapt.tol_i`, `adapt.tol_e` | tolerances |
//! | `adapt.tol_r`, `adapt.tol_c` | refine and coarsen fractions |
//! | `adapt.delta1`, `adapt.delta2` | step shrink and growth factors |
//! | `adapt.tau0`, `adapt.t_final` | initial step and final time |
//! | `adapt.max_depth`, `adapt.retry_cap`, `adapt.tau_floor` | loop limits (`tau_floor` is relative to `t_final`) |
//! | `adapt.max_space_iterations`, `adapt.max_steps` | loop limits |
//! | `adapt.c0`, `adapt.c` | recovery estimator constants |
//! | `adapt.rebuild_w` | recompute the potential of transferred levels |
//! | `newton.tol`, `newton.max_iterations` | Newton limits |
//! | `estimator` | `recovery` or `residual` |
//! | `mode` | `full` or `dominant` |
//! | `fixed_mesh`, `fixed_tau` | benchmark overrides |
//! | `out`, `snapshot_every`, `seed` | output directory, VTK cadence, random seed |

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adapt::{AdaptConfig, AdaptError};
use crate::problem::{ProblemError, ProblemSpec};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    Value {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("`problem` and `datum` are mutually exclusive")]
    ProblemAndDatum,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Invalid(#[from] AdaptError),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub out: PathBuf,
    /// VTK snapshot every this many accepted steps.
    pub snapshot_every: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
        Ok(RunConfig::new(ProblemSpec::preset(name)?))
    }

    pub fn new(problem: ProblemSpec) -> RunConfig {
        RunConfig {
            out: PathBuf::from(format!("out-{}", problem.name)),
            problem,
            snapshot_every: 10,
            seed: 0,
        }
    }

    pub fn adapt(&self) -> &AdaptConfig {
        &self.problem.adapt
    }

    pub fn adapt_mut(&mut self) -> &mut AdaptConfig {
        &mut self.problem.adapt
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax(i + 1));
            }
            if !seen.insert(k.to_string()) {
                return Err(ConfigError::Duplicate { line: i + 1, key: k.into() });
            }
            entries.push((i + 1, k, v));
        }
        let find = |key: &str| entries.iter().find(|e| e.1 == key).map(|e| e.2);
        let problem = match (find("problem"), find("datum")) {
            (Some(_), Some(_)) => return Err(ConfigError::ProblemAndDatum),
            (Some(name), None) => ProblemSpec::preset(name)?,
            (None, Some(expr)) => ProblemSpec::custom(expr)?,
            (None, None) => ProblemSpec::preset("example1")?,
        };
        let mut cfg = RunConfig::new(problem);
        for &(line, key, value) in &entries {
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` override and re-validates.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if key == "problem" || key == "datum" {
            return Err(ConfigError::Other(format!("`{key}` cannot be overridden")));
        }
        self.set(0, key, value)?;
        self.validate()
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse::<T>().map_err(|e| ConfigError::Value {
                line,
                key: key.into(),
                value: value.into(),
                reason: e.to_string(),
            })
        }
        let p = &mut self.problem;
        let a = &mut p.adapt;
        match key {
            "problem" | "datum" => {}
            "eps" => p.eps = num(line, key, value)?,
            "domain.x0" => p.domain.x0 = num(line, key, value)?,
            "domain.x1" => p.domain.x1 = num(line, key, value)?,
            "domain.y0" => p.domain.y0 = num(line, key, value)?,
            "domain.y1" => p.domain.y1 = num(line, key, value)?,
            "mesh.cells" => p.cells = num(line, key, value)?,
            "adapt.tol_t" => a.tol_t = num(line, key, value)?,
            "adapt.tol_t_min" => a.tol_t_min = num(line, key, value)?,
            "adapt.tol_s" => a.tol_s = num(line, key, value)?,
            "adapt.tol_i" => a.tol_i = num(line, key, value)?,
            "adapt.tol_e" => a.tol_e = num(line, key, value)?,
            "adapt.tol_r" => a.tol_r = num(line, key, value)?,
            "adapt.tol_c" => a.tol_c = num(line, key, value)?,
            "adapt.delta1" => a.delta1 = num(line, key, value)?,
            "adapt.delta2" => a.delta2 = num(line, key, value)?,
            "adapt.tau0" => a.tau0 = num(line, key, value)?,
            "adapt.t_final" => a.t_final = num(line, key, value)?,
            "adapt.max_depth" => a.max_depth = num(line, key, value)?,
            "adapt.retry_cap" => a.retry_cap = num(line, key, value)?,
            "adapt.tau_floor" => a.tau_floor = num(line, key, value)?,
            "adapt.max_space_iterations" => a.max_space_iterations = num(line, key, value)?,
            "adapt.max_steps" => a.max_steps = num(line, key, value)?,
            "adapt.c0" => a.constants.c0 = num(line, key, value)?,
            "adapt.c" => a.constants.c = num(line, key, value)?,
            "adapt.rebuild_w" => a.rebuild_w = num(line, key, value)?,
            "newton.tol" => a.newton.tol = num(line, key, value)?,
            "newton.max_iterations" => a.newton.max_iterations = num(line, key, value)?,
            "estimator" => a.estimator = num(line, key, value)?,
            "mode" => a.mode = num(line, key, value)?,
            "fixed_mesh" => a.fixed_mesh = num(line, key, value)?,
            "fixed_tau" => a.fixed_tau = Some(num(line, key, value)?),
            "out" => self.out = PathBuf::from(value),
            "snapshot_every" => self.snapshot_every = num(line, key, value)?,
            "seed" => self.seed = num(line, key, value)?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.problem.adapt.validate()?;
        let p = &self.problem;
        if !(p.eps > 0.0 && p.eps.is_finite()) {
            return Err(ConfigError::Other(format!("eps must be positive, got {}", p.eps)));
        }
        let d = p.domain;
        if !(d.x0 < d.x1 && d.y0 < d.y1) {
            return Err(ConfigError::Other("domain must satisfy x0 < x1 and y0 < y1".into()));
        }
        if p.cells == 0 {
            return Err(ConfigError::Other("mesh.cells must be at least 1".into()));
        }
        if self.snapshot_every == 0 {
            return Err(ConfigError::Other("snapshot_every must be at least 1".into()));
        }
        p.check_finite()?;
        Ok(())
    }
}

//! Time-step control and the time-space adaptive driver.

use std::sync::Arc;
use std::time::Instant;

use log::{debug, info, warn};

use crate::estimators::{
    self, mark, residual_indicator_window, space_indicator_from, theta_u, time_indicator_window,
    EstimatorError, EstimatorKind, IndicatorMode, ResidualBreakdown, SpaceConstants,
    SpaceIndicatorBreakdown, TimeIndicatorBreakdown,
};
use crate::fem::quadrature::DEGREE4;
use crate::fem::{FeSpace, FemError};
use crate::mesh::{coarsen, refine, Mesh, MeshError};
use crate::recovery::{estimate_values, RecoveryError};
use crate::scheme::{cn_solve, energy_values, init_state, NewtonOptions, SchemeError, SimState};

#[derive(Debug, thiserror::Error)]
pub enum AdaptError {
    #[error("invalid adaptive configuration: {0}")]
    Config(String),
    #[error("step {step} (t = {t:e}): time-step control gave up after {retries} retries with eta_time = {eta:e} {bound} (tau = {tau:e})")]
    TimeStepControl {
        step: usize,
        t: f64,
        retries: usize,
        eta: f64,
        bound: &'static str,
        tau: f64,
    },
    #[error("initial mesh: L2 error {eta:e} still above tol_i = {tol:e} at the maximum refinement depth")]
    InitialTolerance { eta: f64, tol: f64 },
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<AdaptError>,
    },
    #[error("observer failed: {0}")]
    Observer(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptConfig {
    pub tol_t: f64,
    pub tol_t_min: f64,
    pub tol_s: f64,
    pub tol_i: f64,
    pub tol_e: f64,
    pub tol_r: f64,
    pub tol_c: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub tau0: f64,
    pub t_final: f64,
    /// Largest bisection depth a marked element may reach.
    pub max_depth: u32,
    pub newton: NewtonOptions,
    pub retry_cap: usize,
    /// The step-size floor is `tau_floor · t_final`.
    pub tau_floor: f64,
    pub max_space_iterations: usize,
    pub max_steps: usize,
    pub estimator: EstimatorKind,
    pub mode: IndicatorMode,
    pub constants: SpaceConstants,
    /// Skip initial refinement and all space adaptation.
    pub fixed_mesh: bool,
    /// Constant step size instead of time-step control.
    pub fixed_tau: Option<f64>,
    /// Recompute `w` from `u` for levels moved to a new mesh.
    pub rebuild_w: bool,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            tol_t: 50.0,
            tol_t_min: 5.0,
            tol_s: 10.0,
            tol_i: 0.002,
            tol_e: 1e-6,
            tol_r: 0.5,
            tol_c: 0.05,
            delta1: 0.5,
            delta2: 2.0,
            tau0: 1e-5,
            t_final: 1e-3,
            max_depth: 20,
            newton: NewtonOptions::default(),
            retry_cap: 25,
            tau_floor: 1e-12,
            max_space_iterations: 30,
            max_steps: 100_000,
            estimator: EstimatorKind::Recovery,
            mode: IndicatorMode::Full,
            constants: SpaceConstants::default(),
            fixed_mesh: false,
            fixed_tau: None,
            rebuild_w: true,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), AdaptError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AdaptError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<(), AdaptError> {
        for (n, v) in [
            ("tol_t", self.tol_t),
            ("tol_t_min", self.tol_t_min),
            ("tol_s", self.tol_s),
            ("tol_i", self.tol_i),
            ("tau0", self.tau0),
            ("t_final", self.t_final),
            ("tau_floor", self.tau_floor),
        ] {
            positive(n, v)?;
        }
        if !(self.tol_e >= 0.0) {
            return Err(AdaptError::Config(format!("tol_e must be nonnegative, got {}", self.tol_e)));
        }
        if !(self.tol_t_min < self.tol_t) {
            return Err(AdaptError::Config(format!(
                "tol_t_min ({}) must be below tol_t ({})",
                self.tol_t_min, self.tol_t
            )));
        }
        if !(0.0 < self.tol_c && self.tol_c < self.tol_r && self.tol_r < 1.0) {
            return Err(AdaptError::Config(format!(
                "marking fractions must satisfy 0 < tol_c < tol_r < 1, got tol_c = {}, tol_r = {}",
                self.tol_c, self.tol_r
            )));
        }
        if !(0.0 < self.delta1 && self.delta1 < 1.0 && self.delta2 > 1.0 && self.delta2.is_finite()) {
            return Err(AdaptError::Config(format!(
                "step factors must satisfy 0 < delta1 < 1 < delta2, got {} and {}",
                self.delta1, self.delta2
            )));
        }
        if let Some(t) = self.fixed_tau {
            positive("fixed_tau", t)?;
        }
        if self.newton.max_iterations == 0 || !(self.newton.tol > 0.0) {
            return Err(AdaptError::Config("Newton limits must be positive".into()));
        }
        if self.retry_cap == 0 || self.max_steps == 0 {
            return Err(AdaptError::Config("retry_cap and max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of time-step control for one step.
#[derive(Debug, Clone)]
pub struct TimeStepOutcome {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub tau: f64,
    /// The indicator compared against the bounds.
    pub eta_time: f64,
    pub retries: usize,
    pub newton_iterations: usize,
    pub newton_failures: usize,
    pub floor_hit: bool,
}

/// `η_time` as configured: the full sum or `θ_u` alone.
fn eta_time(win: &crate::scheme::Window, mode: IndicatorMode) -> Result<f64, AdaptError> {
    Ok(match mode {
        IndicatorMode::Full => time_indicator_window(win)?.eta_time,
        IndicatorMode::Dominant => theta_u(win)?,
    })
}

/// Time-step control starting from `tau_start`.
pub fn control_time_step(
    state: &SimState,
    cfg: &AdaptConfig,
    tau_start: f64,
) -> Result<TimeStepOutcome, AdaptError> {
    let remaining = cfg.t_final - state.time();
    let floor = cfg.tau_floor * cfg.t_final;
    let sp = state.space();
    let mut tau = tau_start.min(remaining).max(floor.min(remaining));
    let mut retries = 0;
    let mut newton_iterations = 0;
    let mut newton_failures = 0;
    // last solution rejected only for being below `tol_t_min`
    let mut too_small: Option<(Vec<f64>, Vec<f64>, f64, f64)> = None;
    loop {
        let capped = tau >= remaining;
        let at_floor = tau <= floor;
        match cn_solve(sp, state.eps(), tau, state.u(), state.w(), &cfg.newton) {
            Err(SchemeError::NewtonDiverged { iterations, residual }) => {
                newton_iterations += iterations;
                newton_failures += 1;
                debug!("Newton failed at tau = {tau:e} (residual {residual:e}); halving");
                if let Some((u, w, tau, eta)) = too_small.take() {
                    return Ok(TimeStepOutcome {
                        u,
                        w,
                        tau,
                        eta_time: eta,
                        retries,
                        newton_iterations,
                        newton_failures,
                        floor_hit: false,
                    });
                }
                if at_floor || retries >= cfg.retry_cap {
                    return Err(SchemeError::NewtonDiverged { iterations, residual }.into());
                }
                tau = (tau * cfg.delta1).max(floor);
                retries += 1;
            }
            Err(e) => return Err(e.into()),
            Ok((u, w, rep)) => {
                newton_iterations += rep.iterations;
                let eta = eta_time(&state.trial(&u, &w, tau), cfg.mode)?;
                let (next, bound) = if eta > cfg.tol_t {
                    if let Some((u, w, tau, eta)) = too_small.take() {
                        debug!("growth overshot tol_t; keeping tau = {tau:e}");
                        return Ok(TimeStepOutcome {
                            u,
                            w,
                            tau,
                            eta_time: eta,
                            retries,
                            newton_iterations,
                            newton_failures,
                            floor_hit: false,
                        });
                    }
                    if at_floor {
                        warn!("t = {:e}: step-size floor reached with eta_time = {eta:e}", state.time());
                        return Ok(TimeStepOutcome {
                            u,
                            w,
                            tau,
                            eta_time: eta,
                            retries,
                            newton_iterations,
                            newton_failures,
                            floor_hit: true,
                        });
                    }
                    ((tau * cfg.delta1).max(floor), "above tol_t")
                } else if eta < cfg.tol_t_min && !capped {
                    too_small = Some((u, w, tau, eta));
                    ((tau * cfg.delta2).min(remaining), "below tol_t_min")
                } else {
                    return Ok(TimeStepOutcome {
                        u,
                        w,
                        tau,
                        eta_time: eta,
                        retries,
                        newton_iterations,
                        newton_failures,
                        floor_hit: false,
                    });
                };
                if retries >= cfg.retry_cap {
                    return Err(AdaptError::TimeStepControl {
                        step: state.step() + 1,
                        t: state.time(),
                        retries,
                        eta,
                        bound,
                        tau,
                    });
                }
                tau = next;
                retries += 1;
            }
        }
    }
}

/// `‖u0 - P u0‖_K` for every element by the degree-4 rule.
pub fn initial_errors<F: Fn(f64, f64) -> f64>(sp: &FeSpace, uh: &[f64], u0: &F) -> Vec<f64> {
    let mesh = sp.mesh();
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let p = mesh.triangle_points(t);
            let s: f64 = DEGREE4
                .iter()
                .map(|(w, b)| {
                    let x = crate::fem::quadrature::point(&p, b);
                    let v = b[0] * uh[tri[0]] + b[1] * uh[tri[1]] + b[2] * uh[tri[2]];
                    w * (u0(x[0], x[1]) - v).powi(2)
                })
                .sum();
            (sp.area(t) * s).max(0.0).sqrt()
        })
        .collect()
}

fn refinable(mesh: &Mesh, marked: Vec<usize>, max_depth: u32) -> Vec<usize> {
    marked.into_iter().filter(|&k| mesh.levels()[k] < max_depth).collect()
}

/// Refines until `‖u0 - u_h⁰‖ ≤ tol_i` and initializes the state.
pub fn prepare_initial_mesh<F: Fn(f64, f64) -> f64>(
    mesh0: Mesh,
    u0: &F,
    eps: f64,
    cfg: &AdaptConfig,
) -> Result<(Arc<Mesh>, SimState), AdaptError> {
    let mut mesh = Arc::new(mesh0);
    loop {
        let sp = FeSpace::new(mesh.clone())?;
        let uh = sp.project(u0)?;
        let err = initial_errors(&sp, &uh, u0);
        let eta = err.iter().map(|e| e * e).sum::<f64>().sqrt();
        debug!("initial mesh: {} nodes, L2 error {eta:e}", mesh.num_vertices());
        if eta <= cfg.tol_i {
            break;
        }
        let max = err.iter().copied().fold(0.0, f64::max);
        let (marked, _) = mark(&err, max, cfg.tol_r, cfg.tol_c)?;
        let marked = refinable(&mesh, marked, cfg.max_depth);
        if marked.is_empty() {
            return Err(AdaptError::InitialTolerance { eta, tol: cfg.tol_i });
        }
        mesh = Arc::new(refine(&mesh, &marked)?.0);
    }
    let mut state = init_state(mesh.clone(), u0, eps, cfg.tau0)?;
    state.set_rebuild_w(cfg.rebuild_w);
    Ok((mesh, state))
}

/// Space indicators of a trial solution on the current mesh.
#[derive(Debug, Clone)]
pub struct SpaceEvaluation {
    pub eta_space: f64,
    /// Field driving the marking.
    pub marking: Vec<f64>,
    pub recovery: Option<SpaceIndicatorBreakdown>,
    pub residual: Option<ResidualBreakdown>,
}

fn recovery_breakdown(
    state: &SimState,
    u: &[f64],
    tau: f64,
    cfg: &AdaptConfig,
) -> Result<SpaceIndicatorBreakdown, AdaptError> {
    let est = estimate_values(state.mesh(), u)?;
    let lv = state.levels();
    let e = [est.global, lv[0].recovery_estimate()?, lv[1].recovery_estimate()?];
    Ok(space_indicator_from(e, est.eta_k, tau, state.tau(), state.eps(), cfg.constants))
}

fn residual_breakdown(state: &SimState, u: &[f64], w: &[f64], tau: f64) -> Result<ResidualBreakdown, AdaptError> {
    let win = state.trial(u, w, tau);
    Ok(residual_indicator_window(&win, win.t)?)
}

pub fn evaluate_space(
    state: &SimState,
    u: &[f64],
    w: &[f64],
    tau: f64,
    cfg: &AdaptConfig,
) -> Result<SpaceEvaluation, AdaptError> {
    Ok(match cfg.estimator {
        EstimatorKind::Recovery => {
            let b = recovery_breakdown(state, u, tau, cfg)?;
            let eta_space = match cfg.mode {
                IndicatorMode::Full => b.eta_space,
                IndicatorMode::Dominant => b.recovery[0],
            };
            SpaceEvaluation {
                eta_space,
                marking: b.eta_k.clone(),
                recovery: Some(b),
                residual: None,
            }
        }
        EstimatorKind::Residual => {
            let r = residual_breakdown(state, u, w, tau)?;
            let (eta_space, marking) = match cfg.mode {
                IndicatorMode::Full => (r.eta, r.combined()),
                IndicatorMode::Dominant => (r.eta1(), r.eta_k1.clone()),
            };
            SpaceEvaluation {
                eta_space,
                marking,
                recovery: None,
                residual: Some(r),
            }
        }
    })
}

/// One accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub step: usize,
    pub t: f64,
    pub tau: f64,
    pub nodes: usize,
    pub elements: usize,
    pub energy: f64,
    pub eta_time: f64,
    pub eta_space: f64,
    pub time: TimeIndicatorBreakdown,
    /// `ℰ_u` at `n`, `n-1`, `n-2`.
    pub recovery: [f64; 3],
    pub e_tilde: f64,
    pub alpha: f64,
    pub residual_eta1: f64,
    pub residual_eta2: f64,
    pub newton_iterations: usize,
    pub time_retries: usize,
    pub space_iterations: usize,
    pub refined: usize,
    pub coarsened: usize,
    pub floor_hit: bool,
    pub space_limited: bool,
    pub mass: f64,
}

/// Callbacks from [`run_adaptive`].
pub trait RunObserver {
    fn initial(&mut self, _state: &SimState, _energy: f64) -> Result<(), String> {
        Ok(())
    }

    /// Called after acceptance and before coarsening; `eta_k` is the
    /// marking field of the accepted solution on `state.mesh()`.
    fn step(&mut self, _log: &StepLog, _state: &SimState, _eta_k: &[f64]) -> Result<(), String> {
        Ok(())
    }
}

impl RunObserver for () {}

/// Collects every log row.
#[derive(Debug, Default)]
pub struct Recorder {
    pub logs: Vec<StepLog>,
}

impl RunObserver for Recorder {
    fn step(&mut self, log: &StepLog, _: &SimState, _: &[f64]) -> Result<(), String> {
        self.logs.push(log.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub nodes: usize,
    pub elements: usize,
    pub wall_seconds: f64,
}

/// Adaptive run from the coarse mesh `mesh0` and datum `u0`.
pub fn run_adaptive<F: Fn(f64, f64) -> f64>(
    mesh0: Mesh,
    u0: &F,
    eps: f64,
    cfg: &AdaptConfig,
    observer: &mut dyn RunObserver,
) -> Result<RunSummary, AdaptError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut state = if cfg.fixed_mesh {
        let mut s = init_state(Arc::new(mesh0), u0, eps, cfg.fixed_tau.unwrap_or(cfg.tau0))?;
        s.set_rebuild_w(cfg.rebuild_w);
        s
    } else {
        prepare_initial_mesh(mesh0, u0, eps, cfg)?.1
    };
    let initial_energy = energy_values(state.space(), state.u(), eps);
    observer.initial(&state, initial_energy).map_err(AdaptError::Observer)?;
    info!(
        "initial mesh: {} nodes, {} elements, energy {initial_energy:.6e}",
        state.mesh().num_vertices(),
        state.mesh().num_triangles()
    );
    let mut e_prev = 0.0;
    let mut e_cur = initial_energy;
    loop {
        if state.step() > 0 && (e_prev - e_cur <= cfg.tol_e || state.time() >= cfg.t_final) {
            break;
        }
        if state.step() >= cfg.max_steps {
            warn!("stopping at the step limit {}", cfg.max_steps);
            break;
        }
        let n = state.step() + 1;
        let energy = advance_one(&mut state, cfg, observer).map_err(|e| AdaptError::Step {
            step: n,
            source: Box::new(e),
        })?;
        e_prev = e_cur;
        e_cur = energy;
    }
    Ok(RunSummary {
        steps: state.step(),
        final_time: state.time(),
        initial_energy,
        final_energy: e_cur,
        nodes: state.mesh().num_vertices(),
        elements: state.mesh().num_triangles(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn fixed_step(state: &SimState, cfg: &AdaptConfig, tau: f64) -> Result<TimeStepOutcome, AdaptError> {
    let tau = tau.min(cfg.t_final - state.time());
    let (u, w, rep) = cn_solve(state.space(), state.eps(), tau, state.u(), state.w(), &cfg.newton)?;
    let eta = eta_time(&state.trial(&u, &w, tau), cfg.mode)?;
    Ok(TimeStepOutcome {
        u,
        w,
        tau,
        eta_time: eta,
        retries: 0,
        newton_iterations: rep.iterations,
        newton_failures: 0,
        floor_hit: false,
    })
}

/// One outer iteration of the adaptive run; returns `E(uⁿ)`.
fn advance_one(
    state: &mut SimState,
    cfg: &AdaptConfig,
    observer: &mut dyn RunObserver,
) -> Result<f64, AdaptError> {
    let solve = |s: &SimState, tau: f64| match cfg.fixed_tau {
        Some(ft) => fixed_step(s, cfg, ft),
        None => control_time_step(s, cfg, tau),
    };
    let mut out = solve(state, state.tau())?;
    let mut retries = out.retries;
    let mut newton = out.newton_iterations;
    let mut space_iterations = 0;
    let mut refined = 0;
    let mut space_limited = false;
    let mut space = None;
    if !cfg.fixed_mesh {
        let mut ev = evaluate_space(state, &out.u, &out.w, out.tau, cfg)?;
        while ev.eta_space > cfg.tol_s {
            if space_iterations >= cfg.max_space_iterations {
                warn!("space loop stopped after {space_iterations} refinements");
                space_limited = true;
                break;
            }
            let max = ev.marking.iter().copied().fold(0.0, f64::max);
            let (marked, _) = mark(&ev.marking, max, cfg.tol_r, cfg.tol_c)?;
            let marked = refinable(state.mesh(), marked, cfg.max_depth);
            if marked.is_empty() {
                warn!("t = {:e}: nothing left to refine at depth {}", state.time(), cfg.max_depth);
                space_limited = true;
                break;
            }
            refined += marked.len();
            let (fine, _) = refine(state.mesh(), &marked)?;
            state.remesh(Arc::new(fine))?;
            out = solve(state, out.tau)?;
            retries += out.retries;
            newton += out.newton_iterations;
            space_iterations += 1;
            ev = evaluate_space(state, &out.u, &out.w, out.tau, cfg)?;
        }
        space = Some(ev);
    }

    let tau = out.tau;
    let eta_time_used = out.eta_time;
    let floor_hit = out.floor_hit;
    let win_time = time_indicator_window(&state.trial(&out.u, &out.w, tau))?;
    let rec = match space.as_ref().and_then(|s| s.recovery.clone()) {
        Some(r) => r,
        None => recovery_breakdown(state, &out.u, tau, cfg)?,
    };
    let res = match space.as_ref().and_then(|s| s.residual.clone()) {
        Some(r) => r,
        None => residual_breakdown(state, &out.u, &out.w, tau)?,
    };
    let (eta_space, marking) = match space {
        Some(ev) => (ev.eta_space, ev.marking),
        None => match (cfg.estimator, cfg.mode) {
            (EstimatorKind::Recovery, IndicatorMode::Full) => (rec.eta_space, rec.eta_k.clone()),
            (EstimatorKind::Recovery, IndicatorMode::Dominant) => (rec.recovery[0], rec.eta_k.clone()),
            (EstimatorKind::Residual, IndicatorMode::Full) => (res.eta, res.combined()),
            (EstimatorKind::Residual, IndicatorMode::Dominant) => (res.eta1(), res.eta_k1.clone()),
        },
    };
    state.advance(out.u, out.w, tau);
    let energy = energy_values(state.space(), state.u(), state.eps());
    let mut log = StepLog {
        step: state.step(),
        t: state.time(),
        tau,
        nodes: state.mesh().num_vertices(),
        elements: state.mesh().num_triangles(),
        energy,
        eta_time: eta_time_used,
        eta_space,
        time: win_time,
        recovery: rec.recovery,
        e_tilde: rec.e_tilde,
        alpha: rec.alpha,
        residual_eta1: res.eta1(),
        residual_eta2: res.eta_k2.iter().map(|e| e * e).sum::<f64>().sqrt(),
        newton_iterations: newton,
        time_retries: retries,
        space_iterations,
        refined,
        coarsened: 0,
        floor_hit,
        space_limited,
        mass: state.space().integral(state.u()),
    };

    let mut coarse_mesh = None;
    if !cfg.fixed_mesh {
        let max = marking.iter().copied().fold(0.0, f64::max);
        let (_, cmark) = estimators::mark(&marking, max, cfg.tol_r, cfg.tol_c)?;
        if !cmark.is_empty() {
            let (coarse, _) = coarsen(state.mesh(), &cmark);
            if !coarse.same_shape(state.mesh()) {
                log.coarsened = state.mesh().num_triangles() - coarse.num_triangles();
                coarse_mesh = Some(coarse);
            }
        }
    }
    info!(
        "step {:>5} t = {:.6e} tau = {:.3e} nodes = {:>7} E = {:.8e} eta_time = {:.3e} eta_space = {:.3e}",
        log.step, log.t, log.tau, log.nodes, log.energy, log.eta_time, log.eta_space
    );
    observer.step(&log, state, &marking).map_err(AdaptError::Observer)?;
    if let Some(c) = coarse_mesh {
        state.remesh(Arc::new(c))?;
    }
    Ok(energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;

    fn square(n: usize) -> Mesh {
        Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), n, n).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(AdaptConfig::default().validate().is_ok());
        let bad = [
            AdaptConfig { tol_t_min: 60.0, ..Default::default() },
            AdaptConfig { tol_c: 0.6, ..Default::default() },
            AdaptConfig { delta1: 1.0, ..Default::default() },
            AdaptConfig { delta2: 0.9, ..Default::default() },
            AdaptConfig { tau0: 0.0, ..Default::default() },
            AdaptConfig { fixed_tau: Some(-1.0), ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(AdaptError::Config(_))));
        }
    }

    #[test]
    fn stationary_state_doubles_to_the_end() {
        let cfg = AdaptConfig { tau0: 1e-4, t_final: 0.1, ..Default::default() };
        let s = init_state(Arc::new(square(4)), |_, _| 1.0, 0.01, cfg.tau0).unwrap();
        let out = control_time_step(&s, &cfg, cfg.tau0).unwrap();
        assert_eq!(out.tau, 0.1);
        assert!(out.eta_time < 1e-10);
        // 1e-4 · 2^10 > 0.1
        assert_eq!(out.retries, 10);
    }

    #[test]
    fn in_band_step_needs_one_solve() {
        let eps = 0.05;
        let u0 = |x: f64, y: f64| (((x - 0.2).powi(2) + y * y - 0.16) / eps).tanh();
        let s = init_state(Arc::new(square(8)), u0, eps, 1e-4).unwrap();
        let probe = AdaptConfig { tau0: 1e-4, t_final: 1.0, ..Default::default() };
        let (u, w, _) = cn_solve(s.space(), eps, 1e-4, s.u(), s.w(), &probe.newton).unwrap();
        let eta = time_indicator_window(&s.trial(&u, &w, 1e-4)).unwrap().eta_time;
        let cfg = AdaptConfig { tol_t: 2.0 * eta, tol_t_min: 0.5 * eta, ..probe.clone() };
        let out = control_time_step(&s, &cfg, 1e-4).unwrap();
        assert_eq!((out.tau, out.retries), (1e-4, 0));
        let cfg = AdaptConfig { tol_t: 0.3 * eta, tol_t_min: 0.01 * eta, ..probe };
        let out = control_time_step(&s, &cfg, 1e-4).unwrap();
        assert!(out.tau < 1e-4 && out.eta_time <= cfg.tol_t && out.eta_time >= cfg.tol_t_min);
        assert_eq!(out.tau, 1e-4 * 0.5f64.powi(out.retries as i32));
    }

    #[test]
    fn growth_past_the_band_keeps_the_smaller_step() {
        let eps = 0.05;
        let u0 = |x: f64, y: f64| (((x - 0.2).powi(2) + y * y - 0.16) / eps).tanh();
        let s = init_state(Arc::new(square(8)), u0, eps, 1e-4).unwrap();
        let probe = AdaptConfig { tau0: 1e-4, t_final: 1.0, ..Default::default() };
        let eta = |tau: f64| {
            let (u, w, _) = cn_solve(s.space(), eps, tau, s.u(), s.w(), &probe.newton).unwrap();
            time_indicator_window(&s.trial(&u, &w, tau)).unwrap().eta_time
        };
        let (e1, e2) = (eta(1e-4), eta(2e-4));
        assert!(1.01 * e1 < 0.99 * e2);
        let cfg = AdaptConfig { tol_t_min: 1.01 * e1, tol_t: 0.99 * e2, ..probe };
        let out = control_time_step(&s, &cfg, 1e-4).unwrap();
        assert_eq!((out.tau, out.eta_time, out.retries), (1e-4, e1, 1));
    }

    #[test]
    fn linear_datum_needs_no_refinement() {
        let m = square(2);
        let nv = m.num_vertices();
        let (mesh, s) = prepare_initial_mesh(m, &|x, y| 0.3 * x - y, 0.1, &AdaptConfig::default()).unwrap();
        assert_eq!(mesh.num_vertices(), nv);
        assert_eq!(s.step(), 0);
    }

    #[test]
    fn constant_one_stops_after_first_check() {
        let cfg = AdaptConfig { tau0: 1e-3, t_final: 1.0, ..Default::default() };
        let mut rec = Recorder::default();
        let sum = run_adaptive(square(4), &|_, _| 1.0, 0.01, &cfg, &mut rec).unwrap();
        assert_eq!(sum.steps, 1);
        assert_eq!(rec.logs.len(), 1);
        assert!(rec.logs[0].energy.abs() < 1e-12);
    }
}

//! Crank-Nicolson mixed time stepping, the three-level window of time
//! levels and the quadratic time reconstruction.

use std::sync::{Arc, OnceLock};

use crate::fem::quadrature::DEGREE4;
use crate::fem::sparse::dot;
use crate::fem::{double_well, BlockCoefficients, FeFunction, FeSpace, FemError, Nonlinearity};
use crate::mesh::{transfer, Mesh, MeshError, TransferMap};
use crate::recovery::RecoveryError;

#[derive(Debug, thiserror::Error)]
pub enum SchemeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("time {t} lies outside the current interval ({t0}, {t1}]")]
    OutsideInterval { t: f64, t0: f64, t1: f64 },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Selects `u` or `w` from a time level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    U,
    W,
}

/// Newton solver limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Converged when the residual is below `tol * (1 + ‖u‖)`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iterations: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// One time level stored on the mesh it was computed on.
#[derive(Debug)]
pub struct Level {
    mesh: Arc<Mesh>,
    u: Vec<f64>,
    w: Vec<f64>,
    recovery: OnceLock<f64>,
}

impl Level {
    fn new(mesh: Arc<Mesh>, u: Vec<f64>, w: Vec<f64>) -> Self {
        Level {
            mesh,
            u,
            w,
            recovery: OnceLock::new(),
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn u(&self) -> FeFunction {
        FeFunction::scalar(&self.mesh, self.u.clone()).expect("level values match their mesh")
    }

    pub fn w(&self) -> FeFunction {
        FeFunction::scalar(&self.mesh, self.w.clone()).expect("level values match their mesh")
    }

    /// Global recovery estimator of `u` on the level's own mesh, cached.
    pub fn recovery_estimate(&self) -> Result<f64, RecoveryError> {
        if let Some(v) = self.recovery.get() {
            return Ok(*v);
        }
        let e = crate::recovery::estimate_values(&self.mesh, &self.u)?.global;
        Ok(*self.recovery.get_or_init(|| e))
    }
}

/// Three consecutive time levels expressed on one common mesh, newest
/// first, together with the two step sizes separating them.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub space: &'a FeSpace,
    pub eps: f64,
    /// Time of the newest level.
    pub t: f64,
    pub u: [&'a [f64]; 3],
    pub w: [&'a [f64]; 3],
    /// `τₙ`, the step ending at the newest level.
    pub tau: f64,
    /// `τₙ₋₁`.
    pub tau_prev: f64,
}

impl Window<'_> {
    pub fn field(&self, f: Field) -> [&[f64]; 3] {
        match f {
            Field::U => self.u,
            Field::W => self.w,
        }
    }

    /// Three-level second difference of arbitrary level data.
    pub fn second_difference_of(&self, v: [&[f64]; 3]) -> Vec<f64> {
        second_difference_values(v, self.tau, self.tau_prev)
    }

    pub fn second_difference(&self, f: Field) -> Vec<f64> {
        self.second_difference_of(self.field(f))
    }

    /// Quadratic time reconstruction on `(tₙ₋₁, tₙ]` and its time derivative.
    pub fn reconstruction(&self, f: Field, t: f64) -> Result<(Vec<f64>, Vec<f64>), SchemeError> {
        let (t1, t0) = (self.t, self.t - self.tau);
        if !(t > t0 && t <= t1) {
            return Err(SchemeError::OutsideInterval { t, t0, t1 });
        }
        let [vn, vm, _] = self.field(f);
        let d2 = self.second_difference(f);
        let a = (t - t0) / self.tau;
        let b = (t1 - t) / self.tau;
        let q = 0.5 * (t - t0) * (t - t1);
        let dq = t - 0.5 * (t0 + t1);
        let value = (0..vn.len()).map(|i| a * vn[i] + b * vm[i] + q * d2[i]).collect();
        let rate = (0..vn.len())
            .map(|i| (vn[i] - vm[i]) / self.tau + dq * d2[i])
            .collect();
        Ok((value, rate))
    }
}

/// `[(νⁿ - νⁿ⁻¹)/τₙ - (νⁿ⁻¹ - νⁿ⁻²)/τₙ₋₁] / ((τₙ + τₙ₋₁)/2)`.
pub fn second_difference_values(v: [&[f64]; 3], tau: f64, tau_prev: f64) -> Vec<f64> {
    let [a, b, c] = v;
    let h = 0.5 * (tau + tau_prev);
    (0..a.len())
        .map(|i| ((a[i] - b[i]) / tau - (b[i] - c[i]) / tau_prev) / h)
        .collect()
}

/// Rolling window of the three most recent accepted levels.
#[derive(Debug, Clone)]
pub struct SimState {
    eps: f64,
    t: f64,
    step: usize,
    tau: f64,
    tau_prev: f64,
    space: Arc<FeSpace>,
    levels: [Arc<Level>; 3],
    u: [Vec<f64>; 3],
    w: [Vec<f64>; 3],
    rebuild_w: bool,
}

/// `w = ε A u + ε⁻¹ P f(u)`, the discrete chemical potential of `u`.
pub fn chemical_potential(space: &FeSpace, u: &[f64], eps: f64) -> Result<Vec<f64>, FemError> {
    let au = space.laplacian(u)?;
    let pf = space.project_nonlinear(u, Nonlinearity::DoubleWell)?;
    Ok(au.iter().zip(&pf).map(|(a, p)| eps * a + p / eps).collect())
}

/// Projects `u0` onto the mesh and sets `w⁰` from the constitutive relation.
/// Levels `-1` and `-2` alias level 0; `tau0` is the nominal step that ends
/// at level 0.
pub fn init_state<F: Fn(f64, f64) -> f64>(
    mesh: Arc<Mesh>,
    u0: F,
    eps: f64,
    tau0: f64,
) -> Result<SimState, SchemeError> {
    if !(eps > 0.0) {
        return Err(SchemeError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if !(tau0 > 0.0) {
        return Err(SchemeError::InvalidParameter(format!("tau0 must be positive, got {tau0}")));
    }
    let space = Arc::new(FeSpace::new(mesh.clone())?);
    let u = space.project(u0)?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(FemError::NonFinite.into());
    }
    let w = chemical_potential(&space, &u, eps)?;
    let level = Arc::new(Level::new(mesh, u.clone(), w.clone()));
    Ok(SimState {
        eps,
        t: 0.0,
        step: 0,
        tau: tau0,
        tau_prev: tau0,
        space,
        levels: [level.clone(), level.clone(), level],
        u: [u.clone(), u.clone(), u],
        w: [w.clone(), w.clone(), w],
        rebuild_w: true,
    })
}

impl SimState {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tau_prev(&self) -> f64 {
        self.tau_prev
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.space.mesh()
    }

    pub fn levels(&self) -> &[Arc<Level>; 3] {
        &self.levels
    }

    /// Newest `u` on the current mesh.
    pub fn u(&self) -> &[f64] {
        &self.u[0]
    }

    pub fn w(&self) -> &[f64] {
        &self.w[0]
    }

    /// Level `k` (0 = newest) of `field` on the current mesh.
    pub fn level_values(&self, field: Field, k: usize) -> &[f64] {
        match field {
            Field::U => &self.u[k],
            Field::W => &self.w[k],
        }
    }

    pub fn u_function(&self) -> FeFunction {
        FeFunction::scalar(self.mesh(), self.u[0].clone()).expect("state values match mesh")
    }

    pub fn w_function(&self) -> FeFunction {
        FeFunction::scalar(self.mesh(), self.w[0].clone()).expect("state values match mesh")
    }

    /// Whether transferred levels get their `w` recomputed from `u` on the
    /// new mesh.
    pub fn set_rebuild_w(&mut self, on: bool) {
        self.rebuild_w = on;
    }

    pub fn rebuild_w(&self) -> bool {
        self.rebuild_w
    }

    /// The accepted window `(n, n-1, n-2)`.
    pub fn window(&self) -> Window<'_> {
        Window {
            space: &self.space,
            eps: self.eps,
            t: self.t,
            u: [&self.u[0], &self.u[1], &self.u[2]],
            w: [&self.w[0], &self.w[1], &self.w[2]],
            tau: self.tau,
            tau_prev: self.tau_prev,
        }
    }

    /// The window `(new, n, n-1)` obtained by a trial step of size `tau`.
    pub fn trial<'a>(&'a self, u_new: &'a [f64], w_new: &'a [f64], tau: f64) -> Window<'a> {
        Window {
            space: &self.space,
            eps: self.eps,
            t: self.t + tau,
            u: [u_new, &self.u[0], &self.u[1]],
            w: [w_new, &self.w[0], &self.w[1]],
            tau,
            tau_prev: self.tau,
        }
    }

    /// Accepts a computed step, shifting the window.
    pub fn advance(&mut self, u_new: Vec<f64>, w_new: Vec<f64>, tau: f64) {
        assert_eq!(u_new.len(), self.space.num_dofs());
        assert_eq!(w_new.len(), self.space.num_dofs());
        let level = Arc::new(Level::new(self.mesh().clone(), u_new.clone(), w_new.clone()));
        self.levels.rotate_right(1);
        self.levels[0] = level;
        self.u.rotate_right(1);
        self.u[0] = u_new;
        self.w.rotate_right(1);
        self.w[0] = w_new;
        self.t += tau;
        self.tau_prev = self.tau;
        self.tau = tau;
        self.step += 1;
    }

    /// Moves the window onto `mesh`, interpolating every level from the mesh
    /// it was computed on.
    pub fn remesh(&mut self, mesh: Arc<Mesh>) -> Result<(), SchemeError> {
        let space = Arc::new(FeSpace::new(mesh.clone())?);
        let mut u: [Vec<f64>; 3] = Default::default();
        let mut w: [Vec<f64>; 3] = Default::default();
        for k in 0..3 {
            if k > 0 && Arc::ptr_eq(&self.levels[k], &self.levels[k - 1]) {
                u[k] = u[k - 1].clone();
                w[k] = w[k - 1].clone();
                continue;
            }
            let level = &self.levels[k];
            if level.mesh.generation() == mesh.generation() {
                u[k] = level.u.clone();
                w[k] = level.w.clone();
                continue;
            }
            let map = TransferMap::between(&level.mesh, &mesh)?;
            u[k] = transfer(&level.u(), &map)?.into_values();
            w[k] = if self.rebuild_w {
                chemical_potential(&space, &u[k], self.eps)?
            } else {
                transfer(&level.w(), &map)?.into_values()
            };
        }
        self.space = space;
        self.u = u;
        self.w = w;
        Ok(())
    }
}

/// Residual of the Crank-Nicolson system, rows scaled as
/// `R₁ = M(u - u⁻) + (τ/2) K (w + w⁻)` and
/// `R₂ = (ε/2) K (u + u⁻) + (b(u) + b(u⁻))/(2ε) - (1/2) M (w + w⁻)`.
fn cn_residual(
    space: &FeSpace,
    eps: f64,
    tau: f64,
    u: &[f64],
    w: &[f64],
    u_old: &[f64],
    w_old: &[f64],
    b_old: &[f64],
) -> Result<Vec<f64>, FemError> {
    let n = u.len();
    let du: Vec<f64> = (0..n).map(|i| u[i] - u_old[i]).collect();
    let sw: Vec<f64> = (0..n).map(|i| w[i] + w_old[i]).collect();
    let su: Vec<f64> = (0..n).map(|i| u[i] + u_old[i]).collect();
    let m_du = space.mass().mul_vec(&du);
    let k_sw = space.stiffness().mul_vec(&sw);
    let k_su = space.stiffness().mul_vec(&su);
    let m_sw = space.mass().mul_vec(&sw);
    let b = space.nonlinear_load(u, Nonlinearity::DoubleWell)?;
    let mut r = Vec::with_capacity(2 * n);
    for i in 0..n {
        r.push(m_du[i] + 0.5 * tau * k_sw[i]);
    }
    for i in 0..n {
        r.push(0.5 * eps * k_su[i] + (b[i] + b_old[i]) / (2.0 * eps) - 0.5 * m_sw[i]);
    }
    Ok(r)
}

/// Dual norm `sqrt(R₁ᵀM⁻¹R₁ + R₂ᵀM⁻¹R₂)`.
fn residual_norm(space: &FeSpace, r: &[f64]) -> Result<f64, FemError> {
    let n = space.num_dofs();
    let a = space.solve_mass(&r[..n])?;
    let b = space.solve_mass(&r[n..])?;
    Ok((dot(&r[..n], &a) + dot(&r[n..], &b)).max(0.0).sqrt())
}

/// Solves one Crank-Nicolson step of size `tau` from the newest level with
/// Newton's method, starting from the newest level.
pub fn cn_step(
    state: &SimState,
    tau: f64,
    opts: &NewtonOptions,
) -> Result<(FeFunction, FeFunction, NewtonReport), SchemeError> {
    let (u, w, report) = cn_solve(&state.space, state.eps, tau, state.u(), state.w(), opts)?;
    let mesh = state.mesh();
    Ok((FeFunction::scalar(mesh, u)?, FeFunction::scalar(mesh, w)?, report))
}

/// Raw-vector form of [`cn_step`].
pub fn cn_solve(
    space: &FeSpace,
    eps: f64,
    tau: f64,
    u_old: &[f64],
    w_old: &[f64],
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, Vec<f64>, NewtonReport), SchemeError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(SchemeError::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let n = space.num_dofs();
    let b_old = space.nonlinear_load(u_old, Nonlinearity::DoubleWell)?;
    let mut u = u_old.to_vec();
    let mut w = w_old.to_vec();
    let coef = BlockCoefficients {
        uu: 1.0,
        uw: 0.5 * tau,
        wu_k: 0.5 * eps,
        wu_d: 0.5 / eps,
        ww: -0.5,
    };
    let mut iterations = 0;
    loop {
        let r = cn_residual(space, eps, tau, &u, &w, u_old, w_old, &b_old)?;
        let res = residual_norm(space, &r)?;
        let target = opts.tol * (1.0 + space.l2_norm(&u));
        if res <= target {
            return Ok((
                u,
                w,
                NewtonReport {
                    iterations,
                    residual: res,
                    converged: true,
                },
            ));
        }
        if iterations >= opts.max_iterations || !res.is_finite() {
            return Err(SchemeError::NewtonDiverged {
                iterations,
                residual: res,
            });
        }
        let d = space.nonlinear_jacobian(&u, Nonlinearity::DoubleWell);
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = match space.solve_block(coef, &d, &rhs) {
            Ok(d) => d,
            Err(FemError::LinearSolver { residual, .. }) => {
                return Err(SchemeError::NewtonDiverged {
                    iterations,
                    residual,
                })
            }
            Err(e) => return Err(e.into()),
        };
        for i in 0..n {
            u[i] += delta[i];
            w[i] += delta[n + i];
        }
        iterations += 1;
    }
}

/// `E(u) = ∫ (ε/2)|∇u|² + ε⁻¹ ¼(u² - 1)²`.
pub fn energy_values(space: &FeSpace, u: &[f64], eps: f64) -> f64 {
    let mesh = space.mesh();
    let mut grad = 0.0;
    let mut pot = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = space.gradient(u, t);
        let a = space.area(t);
        grad += a * (g[0] * g[0] + g[1] * g[1]);
        let ul = tri.map(|v| u[v]);
        let mut q = 0.0;
        for (wq, b) in &DEGREE4 {
            q += wq * double_well(b[0] * ul[0] + b[1] * ul[1] + b[2] * ul[2]);
        }
        pot += a * q;
    }
    0.5 * eps * grad + pot / eps
}

pub fn energy(mesh: &Mesh, u: &FeFunction, eps: f64) -> Result<f64, SchemeError> {
    u.check_scalar_on(mesh)?;
    let space = FeSpace::from_mesh(mesh)?;
    Ok(energy_values(&space, u.values(), eps))
}

/// `∂ₙ²` of `u` or `w` over the accepted window.
pub fn second_difference(state: &SimState, field: Field) -> FeFunction {
    let v = state.window().second_difference(field);
    FeFunction::scalar(state.mesh(), v).expect("state values match mesh")
}

/// Quadratic reconstruction at `t ∈ (tₙ₋₁, tₙ]` and its time derivative.
pub fn eval_reconstruction(
    state: &SimState,
    field: Field,
    t: f64,
) -> Result<(FeFunction, FeFunction), SchemeError> {
    let (v, dv) = state.window().reconstruction(field, t)?;
    let mesh = state.mesh();
    Ok((FeFunction::scalar(mesh, v)?, FeFunction::scalar(mesh, dv)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;

    fn square(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), n, n).unwrap())
    }

    fn example1(eps: f64) -> impl Fn(f64, f64) -> f64 {
        move |x: f64, y: f64| {
            (((x - 0.3).powi(2) + y * y - 0.25f64.powi(2)) / eps).tanh()
                * (((x + 0.3).powi(2) + y * y - 0.3f64.powi(2)) / eps).tanh()
        }
    }

    #[test]
    fn pure_states_initialize_exactly() {
        for c in [1.0, 0.0, -1.0] {
            let s = init_state(square(3), |_, _| c, 0.01, 1e-4).unwrap();
            assert!(s.u().iter().all(|v| (v - c).abs() < 1e-12));
            assert!(s.w().iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn pure_state_is_a_fixed_point() {
        let s = init_state(square(4), |_, _| 1.0, 0.01, 1e-4).unwrap();
        let (u, w, rep) = cn_step(&s, 1e-3, &NewtonOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(u.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!(w.values().iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn step_conserves_mass_and_satisfies_rows() {
        let eps = 0.05;
        let s = init_state(square(8), example1(eps), eps, 1e-4).unwrap();
        let opts = NewtonOptions::default();
        let (u, w, rep) = cn_step(&s, 1e-4, &opts).unwrap();
        assert!(rep.converged && rep.iterations >= 1);
        let sp = s.space();
        assert!((sp.integral(u.values()) - sp.integral(s.u())).abs() <= 1e-9);
        let b_old = sp.nonlinear_load(s.u(), Nonlinearity::DoubleWell).unwrap();
        let r = cn_residual(sp, eps, 1e-4, u.values(), w.values(), s.u(), s.w(), &b_old).unwrap();
        assert!(residual_norm(sp, &r).unwrap() <= 1e-10 * (1.0 + sp.l2_norm(u.values())));
    }

    #[test]
    fn init_mass_matches_quadrature_of_datum() {
        let eps = 0.01;
        let s = init_state(square(32), example1(eps), eps, 1e-4).unwrap();
        let sp = s.space();
        // projection preserves ∫u0 exactly up to quadrature of the load
        let load = sp.load(example1(eps));
        let datum_mass: f64 = load.iter().sum();
        assert!((sp.integral(s.u()) - datum_mass).abs() < 1e-10);
    }

    #[test]
    fn second_difference_examples() {
        let a = [1.0, 2.0];
        assert!(second_difference_values([&a, &a, &a], 0.1, 0.2).iter().all(|v| *v == 0.0));
        // samples of t² at t = 0.3, 0.2, 0.1
        let v = [[0.09], [0.04], [0.01]];
        let d = second_difference_values([&v[0], &v[1], &v[2]], 0.1, 0.1);
        assert!((d[0] - 2.0).abs() < 1e-12);
        // n = 1 with the aliased level: (ν¹ - ν⁰)/τ₁ / ((τ₁ + τ₀)/2)
        let (n1, n0) = ([0.7], [0.2]);
        let (t1, t0) = (0.05, 0.2);
        let d = second_difference_values([&n1, &n0, &n0], t1, t0);
        assert!((d[0] - (0.5 / t1) / ((t1 + t0) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_endpoints_and_midpoint() {
        let eps = 0.05;
        let mut s = init_state(square(4), example1(eps), eps, 1e-3).unwrap();
        let opts = NewtonOptions::default();
        for tau in [1e-3, 5e-4] {
            let (u, w, _) = cn_step(&s, tau, &opts).unwrap();
            s.advance(u.into_values(), w.into_values(), tau);
        }
        let (tn, tau) = (s.time(), s.tau());
        let (at_end, _) = eval_reconstruction(&s, Field::U, tn).unwrap();
        for (a, b) in at_end.values().iter().zip(s.u()) {
            assert!((a - b).abs() < 1e-12);
        }
        let (near_start, _) = eval_reconstruction(&s, Field::U, tn - tau * (1.0 - 1e-13)).unwrap();
        for (a, b) in near_start.values().iter().zip(s.level_values(Field::U, 1)) {
            assert!((a - b).abs() < 1e-12);
        }
        let (mid, _) = eval_reconstruction(&s, Field::U, tn - 0.5 * tau).unwrap();
        let d2 = second_difference(&s, Field::U);
        for i in 0..mid.len() {
            let expect = 0.5 * (s.u()[i] + s.level_values(Field::U, 1)[i]) - tau * tau / 8.0 * d2.values()[i];
            assert!((mid.values()[i] - expect).abs() < 1e-12);
        }
        assert!(eval_reconstruction(&s, Field::U, tn + 1e-9).is_err());
        assert!(eval_reconstruction(&s, Field::U, tn - tau).is_err());
    }

    #[test]
    fn energy_examples() {
        let m = Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 6, 6).unwrap();
        for c in [1.0, -1.0] {
            let u = FeFunction::scalar_from_fn(&m, |_, _| c);
            assert!(energy(&m, &u, 0.01).unwrap().abs() < 1e-12);
        }
        let zero = FeFunction::zeros(&m);
        assert!((energy(&m, &zero, 0.01).unwrap() - 100.0).abs() < 1e-10);
        // u = 2x + 3y: ∫¼(u²-1)² over [-1,1]² = 4·(¼)(E[u⁴] - 2E[u²] + 1)
        // with E[u²] = 13/3 and E[u⁴] = 16/5 + 81/5 + 2·36/9 = 97/5 + 8
        let eps = 0.3;
        let lin = FeFunction::scalar_from_fn(&m, |x, y| 2.0 * x + 3.0 * y);
        let eu2 = 13.0 / 3.0;
        let eu4 = 16.0 / 5.0 + 81.0 / 5.0 + 6.0 * 4.0 * 9.0 / 9.0;
        let pot = eu4 - 2.0 * eu2 + 1.0;
        let expect = 26.0 * eps + pot / eps;
        assert!((energy(&m, &lin, eps).unwrap() - expect).abs() < 1e-10 * expect);
    }
}

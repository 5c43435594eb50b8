use super::{combine, EstimatorError};
use crate::fem::{FeSpace, Nonlinearity};
use crate::scheme::{Field, SimState, Window};

/// The ten time-discretization terms and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimeIndicatorBreakdown {
    pub gamma_w: f64,
    pub beta_u: f64,
    pub eta_w: f64,
    pub delta_w: f64,
    pub delta_u: f64,
    pub gamma_u: f64,
    pub xi_u: f64,
    pub beta_w: f64,
    pub theta_u: f64,
    pub zeta_u: f64,
    pub eta_time: f64,
}

impl TimeIndicatorBreakdown {
    pub const NAMES: [&'static str; 10] = [
        "gamma_w", "beta_u", "eta_w", "delta_w", "delta_u", "gamma_u", "xi_u", "beta_w", "theta_u",
        "zeta_u",
    ];

    pub fn terms(&self) -> [f64; 10] {
        [
            self.gamma_w,
            self.beta_u,
            self.eta_w,
            self.delta_w,
            self.delta_u,
            self.gamma_u,
            self.xi_u,
            self.beta_w,
            self.theta_u,
            self.zeta_u,
        ]
    }

    /// Name of the largest term.
    pub fn dominant(&self) -> &'static str {
        let t = self.terms();
        let mut k = 0;
        for i in 1..10 {
            if t[i] > t[k] {
                k = i;
            }
        }
        Self::NAMES[k]
    }

    fn from_terms(t: [f64; 10]) -> Self {
        TimeIndicatorBreakdown {
            gamma_w: t[0],
            beta_u: t[1],
            eta_w: t[2],
            delta_w: t[3],
            delta_u: t[4],
            gamma_u: t[5],
            xi_u: t[6],
            beta_w: t[7],
            theta_u: t[8],
            zeta_u: t[9],
            eta_time: t.iter().sum(),
        }
    }
}

fn diff(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    combine(a.len(), |i| s * (a[i] - b[i]))
}

fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| s * v).collect()
}

/// `r = εAu + ε⁻¹P h(u) - w` with `h(u) = u³`.
fn constitutive(sp: &FeSpace, eps: f64, u: &[f64], w: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    let au = sp.laplacian(u)?;
    let ph = sp.project_nonlinear(u, Nonlinearity::Cubic)?;
    Ok(combine(u.len(), |i| eps * au[i] + ph[i] / eps - w[i]))
}

/// `θ_u` alone.
pub fn theta_u(win: &Window) -> Result<f64, EstimatorError> {
    let sp = win.space;
    let r: Vec<Vec<f64>> = (0..3)
        .map(|k| constitutive(sp, win.eps, win.u[k], win.w[k]))
        .collect::<Result<_, _>>()?;
    Ok(2.0 * sp.l2_norm(&diff(&r[1], &r[0], 1.0)) + sp.l2_norm(&diff(&r[1], &r[2], 1.0)))
}

pub fn time_indicator_window(win: &Window) -> Result<TimeIndicatorBreakdown, EstimatorError> {
    let sp = win.space;
    let eps = win.eps;
    let n = sp.num_dofs();
    let q = win.tau * win.tau / 8.0;
    let [u0, u1, u2] = win.u;
    let [w0, w1, _] = win.w;

    let aw: Vec<Vec<f64>> = win.w.iter().map(|w| sp.laplacian(w)).collect::<Result<_, _>>()?;
    let au: Vec<Vec<f64>> = win.u.iter().map(|u| sp.laplacian(u)).collect::<Result<_, _>>()?;
    let d2u = win.second_difference(Field::U);
    let d2w = win.second_difference(Field::W);

    let gamma_w = sp.neg_norm(&diff(&aw[0], &aw[1], 0.5))?;
    let beta_u = sp.neg_norm(&scaled(&d2u, q))?;

    let z: Vec<Vec<f64>> = (0..3).map(|k| combine(n, |i| aw[k][i] + win.w[k][i])).collect();
    let d2z = win.second_difference_of([&z[0], &z[1], &z[2]]);
    let eta_w = sp.neg_norm(&diff(&z[1], &z[0], 1.0))? + sp.neg_norm(&scaled(&d2z, q))?;

    let delta_w = sp.neg_norm(&diff(w0, w1, 1.0))? + sp.neg_norm(&scaled(&d2w, q))?;
    let delta_u = sp.l2_norm(&diff(u0, u1, 1.0 / eps));
    let gamma_u = eps * sp.l2_norm(&diff(&au[0], &au[1], 0.5));

    let pf0 = sp.project_nonlinear(u0, Nonlinearity::DoubleWell)?;
    let pf1 = sp.project_nonlinear(u1, Nonlinearity::DoubleWell)?;
    let xi_u = sp.l2_norm(&diff(&pf0, &pf1, 0.5 / eps));
    let beta_w = sp.l2_norm(&diff(w0, w1, 0.5));

    let r: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let ph = sp.project_nonlinear(win.u[k], Nonlinearity::Cubic)?;
            Ok(combine(n, |i| eps * au[k][i] + ph[i] / eps - win.w[k][i]))
        })
        .collect::<Result<_, EstimatorError>>()?;
    let theta_u = 2.0 * sp.l2_norm(&diff(&r[1], &r[0], 1.0)) + sp.l2_norm(&diff(&r[1], &r[2], 1.0));

    let zeta_u = zeta(sp, eps, win.tau, win.tau_prev, [u0, u1, u2], &d2u);

    Ok(TimeIndicatorBreakdown::from_terms([
        gamma_w, beta_u, eta_w, delta_w, delta_u, gamma_u, xi_u, beta_w, theta_u, zeta_u,
    ]))
}

/// The eight nodal-product norms of `ζ_u`.
fn zeta(sp: &FeSpace, eps: f64, tau: f64, tau_prev: f64, u: [&[f64]; 3], d: &[f64]) -> f64 {
    let n = sp.num_dofs();
    let [a, b, c] = u;
    let cube = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * x * x).collect() };
    let (a3, b3, c3) = (cube(a), cube(b), cube(c));
    let d2cube = crate::scheme::second_difference_values([&a3, &b3, &c3], tau, tau_prev);
    let t2 = tau * tau / (8.0 * eps);
    let t4 = tau.powi(4) / (64.0 * eps);
    let t6 = tau.powi(6) / (512.0 * eps);
    let terms: [Box<dyn Fn(usize) -> f64>; 8] = [
        Box::new(|i| (3.0 * a[i] * a[i] * b[i] - 2.0 * a3[i] - b3[i]) / eps),
        Box::new(|i| (3.0 * a[i] * b[i] * b[i] - 2.0 * b3[i] - a3[i]) / eps),
        Box::new(|i| (3.0 * a[i] * a[i] * d[i] - 3.0 * a[i] * b[i] * d[i]) * t2),
        Box::new(|i| (3.0 * b[i] * b[i] * d[i] - 3.0 * a[i] * b[i] * d[i]) * t2),
        Box::new(|i| (3.0 * a[i] * b[i] * d[i] - d2cube[i]) * t2),
        Box::new(|i| (3.0 * a[i] * d[i] * d[i] - 3.0 * b[i] * d[i] * d[i]) * t4),
        Box::new(|i| 3.0 * b[i] * d[i] * d[i] * t4),
        Box::new(|i| d[i] * d[i] * d[i] * t6),
    ];
    terms.iter().map(|f| sp.l2_norm(&combine(n, f))).sum()
}

pub fn time_indicator(state: &SimState) -> Result<TimeIndicatorBreakdown, EstimatorError> {
    time_indicator_window(&state.window())
}

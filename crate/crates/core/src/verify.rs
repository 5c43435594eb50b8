//! Verification batteries: dense-algebra oracles, invariants, convergence
//! studies and indicator dominance on desk-scale runs.
//!
//! Each numbered battery returns [`Check`]s carrying the measured value.

use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adapt::{run_adaptive, RunObserver, StepLog};
use crate::estimators::{
    mark, space_indicator_from, time_indicator_window, EstimatorKind,
};
use crate::fem::sparse::{spd_solve, CsrMatrix};
use crate::fem::{discrete_laplacian, l2_project, neg_norm, FeFunction, FeSpace};
use crate::mesh::{coarsen, refine, Mesh, Rect};
use crate::problem::ProblemSpec;
use crate::recovery::{recovery_estimator, scr_recover};
use crate::scheme::{cn_solve, init_state, NewtonOptions, SimState, Window};

pub const SUITES: [&str; 4] = ["oracles", "invariants", "convergence", "dominance"];

/// Criteria run by each suite.
pub fn suite_criteria(name: &str) -> Option<&'static [u8]> {
    match name {
        "oracles" => Some(&[1]),
        "invariants" => Some(&[2, 5, 8, 10]),
        "convergence" => Some(&[3, 4]),
        "dominance" => Some(&[6, 7, 9]),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub measured: String,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: impl Into<String>, passed: bool) -> Check {
        Check {
            name: name.into(),
            measured: measured.into(),
            passed,
        }
    }

    fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check::new(name, format!("{value:.3e} (<= {bound:e})"), value <= bound)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// One-line report of a criterion.
pub fn summary_line(criterion: u8, checks: &[Check]) -> String {
    let status = if all_passed(checks) { "PASS" } else { "FAIL" };
    let parts: Vec<String> = checks
        .iter()
        .map(|c| format!("{}{}: {}", if c.passed { "" } else { "!" }, c.name, c.measured))
        .collect();
    format!("criterion {criterion:>2} {status} | {}", parts.join("; "))
}

pub fn criterion(n: u8) -> crate::Result<Vec<Check>> {
    let start = Instant::now();
    let (mut checks, limit) = match n {
        1 => (oracles()?, Some(10.0)),
        2 => (conservation()?, Some(120.0)),
        3 => (temporal_order()?, Some(300.0)),
        4 => (superconvergence()?, Some(30.0)),
        5 => (indicator_identities()?, Some(30.0)),
        6 => (dominance()?, Some(600.0)),
        7 => (localization()?, None),
        8 => (energy_dissipation()?, None),
        9 => (economy()?, None),
        10 => (mesh_machinery()?, Some(60.0)),
        _ => return Err(crate::Error::Io(std::io::Error::other(format!("no criterion {n}")))),
    };
    if let Some(limit) = limit {
        checks.push(Check::new(
            "runtime",
            format!("{:.1} s (< {limit} s)", start.elapsed().as_secs_f64()),
            start.elapsed().as_secs_f64() < limit,
        ));
    }
    Ok(checks)
}

/// Runs a suite and prints one line per check; returns whether all passed.
pub fn run_suite<W: Write>(name: &str, out: &mut W) -> crate::Result<bool> {
    let Some(list) = suite_criteria(name) else {
        return Err(crate::Error::Io(std::io::Error::other(format!("unknown suite `{name}`"))));
    };
    let mut ok = true;
    for &n in list {
        let checks = criterion(n)?;
        for c in &checks {
            writeln!(
                out,
                "[{}] {n:>2} {}: {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.measured
            )?;
        }
        ok &= all_passed(&checks);
    }
    Ok(ok)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn square() -> Rect {
    Rect::new(-1.0, 1.0, -1.0, 1.0)
}

// ---------------------------------------------------------------- oracles

/// Dense mass and stiffness matrices from the element formulas.
fn dense_matrices(mesh: &Mesh) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = mesh.num_vertices();
    let mut m = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let area = 0.5 * det.abs();
        let grads: Vec<[f64; 2]> = (0..3)
            .map(|i| {
                let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                [(a[1] - b[1]) / det, (b[0] - a[0]) / det]
            })
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                let mass = if i == j { area / 6.0 } else { area / 12.0 };
                m[(tri[i], tri[j])] += mass;
                k[(tri[i], tri[j])] += area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
            }
        }
    }
    (m, k)
}

/// Exact `∫ q φᵢ` for a quadratic `q` through its P2 nodal values.
fn quadratic_load(mesh: &Mesh, q: &dyn Fn(f64, f64) -> f64) -> DVector<f64> {
    let mut b = DVector::zeros(mesh.num_vertices());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let area = mesh.area(t);
        let fv: Vec<f64> = p.iter().map(|x| q(x[0], x[1])).collect();
        // midpoint of the edge opposite vertex i
        let fm: Vec<f64> = (0..3)
            .map(|i| {
                let (a, c) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                q(0.5 * (a[0] + c[0]), 0.5 * (a[1] + c[1]))
            })
            .collect();
        for j in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                s += fv[i] * if i == j { area / 30.0 } else { -area / 60.0 };
                // the edge opposite i contains j unless i == j
                s += fm[i] * if i == j { area / 15.0 } else { 2.0 * area / 15.0 };
            }
            b[tri[j]] += s;
        }
    }
    b
}

fn oracle_meshes(rng: &mut ChaCha8Rng) -> Vec<Mesh> {
    let mut v = vec![
        Mesh::criss_cross(Rect::unit(), 2, 2).unwrap(),
        Mesh::criss_cross(square(), 4, 4).unwrap(),
        Mesh::criss_cross(Rect::new(0.0, 2.0, 0.0, 1.0), 8, 4).unwrap(),
        Mesh::criss_cross(Rect::unit(), 9, 9).unwrap(),
    ];
    let base = Mesh::criss_cross(square(), 5, 5).unwrap();
    let marked: Vec<usize> = (0..8).map(|_| rng.gen_range(0..base.num_triangles())).collect();
    v.push(refine(&base, &marked).unwrap().0);
    v
}

fn oracles() -> crate::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let meshes = oracle_meshes(&mut rng);
    let max_dofs = meshes.iter().map(|m| m.num_vertices()).max().unwrap_or(0);
    let mut worst = [0.0f64; 4];
    for mesh in &meshes {
        let n = mesh.num_vertices();
        let (md, kd) = dense_matrices(mesh);
        let m_lu = md.clone().lu();
        let k_pinv = kd.clone().pseudo_inverse(1e-12).expect("pseudo-inverse");
        let ones = DVector::from_element(n, 1.0);
        let total = (ones.transpose() * &md * &ones)[(0, 0)];
        for _ in 0..10 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dv = DVector::from_vec(v.clone());

            let got = discrete_laplacian(mesh, &FeFunction::scalar(mesh, v.clone())?)?;
            let want = m_lu.solve(&(&kd * &dv)).expect("mass solve");
            worst[0] = worst[0].max(rel_err(got.values(), want.as_slice()));

            let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = move |x: f64, y: f64| c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
            let got = l2_project(mesh, q.clone())?;
            let want = m_lu.solve(&quadratic_load(mesh, &q)).expect("mass solve");
            worst[1] = worst[1].max(rel_err(got.values(), want.as_slice()));

            let mean = (ones.transpose() * &md * &dv)[(0, 0)] / total;
            let r = &md * (&dv - DVector::from_element(n, mean));
            let want = (r.transpose() * &k_pinv * &r)[(0, 0)].max(0.0).sqrt();
            let got = neg_norm(mesh, &FeFunction::scalar(mesh, v.clone())?)?;
            worst[2] = worst[2].max((got - want).abs() / want.max(f64::MIN_POSITIVE));

            let shift = rng.gen_range(0.5..2.0);
            let a = &kd + &md * shift;
            let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
            let sparse = CsrMatrix::from_dense(&rows)?;
            let got = spd_solve(&sparse, &v)?;
            let want = a.cholesky().expect("spd").solve(&dv);
            worst[3] = worst[3].max(rel_err(&got, want.as_slice()));
        }
    }
    let mut checks = vec![Check::new(
        "meshes",
        format!("{} meshes, largest {max_dofs} dofs", meshes.len()),
        meshes.len() == 5 && max_dofs <= 200,
    )];
    for (name, w) in ["discrete_laplacian", "l2_project", "neg_norm", "spd_solve"].iter().zip(worst) {
        checks.push(Check::at_most(name, w, 1e-8));
    }
    Ok(checks)
}

// ----------------------------------------------------------- conservation

fn conservation() -> crate::Result<Vec<Check>> {
    let p = ProblemSpec::preset("example1")?;
    let mesh = Arc::new(Mesh::criss_cross(p.domain, 32, 32)?);
    let tau = 1e-5;
    let mut s = init_state(mesh, |x, y| p.eval(x, y), p.eps, tau)?;
    let m0 = s.space().integral(s.u());
    let opts = NewtonOptions::default();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (u, w, _) = cn_solve(s.space(), p.eps, tau, s.u(), s.w(), &opts)?;
        s.advance(u, w, tau);
        worst = worst.max((s.space().integral(s.u()) - m0).abs());
    }
    Ok(vec![
        Check::new("steps", format!("{} on {} nodes", s.step(), s.mesh().num_vertices()), s.step() == 200),
        Check::at_most("max |(u^n,1) - (u^0,1)|", worst, 1e-9),
    ])
}

// ---------------------------------------------------------- temporal order

/// `u_h(T)` after `n` equal CN steps on a fixed mesh.
fn cn_run(mesh: &Arc<Mesh>, p: &ProblemSpec, t_end: f64, n: usize) -> crate::Result<(Vec<f64>, Arc<FeSpace>)> {
    let tau = t_end / n as f64;
    let mut s = init_state(mesh.clone(), |x, y| p.eval(x, y), p.eps, tau)?;
    let opts = NewtonOptions::default();
    for _ in 0..n {
        let (u, w, _) = cn_solve(s.space(), p.eps, tau, s.u(), s.w(), &opts)?;
        s.advance(u, w, tau);
    }
    Ok((s.u().to_vec(), s.space().clone()))
}

/// Observed order from solutions at `τ`, `τ/2`, `τ/4`.
pub fn observed_order(sp: &FeSpace, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let d1: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let d2: Vec<f64> = b.iter().zip(c).map(|(x, y)| x - y).collect();
    (sp.l2_norm(&d1) / sp.l2_norm(&d2)).log2()
}

fn temporal_order() -> crate::Result<Vec<Check>> {
    let p = ProblemSpec::preset("example1")?;
    let mesh = Arc::new(Mesh::criss_cross(p.domain, 32, 32)?);
    let t_end = 1e-4;
    let (a, sp) = cn_run(&mesh, &p, t_end, 40)?;
    let (b, _) = cn_run(&mesh, &p, t_end, 80)?;
    let (c, _) = cn_run(&mesh, &p, t_end, 160)?;
    let order = observed_order(&sp, &a, &b, &c);
    Ok(vec![Check::new(
        "L2 self-convergence order (tau = T/40, T/80, T/160)",
        format!("{order:.4} (in [1.8, 2.2])"),
        (1.8..=2.2).contains(&order),
    )])
}

// ------------------------------------------------------- superconvergence

pub fn gradient_errors(n: usize) -> crate::Result<(f64, f64)> {
    let mesh = Mesh::criss_cross(Rect::unit(), n, n)?;
    let sp = FeSpace::from_mesh(&mesh)?;
    let u = FeFunction::scalar_from_fn(&mesh, |x, _| x * x);
    let g = scr_recover(&mesh, &u)?;
    let mut raw = 0.0;
    let mut rec = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let gh = sp.gradient(u.values(), t);
        let p = mesh.triangle_points(t);
        raw += crate::fem::quadrature::integrate(&p, mesh.area(t), |x| {
            (gh[0] - 2.0 * x[0]).powi(2) + gh[1].powi(2)
        });
        for (w, b) in &crate::fem::quadrature::DEGREE4 {
            let x = crate::fem::quadrature::point(&p, b);
            let gx: f64 = (0..3).map(|i| b[i] * g.values()[tri[i]][0]).sum();
            let gy: f64 = (0..3).map(|i| b[i] * g.values()[tri[i]][1]).sum();
            rec += w * mesh.area(t) * ((gx - 2.0 * x[0]).powi(2) + gy * gy);
        }
    }
    Ok((raw.sqrt(), rec.sqrt()))
}

fn superconvergence() -> crate::Result<Vec<Check>> {
    let ns = [8usize, 16, 32];
    let errs: Vec<(f64, f64)> = ns.iter().map(|&n| gradient_errors(n)).collect::<Result<_, _>>()?;
    let slope = |a: f64, b: f64| (a / b).log2() / (ns[2] as f64 / ns[0] as f64).log2();
    let raw = slope(errs[0].0, errs[2].0);
    let rec = slope(errs[0].1, errs[2].1);
    let mut lin = 0.0f64;
    for mesh in [
        Mesh::criss_cross(Rect::unit(), 8, 8)?,
        Mesh::criss_cross(square(), 5, 3)?,
        refine(&Mesh::criss_cross(square(), 4, 4)?, &[0, 5, 9, 17])?.0,
    ] {
        let u = FeFunction::scalar_from_fn(&mesh, |x, y| 0.7 * x - 1.3 * y + 0.25);
        lin = lin.max(recovery_estimator(&mesh, &u)?.global);
    }
    Ok(vec![
        Check::new(
            "recovered gradient slope",
            format!("{rec:.4} (>= 1.5; errors {:.3e} {:.3e} {:.3e})", errs[0].1, errs[1].1, errs[2].1),
            rec >= 1.5,
        ),
        Check::new("raw gradient slope", format!("{raw:.4} (1 +- 0.15)"), (raw - 1.0).abs() <= 0.15),
        Check::at_most("linear field estimator", lin, 1e-12),
    ])
}

// ---------------------------------------------------- indicator identities

fn indicator_identities() -> crate::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_zero = 0.0f64;
    let mut sums_exact = true;
    for mesh in [
        Mesh::criss_cross(square(), 3, 3)?,
        Mesh::criss_cross(Rect::unit(), 6, 4)?,
        refine(&Mesh::criss_cross(square(), 4, 4)?, &[1, 2, 30])?.0,
    ] {
        let sp = FeSpace::from_mesh(&mesh)?;
        let n = mesh.num_vertices();
        for _ in 0..10 {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let (tau, tau_prev) = (rng.gen_range(1e-6..1e-2), rng.gen_range(1e-6..1e-2));
            let eps = rng.gen_range(0.01..0.2);
            let same = Window { space: &sp, eps, t: 1.0, u: [&u, &u, &u], w: [&w, &w, &w], tau, tau_prev };
            let b = time_indicator_window(&same)?;
            worst_zero = b.terms().iter().fold(worst_zero, |m, t| m.max(t.abs()));

            let u1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let u2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let w1: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let w2: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let win = Window { space: &sp, eps, t: 1.0, u: [&u, &u1, &u2], w: [&w, &w1, &w2], tau, tau_prev };
            let b = time_indicator_window(&win)?;
            sums_exact &= b.eta_time == b.terms().iter().sum::<f64>();

            let e = [rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)];
            let s = space_indicator_from(e, vec![1.0; mesh.num_triangles()], tau, tau_prev, eps, Default::default());
            sums_exact &= s.eta_space == s.e_tilde + s.alpha;
        }
    }
    let mut mismatches = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(1..200);
        let eta: Vec<f64> = (0..len)
            .map(|_| if rng.gen_bool(0.1) { 0.5 } else { rng.gen_range(0.0..1.0) })
            .collect();
        let tol_c = rng.gen_range(0.01..0.4);
        let tol_r = rng.gen_range(tol_c + 0.01..0.99);
        let max = eta.iter().copied().fold(0.0, f64::max);
        let (r, c) = mark(&eta, max, tol_r, tol_c)?;
        let mut br = Vec::new();
        let mut bc = Vec::new();
        for (k, &e) in eta.iter().enumerate() {
            if max > 0.0 && e > tol_r * max {
                br.push(k);
            }
            if max > 0.0 && e < tol_c * max {
                bc.push(k);
            }
        }
        mismatches += usize::from(r != br || c != bc);
    }
    Ok(vec![
        Check::at_most("max time term on identical levels", worst_zero, 1e-12),
        Check::new("eta_time and eta_space equal their sums", format!("{sums_exact}"), sums_exact),
        Check::new("mark vs brute force (1000 fields)", format!("{mismatches} mismatches"), mismatches == 0),
    ])
}

// -------------------------------------------------------------- desk runs

/// Example 1 desk run: preset tolerances and dominant-term indicators,
/// `T = 4e-3`.
pub fn example1_desk() -> ProblemSpec {
    let mut p = ProblemSpec::preset("example1").expect("preset");
    p.adapt.t_final = 4e-3;
    p
}

/// Example 1 in residual mode: `T = 5e-5`, two refinement sweeps per step.
pub fn example1_residual_desk() -> ProblemSpec {
    let mut p = example1_desk();
    p.adapt.estimator = EstimatorKind::Residual;
    p.adapt.t_final = 5e-5;
    p.adapt.max_space_iterations = 2;
    p
}

/// Example 2 desk run for the estimator comparison: `T = 1e-4`, three
/// refinement sweeps per step.
pub fn example2_desk(estimator: EstimatorKind) -> ProblemSpec {
    let mut p = ProblemSpec::preset("example2").expect("preset");
    p.adapt.estimator = estimator;
    p.adapt.t_final = 1e-4;
    p.adapt.max_space_iterations = 3;
    p
}

/// Fraction of the smallest-quartile elements (by area) meeting `{|u| < 0.9}`.
pub fn localization_fraction(mesh: &Mesh, u: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..mesh.num_triangles()).collect();
    idx.sort_by(|&a, &b| mesh.area(a).total_cmp(&mesh.area(b)).then(a.cmp(&b)));
    let q = (idx.len() / 4).max(1);
    let hits = idx[..q]
        .iter()
        .filter(|&&t| {
            let v = mesh.triangles()[t].map(|i| u[i]);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lo < 0.9 && hi > -0.9
        })
        .count();
    hits as f64 / q as f64
}

#[derive(Debug, Clone)]
pub struct DeskRun {
    pub initial_energy: f64,
    pub logs: Vec<StepLog>,
    /// Localization fraction of the initial state and of every accepted step.
    pub localization: Vec<f64>,
    /// Wall seconds since the start of the run at each accepted step.
    pub wall: Vec<f64>,
}

struct Probe {
    start: Instant,
    run: DeskRun,
}

impl RunObserver for Probe {
    fn initial(&mut self, state: &SimState, energy: f64) -> Result<(), String> {
        self.run.initial_energy = energy;
        self.run.localization.push(localization_fraction(state.mesh(), state.u()));
        Ok(())
    }

    fn step(&mut self, log: &StepLog, state: &SimState, _: &[f64]) -> Result<(), String> {
        self.run.wall.push(self.start.elapsed().as_secs_f64());
        self.run.localization.push(localization_fraction(state.mesh(), state.u()));
        self.run.logs.push(log.clone());
        Ok(())
    }
}

pub fn desk_run(p: &ProblemSpec) -> crate::Result<DeskRun> {
    let mesh = Mesh::criss_cross(p.domain, p.cells, p.cells)?;
    let mut probe = Probe {
        start: Instant::now(),
        run: DeskRun { initial_energy: 0.0, logs: Vec::new(), localization: Vec::new(), wall: Vec::new() },
    };
    run_adaptive(mesh, &|x, y| p.eval(x, y), p.eps, &p.adapt, &mut probe)?;
    Ok(probe.run)
}

fn shared_example1() -> crate::Result<&'static DeskRun> {
    static RUN: OnceLock<Result<DeskRun, String>> = OnceLock::new();
    RUN.get_or_init(|| desk_run(&example1_desk()).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| crate::Error::Io(std::io::Error::other(e.clone())))
}

fn share(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

fn dominance() -> crate::Result<Vec<Check>> {
    let run = shared_example1()?;
    let n = run.logs.len();
    let theta = run.logs.iter().filter(|l| l.time.dominant() == "theta_u").count();
    let mut leaders = std::collections::BTreeMap::new();
    for l in &run.logs {
        *leaders.entry(l.time.dominant()).or_insert(0) += 1;
    }
    let e_tilde = run.logs.iter().filter(|l| l.e_tilde > l.alpha).count();
    let ratio = run
        .logs
        .iter()
        .map(|l| l.e_tilde / l.alpha)
        .fold(0.0f64, f64::max);
    let res = desk_run(&example1_residual_desk())?;
    let eta1 = res.logs.iter().filter(|l| l.residual_eta1 >= l.residual_eta2).count();
    let lead: Vec<String> = leaders.iter().map(|(k, v)| format!("{k} x{v}")).collect();
    Ok(vec![
        Check::new(
            "theta_u largest time term",
            format!("{:.0}% of {n} steps (>= 90%; leaders {})", 100.0 * share(theta, n), lead.join(", ")),
            n > 0 && share(theta, n) >= 0.9,
        ),
        Check::new(
            "E~ larger space term",
            format!("{:.0}% of {n} steps (>= 90%; max E~/alpha {ratio:.2e})", 100.0 * share(e_tilde, n)),
            n > 0 && share(e_tilde, n) >= 0.9,
        ),
        Check::new(
            "residual eta_1 >= eta_2",
            format!("{:.0}% of {} steps (>= 90%)", 100.0 * share(eta1, res.logs.len()), res.logs.len()),
            !res.logs.is_empty() && share(eta1, res.logs.len()) >= 0.9,
        ),
    ])
}

fn localization() -> crate::Result<Vec<Check>> {
    let run = shared_example1()?;
    let worst = run.localization.iter().copied().fold(1.0f64, f64::min);
    Ok(vec![Check::new(
        "smallest-quartile elements in {|u| < 0.9}",
        format!("min {:.1}% over {} snapshots (>= 70%)", 100.0 * worst, run.localization.len()),
        !run.localization.is_empty() && worst >= 0.7,
    )])
}

fn energy_dissipation() -> crate::Result<Vec<Check>> {
    let run = shared_example1()?;
    let mut prev = run.initial_energy;
    let mut worst = f64::NEG_INFINITY;
    for l in &run.logs {
        worst = worst.max((l.energy - prev) / prev.abs());
        prev = l.energy;
    }
    Ok(vec![Check::new(
        "max relative energy increase",
        format!("{worst:.3e} over {} steps (<= 1e-8)", run.logs.len()),
        !run.logs.is_empty() && worst <= 1e-8,
    )])
}

/// Row of `run` in effect at simulated time `t`.
fn at_time(run: &DeskRun, t: f64) -> Option<usize> {
    run.logs.iter().rposition(|l| l.t <= t * (1.0 + 1e-12))
}

fn economy() -> crate::Result<Vec<Check>> {
    let rec = desk_run(&example2_desk(EstimatorKind::Recovery))?;
    let res = desk_run(&example2_desk(EstimatorKind::Residual))?;
    let t_end = |r: &DeskRun| r.logs.last().map_or(0.0, |l| l.t);
    let t = t_end(&rec).min(t_end(&res));
    let (Some(i), Some(j)) = (at_time(&rec, t), at_time(&res, t)) else {
        return Ok(vec![Check::new("matched time", "no common accepted step", false)]);
    };
    let (a, b) = (&rec.logs[i], &res.logs[j]);
    Ok(vec![
        Check::new(
            "nodes at matched time",
            format!("t = {t:.3e}: recovery {} vs residual {}", a.nodes, b.nodes),
            a.nodes <= b.nodes,
        ),
        Check::new(
            "wall time to matched time",
            format!("recovery {:.2} s vs residual {:.2} s", rec.wall[i], res.wall[j]),
            rec.wall[i] <= res.wall[j],
        ),
    ])
}

// ------------------------------------------------------------------- mesh

fn mesh_machinery() -> crate::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m0 = Mesh::criss_cross(square(), 4, 4)?;
    let bound = 0.5 * m0.min_angle();
    let mut m = m0.clone();
    let mut conform_failures = 0;
    let mut worst_angle = f64::INFINITY;
    for _ in 0..1000 {
        let nt = m.num_triangles();
        if nt < 3000 {
            let k = rng.gen_range(1..=nt.min(20));
            let marked: Vec<usize> = (0..k).map(|_| rng.gen_range(0..nt)).collect();
            m = refine(&m, &marked)?.0;
        }
        let nt = m.num_triangles();
        let marked: Vec<usize> = (0..nt).filter(|_| rng.gen_bool(0.6)).collect();
        m = coarsen(&m, &marked).0;
        conform_failures += usize::from(m.check_conforming().is_err());
        worst_angle = worst_angle.min(m.min_angle());
    }
    let mut fine = m0.clone();
    for _ in 0..3 {
        let all: Vec<usize> = (0..fine.num_triangles()).collect();
        fine = refine(&fine, &all)?.0;
    }
    let refined = fine.num_triangles();
    let mut back = fine;
    loop {
        let all: Vec<usize> = (0..back.num_triangles()).collect();
        let next = coarsen(&back, &all).0;
        if next.num_triangles() == back.num_triangles() {
            break;
        }
        back = next;
    }
    let exact = back.vertices() == m0.vertices() && back.triangles() == m0.triangles();
    Ok(vec![
        Check::new("conformity over 1000 rounds", format!("{conform_failures} failures"), conform_failures == 0),
        Check::new(
            "min angle",
            format!("{:.4} rad (>= {bound:.4})", worst_angle),
            worst_angle >= bound,
        ),
        Check::new(
            "refine-all x3 / coarsen-all round trip",
            format!("{refined} -> {} elements, bit-exact {exact}", back.num_triangles()),
            exact,
        ),
    ])
}

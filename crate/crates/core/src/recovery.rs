//! Superconvergent cluster recovery of P1 gradients and the recovery
//! estimator `‖Gu - ∇u_h‖`.

use crate::fem::{FeFunction, FemError, ValueKind};
use crate::mesh::Mesh;

#[derive(Debug, thiserror::Error)]
pub enum RecoveryError {
    #[error("no well-posed cluster around vertex {0}")]
    DegenerateCluster(usize),
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Nodal recovered gradient, interpolated as a P1 vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredGradient {
    generation: u64,
    values: Vec<[f64; 2]>,
}

impl RecoveredGradient {
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    /// Interleaved `Vector2` function.
    pub fn to_function(&self) -> FeFunction {
        let flat = self.values.iter().flat_map(|g| *g).collect();
        FeFunction::from_parts(self.generation, ValueKind::Vector2, flat)
    }

    /// Pointwise magnitude `|Gu|` at the vertices.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|g| g[0].hypot(g[1])).collect()
    }
}

/// Per-element contributions and their root-sum-square.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryEstimate {
    pub eta_k: Vec<f64>,
    pub global: f64,
}

impl RecoveryEstimate {
    pub fn eta_max(&self) -> f64 {
        self.eta_k.iter().copied().fold(0.0, f64::max)
    }
}

const COLLINEAR_TOL: f64 = 1e-10;

pub fn scr_recover(mesh: &Mesh, u: &FeFunction) -> Result<RecoveredGradient, RecoveryError> {
    u.check_scalar_on(mesh)?;
    Ok(RecoveredGradient {
        generation: mesh.generation(),
        values: recover_values(mesh, u.values())?,
    })
}

pub(crate) fn recover_values(mesh: &Mesh, u: &[f64]) -> Result<Vec<[f64; 2]>, RecoveryError> {
    let n = mesh.num_vertices();
    let pts = mesh.vertices();
    let mut in_cluster = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for z in 0..n {
        let mut cluster = mesh.vertex_neighbors(z);
        cluster.push(z);
        for &v in &cluster {
            in_cluster[v] = true;
        }
        let g = loop {
            if let Some(g) = fit(pts, u, &cluster) {
                break g;
            }
            if cluster.len() == n {
                for &v in &cluster {
                    in_cluster[v] = false;
                }
                return Err(RecoveryError::DegenerateCluster(z));
            }
            let mut ring = Vec::new();
            for &v in &cluster {
                for w in mesh.vertex_neighbors(v) {
                    if !in_cluster[w] {
                        in_cluster[w] = true;
                        ring.push(w);
                    }
                }
            }
            cluster.extend(ring);
        };
        for &v in &cluster {
            in_cluster[v] = false;
        }
        out.push(g);
    }
    Ok(out)
}

/// Least-squares slope of `a + b(x - xc) + c(y - yc)` over the cluster, or
/// `None` when the points are (nearly) collinear.
fn fit(pts: &[[f64; 2]], u: &[f64], cluster: &[usize]) -> Option<[f64; 2]> {
    let m = cluster.len() as f64;
    let (mut xc, mut yc, mut uc) = (0.0, 0.0, 0.0);
    for &v in cluster {
        xc += pts[v][0];
        yc += pts[v][1];
        uc += u[v];
    }
    xc /= m;
    yc /= m;
    uc /= m;
    let (mut sxx, mut sxy, mut syy, mut sxu, mut syu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &v in cluster {
        let dx = pts[v][0] - xc;
        let dy = pts[v][1] - yc;
        let du = u[v] - uc;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxu += dx * du;
        syu += dy * du;
    }
    let det = sxx * syy - sxy * sxy;
    let tr = sxx + syy;
    if !(det > COLLINEAR_TOL * tr * tr) {
        return None;
    }
    Some([(syy * sxu - sxy * syu) / det, (sxx * syu - sxy * sxu) / det])
}

pub fn recovery_estimator(mesh: &Mesh, u: &FeFunction) -> Result<RecoveryEstimate, RecoveryError> {
    u.check_scalar_on(mesh)?;
    estimate_values(mesh, u.values())
}

pub(crate) fn estimate_values(mesh: &Mesh, u: &[f64]) -> Result<RecoveryEstimate, RecoveryError> {
    let g = recover_values(mesh, u)?;
    let eta_k = element_errors(mesh, u, &g);
    let global = eta_k.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(RecoveryEstimate { eta_k, global })
}

/// `‖G - ∇u_h‖_K` for every element; exact for a P1 field minus a constant.
pub(crate) fn element_errors(mesh: &Mesh, u: &[f64], g: &[[f64; 2]]) -> Vec<f64> {
    (0..mesh.num_triangles())
        .map(|t| {
            let tri = mesh.triangles()[t];
            let grad = p1_gradient(mesh, u, t);
            let area = mesh.area(t);
            let mut s = 0.0;
            for c in 0..2 {
                let [a, b, d] = tri.map(|v| g[v][c] - grad[c]);
                s += a * a + b * b + d * d + a * b + b * d + d * a;
            }
            (area / 6.0 * s).max(0.0).sqrt()
        })
        .collect()
}

fn p1_gradient(mesh: &Mesh, u: &[f64], t: usize) -> [f64; 2] {
    let [p0, p1, p2] = mesh.triangle_points(t);
    let tri = mesh.triangles()[t];
    let (x1, y1) = (p1[0] - p0[0], p1[1] - p0[1]);
    let (x2, y2) = (p2[0] - p0[0], p2[1] - p0[1]);
    let det = x1 * y2 - x2 * y1;
    let du1 = u[tri[1]] - u[tri[0]];
    let du2 = u[tri[2]] - u[tri[0]];
    [(du1 * y2 - du2 * y1) / det, (x1 * du2 - x2 * du1) / det]
}

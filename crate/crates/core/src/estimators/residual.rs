use super::EstimatorError;
use crate::fem::quadrature::DEGREE4;
use crate::fem::Nonlinearity;
use crate::scheme::{Field, SimState, Window};

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBreakdown {
    pub eta_k1: Vec<f64>,
    pub eta_k2: Vec<f64>,
    pub eta: f64,
}

impl ResidualBreakdown {
    /// `sqrt(Σ η_{K,1}²)`.
    pub fn eta1(&self) -> f64 {
        self.eta_k1.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    /// `sqrt(η_{K,1}² + η_{K,2}²)` per element.
    pub fn combined(&self) -> Vec<f64> {
        self.eta_k1.iter().zip(&self.eta_k2).map(|(a, b)| a.hypot(*b)).collect()
    }
}

/// Element and edge residuals of the reconstructed solution at `t`.
pub fn residual_indicator_window(win: &Window, t: f64) -> Result<ResidualBreakdown, EstimatorError> {
    let sp = win.space;
    let mesh = sp.mesh();
    let eps = win.eps;
    let (u, ut) = win.reconstruction(Field::U, t)?;
    let (w, _) = win.reconstruction(Field::W, t)?;
    let r1 = sp.element_l2_norms(&ut);
    let nt = mesh.num_triangles();
    let mut e1 = Vec::with_capacity(nt);
    let mut e2 = Vec::with_capacity(nt);
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let h = mesh.diameter(k);
        let ul = tri.map(|v| u[v]);
        let wl = tri.map(|v| w[v]);
        let mut s = 0.0;
        for (q, b) in &DEGREE4 {
            let uq = b[0] * ul[0] + b[1] * ul[1] + b[2] * ul[2];
            let wq = b[0] * wl[0] + b[1] * wl[1] + b[2] * wl[2];
            let r = Nonlinearity::DoubleWell.value(uq) / (eps * eps) - wq / eps;
            s += q * r * r;
        }
        e1.push(h * r1[k]);
        e2.push(h * (sp.area(k) * s).max(0.0).sqrt());
    }
    let pts = mesh.vertices();
    for edge in mesh.edges() {
        let [a, b] = edge.vertices;
        let (dx, dy) = (pts[b][0] - pts[a][0], pts[b][1] - pts[a][1]);
        let len = dx.hypot(dy);
        let n = [dy / len, -dx / len];
        let k1 = edge.triangles[0];
        let gw = sp.gradient(&w, k1);
        let gu = sp.gradient(&u, k1);
        let (jw, ju, weight) = if edge.boundary {
            (gw[0] * n[0] + gw[1] * n[1], gu[0] * n[0] + gu[1] * n[1], 1.0)
        } else {
            let k2 = edge.triangles[1];
            let gw2 = sp.gradient(&w, k2);
            let gu2 = sp.gradient(&u, k2);
            (
                (gw[0] - gw2[0]) * n[0] + (gw[1] - gw2[1]) * n[1],
                (gu[0] - gu2[0]) * n[0] + (gu[1] - gu2[1]) * n[1],
                0.5,
            )
        };
        // (weight · h · ‖J‖²_{L²(τ)})^{1/2} with J constant on the edge
        let cw = (weight * len * len * jw * jw).sqrt();
        let cu = (weight * len * len * ju * ju).sqrt();
        for &k in &edge.triangles {
            if k < mesh.num_triangles() {
                e1[k] += cw;
                e2[k] += cu;
            }
        }
    }
    let eta = e1.iter().zip(&e2).map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
    Ok(ResidualBreakdown {
        eta_k1: e1,
        eta_k2: e2,
        eta,
    })
}

/// Residual estimator of the accepted window at `t ∈ (tₙ₋₁, tₙ]`.
pub fn residual_indicator(state: &SimState, t: f64) -> Result<ResidualBreakdown, EstimatorError> {
    residual_indicator_window(&state.window(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::FeSpace;
    use crate::mesh::{Mesh, Rect};
    use crate::scheme::init_state;
    use std::sync::Arc;

    fn window<'a>(sp: &'a FeSpace, u: &'a [f64], w: &'a [f64], eps: f64) -> Window<'a> {
        Window {
            space: sp,
            eps,
            t: 1.0,
            u: [u, u, u],
            w: [w, w, w],
            tau: 0.1,
            tau_prev: 0.1,
        }
    }

    #[test]
    fn pure_state_has_zero_residual() {
        let m = Arc::new(Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 4, 4).unwrap());
        let s = init_state(m, |_, _| 1.0, 0.01, 1e-3).unwrap();
        let r = residual_indicator(&s, s.time()).unwrap();
        assert!(r.eta < 1e-8, "{}", r.eta);
    }

    #[test]
    fn linear_potential_has_no_interior_jumps() {
        let m = Mesh::criss_cross(Rect::unit(), 3, 3).unwrap();
        let sp = FeSpace::from_mesh(&m).unwrap();
        let u = vec![1.0; m.num_vertices()];
        let w: Vec<f64> = m.vertices().iter().map(|p| 2.0 * p[0] - p[1]).collect();
        let r = residual_indicator_window(&window(&sp, &u, &w, 1.0), 1.0).unwrap();
        // only boundary fluxes remain: |∇w·n| is 2 on x-sides and 1 on y-sides
        for k in 0..m.num_triangles() {
            let mut expect = 0.0;
            for e in m.triangle_edges(k) {
                let edge = &m.edges()[e];
                if edge.boundary {
                    let [a, b] = edge.vertices;
                    let vertical = m.vertices()[a][0] == m.vertices()[b][0];
                    expect += m.edge_length(e) * if vertical { 2.0 } else { 1.0 };
                }
            }
            let h = m.diameter(k);
            let r_el = h * sp.element_l2_norms(&w)[k];
            assert!((r.eta_k1[k] - expect).abs() < 1e-12, "{k}");
            assert!((r.eta_k2[k] - r_el).abs() < 1e-12);
        }
    }

    #[test]
    fn hat_jump_on_two_triangle_square() {
        let m = Mesh::unit_square_two_triangles();
        let sp = FeSpace::from_mesh(&m).unwrap();
        let u = vec![1.0; 4];
        // w = 1 at one off-diagonal corner and 0 elsewhere
        let e = (0..m.edges().len()).find(|&e| !m.edges()[e].boundary).unwrap();
        let [a, b] = m.edges()[e].vertices;
        let apex = (0..4).find(|&v| v != a && v != b).unwrap();
        let mut w = vec![0.0; 4];
        w[apex] = 1.0;
        let r = residual_indicator_window(&window(&sp, &u, &w, 1.0), 1.0).unwrap();
        // gradient of the hat has length √2 normal to the diagonal, zero on the other side
        let jump_term = 2.0f64.sqrt();
        let k_apex = (0..2).find(|&k| m.triangles()[k].contains(&apex)).unwrap();
        let other = 1 - k_apex;
        // boundary legs of the apex triangle carry |∂w/∂n| = 1 each over length 1
        assert!((r.eta_k1[other] - jump_term).abs() < 1e-12);
        assert!((r.eta_k1[k_apex] - (jump_term + 2.0)).abs() < 1e-12);
    }
}

use super::EstimatorError;
use crate::recovery::estimate_values;
use crate::scheme::SimState;

/// Weights of the composite recovery term and of `α_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceConstants {
    pub c0: f64,
    pub c: f64,
}

impl Default for SpaceConstants {
    fn default() -> Self {
        SpaceConstants { c0: 1.0, c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceIndicatorBreakdown {
    /// `ℰ_u` at levels `n`, `n-1`, `n-2`, each on its own mesh.
    pub recovery: [f64; 3],
    pub e_tilde: f64,
    pub alpha: f64,
    pub eta_space: f64,
    /// `‖Gu - ∇u_h‖_K` of the newest level on the current mesh.
    pub eta_k: Vec<f64>,
    pub eta_max: f64,
}

/// `Ẽ_u` from the three recovery estimates and step sizes.
pub fn composite_recovery(tau: f64, tau_prev: f64, e: [f64; 3], c0: f64) -> f64 {
    let [e0, e1, e2] = e;
    let s01 = e0 + e1;
    let s12 = e1 + e2;
    let ts = tau + tau_prev;
    let c2 = c0 * c0;
    let a = c2 / 3.0 * tau * (e0 * e0 + e1 * e1 + e0 * e1);
    let b = c2 * (tau * tau * tau_prev * s01 + tau.powi(3) * s12) / (6.0 * tau_prev * ts) * s01;
    let q = tau_prev * s01 + tau * s12;
    let c = c2 * tau.powi(3) * q * q / (30.0 * tau_prev * tau_prev * ts * ts);
    (a + b + c).max(0.0).sqrt()
}

pub fn space_indicator_from(
    recovery: [f64; 3],
    eta_k: Vec<f64>,
    tau: f64,
    tau_prev: f64,
    eps: f64,
    k: SpaceConstants,
) -> SpaceIndicatorBreakdown {
    let e_tilde = composite_recovery(tau, tau_prev, recovery, k.c0);
    let alpha = k.c * recovery.iter().sum::<f64>() / eps;
    let eta_max = eta_k.iter().copied().fold(0.0, f64::max);
    SpaceIndicatorBreakdown {
        recovery,
        e_tilde,
        alpha,
        eta_space: e_tilde + alpha,
        eta_k,
        eta_max,
    }
}

pub fn space_indicator(state: &SimState, k: SpaceConstants) -> Result<SpaceIndicatorBreakdown, EstimatorError> {
    let lv = state.levels();
    let recovery = [lv[0].recovery_estimate()?, lv[1].recovery_estimate()?, lv[2].recovery_estimate()?];
    let eta_k = estimate_values(state.mesh(), state.u())?.eta_k;
    Ok(space_indicator_from(recovery, eta_k, state.tau(), state.tau_prev(), state.eps(), k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Mesh, Rect};
    use crate::scheme::init_state;
    use std::sync::Arc;

    #[test]
    fn symmetric_inputs_give_hand_value() {
        let e = composite_recovery(0.1, 0.1, [1.0; 3], 1.0);
        assert!((e * e - 0.18).abs() < 1e-15);
        assert!((e - 0.42426).abs() < 1e-5);
    }

    #[test]
    fn alpha_is_scaled_sum() {
        let b = space_indicator_from([0.1, 0.2, 0.3], vec![1.0, 4.0], 0.1, 0.1, 0.01, SpaceConstants::default());
        assert!((b.alpha - 60.0).abs() < 1e-12);
        assert_eq!(b.eta_space, b.e_tilde + b.alpha);
        assert_eq!(b.eta_max, 4.0);
    }

    #[test]
    fn linear_levels_vanish() {
        let m = Arc::new(Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 4, 4).unwrap());
        let s = init_state(m, |x, y| 0.2 * x - 0.1 * y, 0.1, 1e-3).unwrap();
        let b = space_indicator(&s, SpaceConstants::default()).unwrap();
        assert!(b.e_tilde < 1e-12 && b.alpha < 1e-10 && b.eta_max < 1e-12);
    }
}

use std::sync::Arc;

use chafem::estimators::{mark, space_indicator_from};
use chafem::fem::FeSpace;
use chafem::mesh::{Mesh, Rect};
use chafem::scheme::{cn_solve, energy_values, init_state, NewtonOptions};
use proptest::prelude::*;

fn mesh() -> Arc<Mesh> {
    Arc::new(Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 6, 6).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cn_step_conserves_mass(
        cx in -0.5f64..0.5, cy in -0.5f64..0.5, r in 0.2f64..0.6,
        eps in 0.05f64..0.3, tau in 1e-6f64..1e-3,
    ) {
        let s = init_state(mesh(), |x, y| (((x - cx).powi(2) + (y - cy).powi(2) - r * r) / eps).tanh(), eps, tau)
            .unwrap();
        let (u, _, _) = cn_solve(s.space(), eps, tau, s.u(), s.w(), &NewtonOptions::default()).unwrap();
        let sp = s.space();
        prop_assert!((sp.integral(&u) - sp.integral(s.u())).abs() <= 1e-11);
    }

    #[test]
    fn cn_step_does_not_raise_energy_of_smooth_data(
        a in 0.1f64..0.9, k in 1.0f64..3.0, eps in 0.1f64..0.3, tau in 1e-6f64..1e-4,
    ) {
        let s = init_state(mesh(), |x, y| a * (k * x).sin() * (k * y).cos(), eps, tau).unwrap();
        let (u, _, _) = cn_solve(s.space(), eps, tau, s.u(), s.w(), &NewtonOptions::default()).unwrap();
        let sp: &FeSpace = s.space();
        let (e0, e1) = (energy_values(sp, s.u(), eps), energy_values(sp, &u, eps));
        prop_assert!(e1 <= e0 * (1.0 + 1e-8), "{e0} -> {e1}");
    }

    #[test]
    fn space_indicator_is_its_sum(
        e in prop::array::uniform3(0.0f64..10.0),
        tau in 1e-7f64..1e-2, tau_prev in 1e-7f64..1e-2, eps in 1e-3f64..1.0,
    ) {
        let s = space_indicator_from(e, vec![0.5, 2.0], tau, tau_prev, eps, Default::default());
        prop_assert_eq!(s.eta_space, s.e_tilde + s.alpha);
        prop_assert!(s.e_tilde >= 0.0 && s.alpha >= 0.0);
        prop_assert_eq!(s.eta_max, 2.0);
    }

    #[test]
    fn marked_sets_are_disjoint_and_exact(
        eta in prop::collection::vec(0.0f64..1.0, 1..100),
        tol_c in 0.01f64..0.4, gap in 0.01f64..0.5,
    ) {
        let tol_r = (tol_c + gap).min(0.99);
        let max = eta.iter().copied().fold(0.0, f64::max);
        let (r, c) = mark(&eta, max, tol_r, tol_c).unwrap();
        prop_assert!(r.iter().all(|k| !c.contains(k)));
        for (k, &v) in eta.iter().enumerate() {
            prop_assert_eq!(r.contains(&k), max > 0.0 && v > tol_r * max);
            prop_assert_eq!(c.contains(&k), max > 0.0 && v < tol_c * max);
        }
    }
}

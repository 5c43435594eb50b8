use chafem::fem::{l2_norm, FeFunction};
use chafem::mesh::{coarsen, refine, transfer, Mesh, Rect};
use proptest::prelude::*;

fn base(n: usize) -> Mesh {
    Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), n, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refine_then_coarsen_stays_conforming(
        n in 1usize..5,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..30),
        drop in prop::collection::vec(any::<bool>(), 0..400),
    ) {
        let m0 = base(n);
        let marked: Vec<usize> = picks.iter().map(|i| i.index(m0.num_triangles())).collect();
        let (m1, _) = refine(&m0, &marked).unwrap();
        prop_assert!(m1.check_conforming().is_ok());
        prop_assert!(m1.num_triangles() > m0.num_triangles());
        prop_assert!((m1.total_area() - m0.total_area()).abs() < 1e-12);
        prop_assert!(m1.min_angle() >= 0.5 * m0.min_angle());

        let cmarked: Vec<usize> = (0..m1.num_triangles())
            .filter(|&t| drop.get(t).copied().unwrap_or(true))
            .collect();
        let (m2, _) = coarsen(&m1, &cmarked);
        prop_assert!(m2.check_conforming().is_ok());
        prop_assert!(m2.num_triangles() >= m0.num_triangles());
        prop_assert!(m2.num_triangles() <= m1.num_triangles());
        prop_assert!((m2.total_area() - m0.total_area()).abs() < 1e-12);
    }

    #[test]
    fn refinement_transfer_is_exact_for_linear_data(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..10),
    ) {
        let m0 = base(3);
        let marked: Vec<usize> = picks.iter().map(|i| i.index(m0.num_triangles())).collect();
        let (m1, map) = refine(&m0, &marked).unwrap();
        let f = FeFunction::scalar_from_fn(&m0, |x, y| a * x + b * y + c);
        let g = transfer(&f, &map).unwrap();
        let exact = FeFunction::scalar_from_fn(&m1, |x, y| a * x + b * y + c);
        let diff: Vec<f64> = g.values().iter().zip(exact.values()).map(|(p, q)| p - q).collect();
        let d = FeFunction::scalar(&m1, diff).unwrap();
        prop_assert!(l2_norm(&m1, &d).unwrap() < 1e-13);
    }
}

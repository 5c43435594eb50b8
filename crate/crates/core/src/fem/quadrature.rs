//! Symmetric quadrature on triangles.

/// Six-point rule exact for polynomials of degree 4, as
/// `(weight, barycentric coordinates)` with weights summing to 1.
pub const DEGREE4: [(f64, [f64; 3]); 6] = {
    const W1: f64 = 0.223_381_589_678_011_465_944;
    const W2: f64 = 0.109_951_743_655_321_867_389;
    const A1: f64 = 0.445_948_490_915_964_886_319;
    const B1: f64 = 0.108_103_018_168_070_227_363;
    const A2: f64 = 0.091_576_213_509_770_743_460;
    const B2: f64 = 0.816_847_572_980_458_513_080;
    [
        (W1, [A1, A1, B1]),
        (W1, [A1, B1, A1]),
        (W1, [B1, A1, A1]),
        (W2, [A2, A2, B2]),
        (W2, [A2, B2, A2]),
        (W2, [B2, A2, A2]),
    ]
};

/// Maps barycentric coordinates to a physical point.
pub fn point(p: &[[f64; 2]; 3], bary: &[f64; 3]) -> [f64; 2] {
    [
        bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
        bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
    ]
}

/// Integrates `f` over the triangle with corners `p` and area `area`.
pub fn integrate<F: FnMut([f64; 2]) -> f64>(p: &[[f64; 2]; 3], area: f64, mut f: F) -> f64 {
    let mut acc = 0.0;
    for (w, b) in &DEGREE4 {
        acc += w * f(point(p, b));
    }
    acc * area
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    // Closed form integral of x^a y^b over the triangle via the formula for
    // monomials in barycentric coordinates: int l1^i l2^j l3^k = 2|K| i!j!k!/(i+j+k+2)!
    fn exact(p: &[[f64; 2]; 3], area: f64, a: u32, b: u32) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        // x = sum l_i x_i; expand x^a y^b with multinomials.
        let mut total = 0.0;
        for i1 in 0..=a {
            for j1 in 0..=(a - i1) {
                let k1 = a - i1 - j1;
                let cx = fact(a) / (fact(i1) * fact(j1) * fact(k1))
                    * p[0][0].powi(i1 as i32)
                    * p[1][0].powi(j1 as i32)
                    * p[2][0].powi(k1 as i32);
                for i2 in 0..=b {
                    for j2 in 0..=(b - i2) {
                        let k2 = b - i2 - j2;
                        let cy = fact(b) / (fact(i2) * fact(j2) * fact(k2))
                            * p[0][1].powi(i2 as i32)
                            * p[1][1].powi(j2 as i32)
                            * p[2][1].powi(k2 as i32);
                        let (i, j, k) = (i1 + i2, j1 + j2, k1 + k2);
                        let mono = 2.0 * area * fact(i) * fact(j) * fact(k) / fact(i + j + k + 2);
                        total += cx * cy * mono;
                    }
                }
            }
        }
        total
    }

    #[test]
    fn weights_sum_to_one() {
        let s: f64 = DEGREE4.iter().map(|(w, _)| w).sum();
        assert!((s - 1.0).abs() < 1e-15);
        for (_, b) in &DEGREE4 {
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_for_degree_four_on_random_triangles() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 20 {
            let p: [[f64; 2]; 3] = std::array::from_fn(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
            if area.abs() < 0.05 {
                continue;
            }
            let area = area.abs();
            for a in 0..=4u32 {
                for b in 0..=(4 - a) {
                    let q = integrate(&p, area, |x| x[0].powi(a as i32) * x[1].powi(b as i32));
                    let e = exact(&p, area, a, b);
                    let scale = e.abs().max(area);
                    assert!((q - e).abs() <= 1e-13 * scale, "x^{a} y^{b}: {q} vs {e}");
                }
            }
            checked += 1;
        }
    }
}

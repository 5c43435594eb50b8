use std::sync::{Arc, OnceLock};

use super::quadrature::{self, DEGREE4};
use super::sparse::{dot, CsrMatrix, LuPattern, SpdSolver};
use super::{FeFunction, FemError, Nonlinearity, ValueKind};
use crate::mesh::Mesh;

/// The P1 space on one mesh with its mass and stiffness matrices and cached
/// factorizations.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
    slots: Vec<[usize; 9]>,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    mass_solver: OnceLock<SpdSolver>,
    neumann_solver: OnceLock<SpdSolver>,
    block_lu: OnceLock<LuPattern>,
}

fn element_geometry(mesh: &Mesh, t: usize) -> Result<(f64, [[f64; 2]; 3]), FemError> {
    let p = mesh.triangle_points(t);
    let area = mesh.area(t);
    if !(area > 0.0) || !area.is_finite() {
        return Err(FemError::Degenerate(t, area));
    }
    let s = 0.5 / area;
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        g[i] = [(a[1] - b[1]) * s, (b[0] - a[0]) * s];
    }
    Ok((area, g))
}

fn sparsity(mesh: &Mesh) -> (Vec<usize>, Vec<usize>) {
    let mut row_ptr = Vec::with_capacity(mesh.num_vertices() + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for v in 0..mesh.num_vertices() {
        let mut cols = mesh.vertex_neighbors(v);
        let pos = cols.partition_point(|&c| c < v);
        cols.insert(pos, v);
        col_idx.extend(cols);
        row_ptr.push(col_idx.len());
    }
    (row_ptr, col_idx)
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self, FemError> {
        let nt = mesh.num_triangles();
        let mut areas = Vec::with_capacity(nt);
        let mut grads = Vec::with_capacity(nt);
        for t in 0..nt {
            let (a, g) = element_geometry(&mesh, t)?;
            areas.push(a);
            grads.push(g);
        }
        let (row_ptr, col_idx) = sparsity(&mesh);
        let n = mesh.num_vertices();
        let nnz = col_idx.len();
        let mut mass = CsrMatrix::new(n, row_ptr, col_idx, vec![0.0; nnz])?;
        let mut slots = Vec::with_capacity(nt);
        for tri in mesh.triangles() {
            let mut s = [0usize; 9];
            for i in 0..3 {
                for j in 0..3 {
                    s[3 * i + j] = mass.find(tri[i], tri[j]).expect("element pair in pattern");
                }
            }
            slots.push(s);
        }
        let mut stiffness = mass.clone();
        {
            let mv = mass.values_mut();
            for t in 0..nt {
                let a = areas[t];
                for i in 0..3 {
                    for j in 0..3 {
                        mv[slots[t][3 * i + j]] += if i == j { a / 6.0 } else { a / 12.0 };
                    }
                }
            }
        }
        {
            let kv = stiffness.values_mut();
            for t in 0..nt {
                let (a, g) = (areas[t], &grads[t]);
                for i in 0..3 {
                    for j in 0..3 {
                        kv[slots[t][3 * i + j]] += a * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    }
                }
            }
        }
        debug_assert!(mass.asymmetry() <= 1e-12 * mass.max_abs());
        debug_assert!(stiffness.asymmetry() <= 1e-12 * stiffness.max_abs());
        debug_assert!(stiffness
            .row_sums()
            .iter()
            .all(|s| s.abs() <= 1e-12 * stiffness.max_abs().max(1.0)));
        Ok(FeSpace {
            mesh,
            areas,
            grads,
            slots,
            mass,
            stiffness,
            mass_solver: OnceLock::new(),
            neumann_solver: OnceLock::new(),
            block_lu: OnceLock::new(),
        })
    }

    pub fn from_mesh(mesh: &Mesh) -> Result<Self, FemError> {
        FeSpace::new(Arc::new(mesh.clone()))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    /// Gradients of the three local hat functions of triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.grads[t]
    }

    /// Constant gradient of the P1 function `v` on triangle `t`.
    pub fn gradient(&self, v: &[f64], t: usize) -> [f64; 2] {
        let tri = self.mesh.triangles()[t];
        let g = &self.grads[t];
        let mut out = [0.0; 2];
        for i in 0..3 {
            out[0] += v[tri[i]] * g[i][0];
            out[1] += v[tri[i]] * g[i][1];
        }
        out
    }

    fn check_len(&self, v: &[f64]) -> Result<(), FemError> {
        if v.len() != self.num_dofs() {
            return Err(FemError::LengthMismatch {
                expected: self.num_dofs(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Fails unless `f` is a scalar function on this space's mesh.
    pub fn check(&self, f: &FeFunction) -> Result<(), FemError> {
        f.check_scalar_on(&self.mesh)
    }

    pub fn function(&self, values: Vec<f64>) -> Result<FeFunction, FemError> {
        FeFunction::new(&self.mesh, ValueKind::Scalar, values)
    }

    fn mass_solver(&self) -> Result<&SpdSolver, FemError> {
        if let Some(s) = self.mass_solver.get() {
            return Ok(s);
        }
        let s = SpdSolver::new(self.mass.clone())?;
        Ok(self.mass_solver.get_or_init(|| s))
    }

    /// Stiffness matrix with the first vertex pinned: its row and column are
    /// replaced by the identity, keeping the sparsity pattern.
    fn neumann_solver(&self) -> Result<&SpdSolver, FemError> {
        if let Some(s) = self.neumann_solver.get() {
            return Ok(s);
        }
        let mut k = self.stiffness.clone();
        let n = k.dim();
        let zero_slots: Vec<(usize, f64)> = (0..n)
            .flat_map(|i| {
                let row_start = k.row_ptr()[i];
                k.col_idx()[row_start..k.row_ptr()[i + 1]]
                    .iter()
                    .enumerate()
                    .filter(move |&(_, &j)| i == 0 || j == 0)
                    .map(move |(off, &j)| (row_start + off, if i == j { 1.0 } else { 0.0 }))
            })
            .collect();
        let kv = k.values_mut();
        for (slot, v) in zero_slots {
            kv[slot] = v;
        }
        let s = SpdSolver::new(k)?;
        Ok(self.neumann_solver.get_or_init(|| s))
    }

    /// Solves `M x = b`.
    pub fn solve_mass(&self, b: &[f64]) -> Result<Vec<f64>, FemError> {
        self.check_len(b)?;
        self.mass_solver()?.solve(b)
    }

    /// Solves `K z = b` for `b` orthogonal to constants, returning the
    /// solution vanishing at vertex 0.
    pub fn solve_neumann(&self, b: &[f64]) -> Result<Vec<f64>, FemError> {
        self.check_len(b)?;
        let mut rhs = b.to_vec();
        rhs[0] = 0.0;
        self.neumann_solver()?.solve(&rhs)
    }

    /// `∫ v`.
    pub fn integral(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            acc += self.areas[t] * (v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0;
        }
        acc
    }

    /// The discrete Laplacian `A v = M⁻¹ K v`.
    pub fn laplacian(&self, v: &[f64]) -> Result<Vec<f64>, FemError> {
        self.check_len(v)?;
        self.solve_mass(&self.stiffness.mul_vec(v))
    }

    /// Load vector `∫ f φᵢ` of a pointwise field.
    pub fn load<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut b = vec![0.0; self.num_dofs()];
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let p = self.mesh.triangle_points(t);
            for (w, bary) in &DEGREE4 {
                let x = quadrature::point(&p, bary);
                let fx = w * self.areas[t] * f(x[0], x[1]);
                for i in 0..3 {
                    b[tri[i]] += fx * bary[i];
                }
            }
        }
        b
    }

    /// L² projection of a pointwise field.
    pub fn project<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Vec<f64>, FemError> {
        self.solve_mass(&self.load(f))
    }

    /// `bᵢ = ∫ g(u_h) φᵢ`, exact for cubic `g`.
    pub fn nonlinear_load(&self, u: &[f64], g: Nonlinearity) -> Result<Vec<f64>, FemError> {
        self.check_len(u)?;
        let mut b = vec![0.0; self.num_dofs()];
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let ul = tri.map(|v| u[v]);
            for (w, bary) in &DEGREE4 {
                let uq = bary[0] * ul[0] + bary[1] * ul[1] + bary[2] * ul[2];
                let gq = w * self.areas[t] * g.value(uq);
                for i in 0..3 {
                    b[tri[i]] += gq * bary[i];
                }
            }
        }
        Ok(b)
    }

    /// `P g(u_h)`.
    pub fn project_nonlinear(&self, u: &[f64], g: Nonlinearity) -> Result<Vec<f64>, FemError> {
        self.solve_mass(&self.nonlinear_load(u, g)?)
    }

    /// Values of `Dᵢⱼ = ∫ g'(u_h) φᵢ φⱼ` over the common sparsity pattern.
    pub fn nonlinear_jacobian(&self, u: &[f64], g: Nonlinearity) -> Vec<f64> {
        let mut d = vec![0.0; self.mass.nnz()];
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let ul = tri.map(|v| u[v]);
            let s = &self.slots[t];
            for (w, bary) in &DEGREE4 {
                let uq = bary[0] * ul[0] + bary[1] * ul[1] + bary[2] * ul[2];
                let gq = w * self.areas[t] * g.derivative(uq);
                for i in 0..3 {
                    for j in 0..3 {
                        d[s[3 * i + j]] += gq * bary[i] * bary[j];
                    }
                }
            }
        }
        d
    }

    /// Solves the 2x2 block system
    /// `[[a00 M, a01 K], [a10 K + a11d D, a11 M]]` with `D` given by its
    /// pattern values. Rows are `(u, w)` stacked.
    pub(crate) fn solve_block(
        &self,
        coef: BlockCoefficients,
        d: &[f64],
        rhs: &[f64],
    ) -> Result<Vec<f64>, FemError> {
        let n = self.num_dofs();
        let rp = self.mass.row_ptr();
        let ci = self.mass.col_idx();
        let mv = self.mass.values();
        let kv = self.stiffness.values();
        let mut row_ptr = Vec::with_capacity(2 * n + 1);
        let mut col_idx = Vec::with_capacity(4 * ci.len());
        let mut vals = Vec::with_capacity(4 * ci.len());
        row_ptr.push(0);
        for block_row in 0..2 {
            for i in 0..n {
                let r = rp[i]..rp[i + 1];
                for k in r.clone() {
                    col_idx.push(ci[k]);
                    vals.push(if block_row == 0 {
                        coef.uu * mv[k]
                    } else {
                        coef.wu_k * kv[k] + coef.wu_d * d[k]
                    });
                }
                for k in r {
                    col_idx.push(ci[k] + n);
                    vals.push(if block_row == 0 { coef.uw * kv[k] } else { coef.ww * mv[k] });
                }
                row_ptr.push(col_idx.len());
            }
        }
        let a = CsrMatrix::new(2 * n, row_ptr, col_idx, vals)?;
        if self.block_lu.get().is_none() {
            let lu = LuPattern::new(&a)?;
            let _ = self.block_lu.set(lu);
        }
        self.block_lu.get().expect("initialized above").solve(&a, rhs)
    }

    /// M-weighted mean `∫ v / |Ω|`.
    pub fn mean(&self, v: &[f64]) -> f64 {
        self.integral(v) / self.mesh.total_area()
    }

    /// Discrete `‖·‖₋₁`: the energy norm of the zero-mean Neumann solve.
    pub fn neg_norm(&self, v: &[f64]) -> Result<f64, FemError> {
        self.check_len(v)?;
        let m = self.mean(v);
        let centered: Vec<f64> = v.iter().map(|x| x - m).collect();
        let rhs = self.mass.mul_vec(&centered);
        let z = self.solve_neumann(&rhs)?;
        Ok(self.stiffness.bilinear(&z, &z).max(0.0).sqrt())
    }

    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.mass.bilinear(v, v).max(0.0).sqrt()
    }

    pub fn h1_seminorm(&self, v: &[f64]) -> f64 {
        (0..self.mesh.num_triangles())
            .map(|t| {
                let g = self.gradient(v, t);
                self.areas[t] * (g[0] * g[0] + g[1] * g[1])
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `‖v‖_{L²(K)}` for every element.
    pub fn element_l2_norms(&self, v: &[f64]) -> Vec<f64> {
        self.mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, tri)| {
                let [a, b, c] = tri.map(|i| v[i]);
                let s = a * a + b * b + c * c + a * b + b * c + c * a;
                (self.areas[t] / 6.0 * s).max(0.0).sqrt()
            })
            .collect()
    }

    pub fn mass_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(a, &self.mass.mul_vec(b))
    }
}

/// Scalar weights of the Newton block matrix.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockCoefficients {
    pub uu: f64,
    pub uw: f64,
    pub wu_k: f64,
    pub wu_d: f64,
    pub ww: f64,
}

pub fn assemble_mass(mesh: &Mesh) -> Result<CsrMatrix, FemError> {
    Ok(FeSpace::from_mesh(mesh)?.mass)
}

pub fn assemble_stiffness(mesh: &Mesh) -> Result<CsrMatrix, FemError> {
    Ok(FeSpace::from_mesh(mesh)?.stiffness)
}

pub fn assemble_nonlinear_load(
    mesh: &Mesh,
    u: &FeFunction,
    g: Nonlinearity,
) -> Result<Vec<f64>, FemError> {
    u.check_scalar_on(mesh)?;
    FeSpace::from_mesh(mesh)?.nonlinear_load(u.values(), g)
}

pub fn discrete_laplacian(mesh: &Mesh, v: &FeFunction) -> Result<FeFunction, FemError> {
    v.check_scalar_on(mesh)?;
    let space = FeSpace::from_mesh(mesh)?;
    space.function(space.laplacian(v.values())?)
}

pub fn l2_project<F: Fn(f64, f64) -> f64>(mesh: &Mesh, f: F) -> Result<FeFunction, FemError> {
    let space = FeSpace::from_mesh(mesh)?;
    space.function(space.project(f)?)
}

pub fn neg_norm(mesh: &Mesh, v: &FeFunction) -> Result<f64, FemError> {
    v.check_scalar_on(mesh)?;
    FeSpace::from_mesh(mesh)?.neg_norm(v.values())
}

pub fn l2_norm(mesh: &Mesh, v: &FeFunction) -> Result<f64, FemError> {
    v.check_scalar_on(mesh)?;
    Ok(FeSpace::from_mesh(mesh)?.l2_norm(v.values()))
}

pub fn h1_seminorm(mesh: &Mesh, v: &FeFunction) -> Result<f64, FemError> {
    v.check_scalar_on(mesh)?;
    Ok(FeSpace::from_mesh(mesh)?.h1_seminorm(v.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    fn reference_triangle() -> Mesh {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        Mesh::from_triangles(Rect::unit(), v, &[[0, 1, 2]]).unwrap()
    }

    fn dense(a: &CsrMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
    }

    fn big_square() -> Rect {
        Rect::new(-1.0, 1.0, -1.0, 1.0)
    }

    #[test]
    fn reference_mass_and_stiffness() {
        let m = reference_triangle();
        let mass = assemble_mass(&m).unwrap();
        let k = assemble_stiffness(&m).unwrap();
        // map from mesh vertex to reference vertex order (0,0),(1,0),(0,1)
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 / 12.0 } else { 1.0 / 24.0 };
                assert!((mass.get(i, j) - expect).abs() < 1e-15);
            }
        }
        let kref = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.get(i, j) - kref[i][j]).abs() < 1e-15, "K[{i}][{j}]");
            }
        }
        let total: f64 = mass.row_sums().iter().sum();
        assert!((total - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_square_total_mass_and_kernel() {
        let m = Mesh::unit_square_two_triangles();
        let s = FeSpace::from_mesh(&m).unwrap();
        let one = vec![1.0; 4];
        assert!((s.mass().bilinear(&one, &one) - 1.0).abs() < 1e-15);
        assert!(s.stiffness().row_sums().iter().all(|r| r.abs() < 1e-15));
        let x = [1.0, -1.0, 2.0, -2.0];
        assert!(s.stiffness().bilinear(&x, &x) > 0.0);
    }

    #[test]
    fn nonlinear_load_examples() {
        let m = Mesh::unit_square_two_triangles();
        let s = FeSpace::from_mesh(&m).unwrap();
        let b = s.nonlinear_load(&[0.0; 4], Nonlinearity::DoubleWell).unwrap();
        assert!(b.iter().all(|&x| x == 0.0));
        let b = s.nonlinear_load(&[1.0; 4], Nonlinearity::DoubleWell).unwrap();
        assert!(b.iter().all(|&x| x.abs() < 1e-15));
        let b = s.nonlinear_load(&[2.0; 4], Nonlinearity::Cubic).unwrap();
        assert!((b.iter().sum::<f64>() - 8.0).abs() < 1e-13);
    }

    #[test]
    fn nonlinear_load_rejects_vector_input() {
        let m = Mesh::unit_square_two_triangles();
        let v = FeFunction::new(&m, ValueKind::Vector2, vec![0.0; 8]).unwrap();
        assert!(matches!(
            assemble_nonlinear_load(&m, &v, Nonlinearity::Cubic),
            Err(FemError::KindMismatch { .. })
        ));
    }

    #[test]
    fn laplacian_of_constant_and_linear() {
        let m = Mesh::criss_cross(big_square(), 4, 4).unwrap();
        let c = FeFunction::scalar_from_fn(&m, |_, _| 3.5);
        let a = discrete_laplacian(&m, &c).unwrap();
        assert!(a.values().iter().all(|v| v.abs() <= 1e-10));
        let s = FeSpace::from_mesh(&m).unwrap();
        let lin = FeFunction::scalar_from_fn(&m, |x, y| 2.0 * x + 3.0 * y);
        let av = s.laplacian(lin.values()).unwrap();
        assert!(s.integral(&av).abs() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let m = Mesh::criss_cross(big_square(), 3, 3).unwrap();
        let p = l2_project(&m, |x, y| 2.0 * x - y + 0.5).unwrap();
        for (v, q) in m.vertices().iter().enumerate() {
            assert!((p.values()[v] - (2.0 * q[0] - q[1] + 0.5)).abs() < 1e-10);
        }
        let c = l2_project(&m, |_, _| -0.75).unwrap();
        assert!(c.values().iter().all(|v| (v + 0.75).abs() < 1e-12));
    }

    #[test]
    fn projection_of_x_squared_matches_dense_solve() {
        let m = Mesh::unit_square_two_triangles();
        let s = FeSpace::from_mesh(&m).unwrap();
        let p = s.project(|x, _| x * x).unwrap();
        // exact load: ∫ x² φᵢ, integrated by the degree-4 rule (exact for cubics)
        let b = DVector::from_vec(s.load(|x, _| x * x));
        let oracle = dense(s.mass()).lu().solve(&b).unwrap();
        for i in 0..4 {
            assert!((p[i] - oracle[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn norms_on_big_square() {
        let m = Mesh::criss_cross(big_square(), 4, 4).unwrap();
        let one = FeFunction::scalar_from_fn(&m, |_, _| 1.0);
        assert!((l2_norm(&m, &one).unwrap() - 2.0).abs() < 1e-13);
        assert!(h1_seminorm(&m, &one).unwrap().abs() < 1e-12);
        let lin = FeFunction::scalar_from_fn(&m, |x, y| 2.0 * x + 3.0 * y);
        assert!((h1_seminorm(&m, &lin).unwrap() - 52f64.sqrt()).abs() < 1e-12);
        assert!(neg_norm(&m, &one).unwrap() < 1e-12);
    }

    #[test]
    fn neg_norm_matches_pseudo_inverse() {
        let m = Mesh::criss_cross(big_square(), 4, 4).unwrap();
        let s = FeSpace::from_mesh(&m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..s.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = s.mean(&v);
        let v: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let mm = dense(s.mass());
        let kk = dense(s.stiffness());
        let kp = kk.pseudo_inverse(1e-10).unwrap();
        let vv = DVector::from_vec(v.clone());
        let oracle = (vv.transpose() * &mm * kp * &mm * &vv)[(0, 0)].sqrt();
        let got = s.neg_norm(&v).unwrap();
        assert!((got - oracle).abs() <= 1e-8 * oracle);
    }

    #[test]
    fn neg_norm_converges_to_eigenfunction_value() {
        // cell side 1/32
        let m = Mesh::criss_cross(big_square(), 64, 64).unwrap();
        let expected = 2f64.sqrt() / std::f64::consts::FRAC_PI_2;
        let v = FeFunction::scalar_from_fn(&m, |x, _| (std::f64::consts::FRAC_PI_2 * (x + 1.0)).cos());
        let got = neg_norm(&m, &v).unwrap();
        assert!((got - expected).abs() < 0.02 * expected, "{got} vs {expected}");
    }

    #[test]
    fn stale_function_is_rejected() {
        let a = Mesh::unit_square_two_triangles();
        let b = Mesh::unit_square_two_triangles();
        let f = FeFunction::zeros(&a);
        assert!(matches!(neg_norm(&b, &f), Err(FemError::WrongMesh { .. })));
    }
}

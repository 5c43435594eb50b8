//! Compressed sparse row storage and direct solves backed by faer.

use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{MatMut, Side};

use super::FemError;

/// Default bound on the normwise relative residual of direct solves.
pub const SOLVE_TOL: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 4;

/// Square sparse matrix in CSR form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from parts, checking shape and sortedness.
    pub fn new(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, FemError> {
        let ok = row_ptr.len() == n + 1
            && row_ptr[0] == 0
            && row_ptr[n] == col_idx.len()
            && col_idx.len() == values.len()
            && row_ptr.windows(2).all(|w| w[0] <= w[1])
            && (0..n).all(|i| {
                let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
                cols.windows(2).all(|w| w[0] < w[1]) && cols.iter().all(|&j| j < n)
            });
        if !ok {
            return Err(FemError::InvalidMatrix("malformed CSR arrays".into()));
        }
        Ok(CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Result<Self, FemError> {
        let n = a.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in a {
            if row.len() != n {
                return Err(FemError::InvalidMatrix("dense input is not square".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix::new(n, row_ptr, col_idx, values)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Slot of entry `(i, j)` in the value array, if stored.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.find(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        dot(x, &ay)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij - A_ji|` over stored entries (missing transposes count as 0).
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// The same pattern read as a CSC matrix, i.e. the transpose.
    pub(crate) fn as_transpose_csc(&self) -> SparseColMatRef<'_, usize, f64> {
        let sym = SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.row_ptr, None, &self.col_idx);
        SparseColMatRef::new(sym, &self.values)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn solve_with<F: Fn(MatMut<'_, f64>)>(n: usize, b: &[f64], f: F) -> Vec<f64> {
    let mut rhs = faer::Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    f(rhs.as_mut());
    (0..n).map(|i| rhs[(i, 0)]).collect()
}

/// Solves `A x = b` given a factorization, refining iteratively until the
/// normwise residual `‖b - Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)` meets `tol`.
fn refined_solve<F: Fn(MatMut<'_, f64>)>(
    a: &CsrMatrix,
    a_norm: f64,
    b: &[f64],
    tol: f64,
    apply_inverse: F,
) -> Result<Vec<f64>, FemError> {
    let n = a.dim();
    if b.len() != n {
        return Err(FemError::LengthMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let b_norm = norm_inf(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = solve_with(n, b, &apply_inverse);
    let mut residual = f64::INFINITY;
    for _ in 0..=MAX_REFINEMENTS {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        residual = norm_inf(&r) / (a_norm * norm_inf(&x) + b_norm);
        if !residual.is_finite() {
            break;
        }
        if residual <= tol {
            return Ok(x);
        }
        let dx = solve_with(n, &r, &apply_inverse);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    Err(FemError::LinearSolver { residual, tol })
}

/// Cached sparse Cholesky factorization of a symmetric positive definite
/// matrix.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    matrix: CsrMatrix,
    norm: f64,
    llt: Llt<usize, f64>,
    tol: f64,
}

impl SpdSolver {
    pub fn new(matrix: CsrMatrix) -> Result<Self, FemError> {
        let csc = matrix.as_transpose_csc();
        let sym = SymbolicLlt::try_new(csc.symbolic(), Side::Lower)
            .map_err(|e| FemError::Factorization(format!("{e:?}")))?;
        let llt = Llt::try_new_with_symbolic(sym, csc, Side::Lower)
            .map_err(|e| FemError::Factorization(format!("{e:?}")))?;
        let norm = matrix.norm_inf();
        Ok(SpdSolver {
            matrix,
            norm,
            llt,
            tol: SOLVE_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, FemError> {
        use faer::linalg::solvers::Solve;
        refined_solve(&self.matrix, self.norm, b, self.tol, |rhs| self.llt.solve_in_place(rhs))
    }
}

/// One-shot SPD solve with the default tolerance.
pub fn spd_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, FemError> {
    SpdSolver::new(a.clone())?.solve(b)
}

/// General sparse LU with a reusable symbolic analysis. The stored matrix is
/// interpreted row-wise; faer receives its transpose and solves with the
/// transposed factors.
#[derive(Debug, Clone)]
pub(crate) struct LuPattern {
    symbolic: SymbolicLu<usize>,
}

impl LuPattern {
    pub(crate) fn new(a: &CsrMatrix) -> Result<Self, FemError> {
        let csc = a.as_transpose_csc();
        let symbolic =
            SymbolicLu::try_new(csc.symbolic()).map_err(|e| FemError::Factorization(format!("{e:?}")))?;
        Ok(LuPattern { symbolic })
    }

    pub(crate) fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, FemError> {
        use faer::linalg::solvers::Solve;
        let csc = a.as_transpose_csc();
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), csc)
            .map_err(|e| FemError::Factorization(format!("{e:?}")))?;
        refined_solve(a, a.norm_inf(), b, SOLVE_TOL, |rhs| lu.solve_transpose_in_place(rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn random_spd(n: usize, seed: u64) -> CsrMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                if rng.gen_bool(0.3) {
                    let v = rng.gen_range(-1.0..1.0);
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
        }
        for i in 0..n {
            a[i][i] = a[i].iter().map(|v: &f64| v.abs()).sum::<f64>() + 1.0;
        }
        CsrMatrix::from_dense(&a).unwrap()
    }

    #[test]
    fn rejects_unsorted_rows() {
        assert!(CsrMatrix::new(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn spd_solve_matches_dense_lu() {
        for seed in 0..5 {
            let a = random_spd(30, seed);
            let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
            let x = spd_solve(&a, &b).unwrap();
            let dense = DMatrix::from_fn(30, 30, |i, j| a.get(i, j));
            let oracle = dense.lu().solve(&DVector::from_vec(b.clone())).unwrap();
            for i in 0..30 {
                assert!((x[i] - oracle[i]).abs() <= 1e-12 * oracle.amax());
            }
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = random_spd(10, 3);
        assert_eq!(spd_solve(&a, &[0.0; 10]).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(spd_solve(&a, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn lu_solves_nonsymmetric_system() {
        let a = CsrMatrix::from_dense(&[
            vec![4.0, 1.0, 0.0],
            vec![0.5, 3.0, 2.0],
            vec![0.0, -1.0, 5.0],
        ])
        .unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = LuPattern::new(&a).unwrap().solve(&a, &b).unwrap();
        let ax = a.mul_vec(&x);
        for i in 0..3 {
            assert!((ax[i] - b[i]).abs() < 1e-14);
        }
    }
}

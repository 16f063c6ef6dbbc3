//! Minimal sparse linear algebra: CSR storage, matrix-vector products, and
//! a symmetric positive definite direct solver.
//!
//! The systems assembled here are Newton Jacobians of penalized problems:
//! symmetric, positive definite after Dirichlet elimination, and extremely
//! ill-conditioned (condition numbers scale like 1/κ, which reaches 1e12 in
//! the penalty sweeps). That rules out plain iterative methods, so
//! [`CsrMatrix::solve_spd`] factors the matrix with a sparse supernodal
//! Cholesky decomposition (the `faer` crate) and then runs iterative
//! refinement with the retained factorization until the relative residual
//! contract is met.
//!
//! Determinism: triplet assembly, `spmv`, and refinement all sum in a fixed
//! order, and the factorization backend is pinned to sequential mode, so a
//! given matrix and right-hand side always produce bitwise identical
//! results.

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par, Side};

/// Default relative residual bound for [`CsrMatrix::solve_spd`]: two
/// orders below the Newton stopping threshold of 1e-8, so linear-solve
/// error never dominates the nonlinear iteration, yet above the
/// attainable floor of iterative refinement on the worst-conditioned
/// penalty systems (penalties near 1e-11 on resolution-16 disks stall
/// refinement just under 2e-11 relative).
pub const SOLVE_REL_TOL: f64 = 1e-10;

/// Relative tolerance for the symmetry check in [`CsrMatrix::solve_spd`].
pub const SYMMETRY_REL_TOL: f64 = 1e-10;

/// Iterative refinement rounds before giving up on the residual contract.
const MAX_REFINEMENT_ROUNDS: usize = 10;

/// Errors from sparse construction and solves.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SparseError {
    /// A triplet references a row or column outside the matrix shape.
    #[error("triplet index ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfBounds { row: usize, col: usize, nrows: usize, ncols: usize },
    /// A triplet carries a NaN or infinite value.
    #[error("non-finite value at ({row}, {col})")]
    NonFiniteValue { row: usize, col: usize },
    /// Vector length does not match the matrix shape.
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// The solver requires a square matrix.
    #[error("matrix is {nrows}x{ncols}, but the solver requires a square matrix")]
    NotSquare { nrows: usize, ncols: usize },
    /// Symmetry check failed beyond the relative tolerance.
    #[error("matrix is asymmetric: max |A - A^T| = {max_abs_diff:.3e} exceeds {tol:.3e}")]
    Asymmetric { max_abs_diff: f64, tol: f64 },
    /// Cholesky factorization failed; the matrix is not positive definite.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    /// Refinement stalled before reaching the residual contract.
    #[error("solve stalled at relative residual {achieved:.3e}, required {required:.3e}")]
    ToleranceNotMet { achieved: f64, required: f64 },
}

/// Compressed sparse row matrix.
///
/// Invariants: `row_ptr` is nondecreasing with `nrows + 1` entries ending
/// at the stored-value count; column indices are strictly increasing within
/// each row; no explicit duplicates are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Builds a CSR matrix from `(row, col, value)` triplets, summing
/// duplicates.
///
/// Entries are bucketed by row and sorted by column with a stable sort, so
/// the result (including floating-point summation order of duplicates) is
/// deterministic for a given triplet sequence. Zero values are kept: the
/// sparsity pattern is exactly the set of given index pairs, which lets
/// Newton Jacobians preserve their pattern across active-set changes.
///
/// # Errors
/// [`SparseError::IndexOutOfBounds`] or [`SparseError::NonFiniteValue`] on
/// the first offending triplet.
pub fn csr_from_triplets(
    nrows: usize,
    ncols: usize,
    triplets: &[(usize, usize, f64)],
) -> Result<CsrMatrix, SparseError> {
    for &(row, col, value) in triplets {
        if row >= nrows || col >= ncols {
            return Err(SparseError::IndexOutOfBounds { row, col, nrows, ncols });
        }
        if !value.is_finite() {
            return Err(SparseError::NonFiniteValue { row, col });
        }
    }
    let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
    for &(row, col, value) in triplets {
        per_row[row].push((col, value));
    }
    let mut row_ptr = Vec::with_capacity(nrows + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for entries in &mut per_row {
        entries.sort_by_key(|&(col, _)| col);
        let mut iter = entries.iter().peekable();
        while let Some(&&(col, value)) = iter.peek() {
            iter.next();
            let mut sum = value;
            while let Some(&&(next_col, next_value)) = iter.peek() {
                if next_col != col {
                    break;
                }
                sum += next_value;
                iter.next();
            }
            col_idx.push(col);
            values.push(sum);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(CsrMatrix { nrows, ncols, row_ptr, col_idx, values })
}

impl CsrMatrix {
    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row offsets (`nrows + 1` entries).
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    /// Column indices, ascending within each row.
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Stored values, aligned with [`CsrMatrix::col_idx`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable stored values (pattern is fixed; only values may change).
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Stored value at `(row, col)`, or 0 if the entry is not stored.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(offset) => self.values[range.start + offset],
            Err(_) => 0.0,
        }
    }

    /// Matrix-vector product `A x`.
    ///
    /// Accumulates within each row in ascending column order, so the result
    /// is deterministic.
    ///
    /// # Errors
    /// [`SparseError::DimensionMismatch`] if `x` has the wrong length.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.ncols {
            return Err(SparseError::DimensionMismatch { expected: self.ncols, got: x.len() });
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// Matrix-vector product into a caller-provided buffer.
    ///
    /// # Panics
    /// If `x` or `y` have the wrong length (internal hot path; callers go
    /// through [`CsrMatrix::spmv`] for checked access).
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv input length");
        assert_eq!(y.len(), self.nrows, "spmv output length");
        for row in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[row] = acc;
        }
    }

    /// Stored entries as `(row, col, value)` triplets in row-major order.
    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut triplets = Vec::with_capacity(self.nnz());
        for row in 0..self.nrows {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                triplets.push((row, self.col_idx[k], self.values[k]));
            }
        }
        triplets
    }

    /// Transpose (fresh matrix, same storage convention).
    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for row in 0..self.nrows {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                triplets.push((self.col_idx[k], row, self.values[k]));
            }
        }
        csr_from_triplets(self.ncols, self.nrows, &triplets)
            .expect("transpose of a valid matrix is valid")
    }

    /// Largest absolute difference between `A` and `A^T` over all entries.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut max = 0.0f64;
        for row in 0..self.nrows {
            let a = self.row_ptr[row]..self.row_ptr[row + 1];
            let b = t.row_ptr[row]..t.row_ptr[row + 1];
            // Merge the two sorted rows, comparing matched and unmatched
            // entries alike.
            let (mut i, mut j) = (a.start, b.start);
            while i < a.end || j < b.end {
                let ci = if i < a.end { self.col_idx[i] } else { usize::MAX };
                let cj = if j < b.end { t.col_idx[j] } else { usize::MAX };
                if ci == cj {
                    max = max.max((self.values[i] - t.values[j]).abs());
                    i += 1;
                    j += 1;
                } else if ci < cj {
                    max = max.max(self.values[i].abs());
                    i += 1;
                } else {
                    max = max.max(t.values[j].abs());
                    j += 1;
                }
            }
        }
        max
    }

    /// Largest absolute stored value.
    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Solves `A x = b` for symmetric positive definite `A` with the
    /// default relative residual bound [`SOLVE_REL_TOL`].
    ///
    /// # Errors
    /// See [`CsrMatrix::solve_spd_with`].
    pub fn solve_spd(&self, b: &[f64]) -> Result<Vec<f64>, SparseError> {
        self.solve_spd_with(b, SOLVE_REL_TOL)
    }

    /// Solves `A x = b` to `‖A x − b‖₂ ≤ rel_tol · ‖b‖₂`.
    ///
    /// Symmetry is verified to [`SYMMETRY_REL_TOL`] relative to the largest
    /// entry. The matrix is factored once (sparse Cholesky, sequential so
    /// results are reproducible) and the factorization is reused for
    /// iterative refinement until the residual contract holds.
    ///
    /// # Errors
    /// * [`SparseError::NotSquare`] / [`SparseError::DimensionMismatch`] on
    ///   shape violations;
    /// * [`SparseError::Asymmetric`] if the symmetry check fails;
    /// * [`SparseError::NotPositiveDefinite`] if factorization fails;
    /// * [`SparseError::ToleranceNotMet`] with the achieved residual if
    ///   refinement stalls (the contract could not be met).
    pub fn solve_spd_with(&self, b: &[f64], rel_tol: f64) -> Result<Vec<f64>, SparseError> {
        if self.nrows != self.ncols {
            return Err(SparseError::NotSquare { nrows: self.nrows, ncols: self.ncols });
        }
        if b.len() != self.nrows {
            return Err(SparseError::DimensionMismatch { expected: self.nrows, got: b.len() });
        }
        let tol = SYMMETRY_REL_TOL * self.max_abs_value().max(f64::MIN_POSITIVE);
        let asym = self.max_asymmetry();
        if asym > tol {
            return Err(SparseError::Asymmetric { max_abs_diff: asym, tol });
        }
        let norm_b = norm2(b);
        if norm_b == 0.0 {
            return Ok(vec![0.0; self.nrows]);
        }

        // Sequential factorization keeps results bitwise reproducible
        // regardless of the ambient thread pool.
        faer::set_global_parallelism(Par::Seq);
        let mut triplets = Vec::with_capacity(self.nnz());
        for row in 0..self.nrows {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                triplets.push(Triplet::new(row, self.col_idx[k], self.values[k]));
            }
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|_| SparseError::NotPositiveDefinite)?;
        let symbolic = SymbolicLlt::try_new(a.symbolic(), Side::Lower)
            .map_err(|_| SparseError::NotPositiveDefinite)?;
        let llt = Llt::try_new_with_symbolic(symbolic, a.as_ref(), Side::Lower)
            .map_err(|_| SparseError::NotPositiveDefinite)?;

        let rhs = Mat::from_fn(self.nrows, 1, |i, _| b[i]);
        let mut x: Vec<f64> = {
            let sol = llt.solve(rhs.as_ref());
            (0..self.nrows).map(|i| sol[(i, 0)]).collect()
        };
        let mut residual = vec![0.0; self.nrows];
        let mut best = f64::MAX;
        for _ in 0..=MAX_REFINEMENT_ROUNDS {
            self.spmv_into(&x, &mut residual);
            for (r, bi) in residual.iter_mut().zip(b) {
                *r = bi - *r;
            }
            let rel = norm2(&residual) / norm_b;
            if rel <= rel_tol {
                return Ok(x);
            }
            if rel >= best {
                break;
            }
            best = rel;
            let r_mat = Mat::from_fn(self.nrows, 1, |i, _| residual[i]);
            let dx = llt.solve(r_mat.as_ref());
            for (xi, i) in x.iter_mut().zip(0..self.nrows) {
                *xi += dx[(i, 0)];
            }
        }
        self.spmv_into(&x, &mut residual);
        for (r, bi) in residual.iter_mut().zip(b) {
            *r = bi - *r;
        }
        let achieved = norm2(&residual) / norm_b;
        if achieved <= rel_tol {
            Ok(x)
        } else {
            Err(SparseError::ToleranceNotMet { achieved, required: rel_tol })
        }
    }
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small deterministic generator for test data (SplitMix64).
    struct Rng(u64);
    impl Rng {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        }
    }

    fn dense_from(triplets: &[(usize, usize, f64)], nrows: usize, ncols: usize) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; ncols]; nrows];
        for &(r, c, v) in triplets {
            dense[r][c] += v;
        }
        dense
    }

    /// Dense Gaussian elimination with partial pivoting, as an independent
    /// solve oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row][k] * x[k];
            }
            x[row] = acc / a[row][row];
        }
        x
    }

    #[test]
    fn duplicates_are_summed() {
        let m = csr_from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn empty_matrix_has_empty_rows() {
        let m = csr_from_triplets(2, 2, &[]).unwrap();
        assert_eq!(m.row_ptr(), &[0, 0, 0]);
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.spmv(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn construction_rejects_bad_triplets() {
        assert!(matches!(
            csr_from_triplets(2, 2, &[(2, 0, 1.0)]),
            Err(SparseError::IndexOutOfBounds { row: 2, .. })
        ));
        assert!(matches!(
            csr_from_triplets(2, 2, &[(0, 0, f64::NAN)]),
            Err(SparseError::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn random_triplets_match_dense_accumulation() {
        let mut rng = Rng(7);
        let mut triplets = Vec::new();
        for _ in 0..60 {
            let r = (rng.next_f64().abs() * 10.0) as usize % 5;
            let c = (rng.next_f64().abs() * 10.0) as usize % 5;
            triplets.push((r, c, rng.next_f64()));
        }
        let m = csr_from_triplets(5, 5, &triplets).unwrap();
        let dense = dense_from(&triplets, 5, 5);
        for r in 0..5 {
            for c in 0..5 {
                assert!((m.get(r, c) - dense[r][c]).abs() <= 1e-15);
            }
        }
        // Column indices strictly increase within each row.
        for r in 0..5 {
            let cols = &m.col_idx()[m.row_ptr()[r]..m.row_ptr()[r + 1]];
            assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn spmv_matches_dense_matvec() {
        let mut rng = Rng(13);
        let mut triplets = Vec::new();
        for r in 0..6 {
            for c in 0..6 {
                if rng.next_f64() > 0.1 {
                    triplets.push((r, c, rng.next_f64()));
                }
            }
        }
        let m = csr_from_triplets(6, 6, &triplets).unwrap();
        let dense = dense_from(&triplets, 6, 6);
        let x: Vec<f64> = (0..6).map(|_| rng.next_f64()).collect();
        let y = m.spmv(&x).unwrap();
        for r in 0..6 {
            let expect: f64 = (0..6).map(|c| dense[r][c] * x[c]).sum();
            assert!((y[r] - expect).abs() <= 1e-13);
        }
        assert!(matches!(m.spmv(&[0.0; 5]), Err(SparseError::DimensionMismatch { .. })));
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let m = csr_from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]).unwrap();
        let x = m.solve_spd(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn diagonal_solve() {
        let m = csr_from_triplets(1, 1, &[(0, 0, 2.0)]).unwrap();
        let x = m.solve_spd(&[4.0]).unwrap();
        assert!((x[0] - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn random_spd_matches_dense_oracle() {
        // A = B^T B + I is SPD.
        let mut rng = Rng(29);
        let n = 8;
        let b_mat: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.next_f64()).collect()).collect();
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut v: f64 = (0..n).map(|k| b_mat[k][i] * b_mat[k][j]).sum();
                if i == j {
                    v += 1.0;
                }
                triplets.push((i, j, v));
            }
        }
        let a = csr_from_triplets(n, n, &triplets).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let x = a.solve_spd(&rhs).unwrap();
        let oracle = dense_solve(dense_from(&triplets, n, n), rhs.clone());
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() <= 1e-9, "entry {i}: {} vs {}", x[i], oracle[i]);
        }
    }

    #[test]
    fn asymmetry_is_detected() {
        let m = csr_from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 0.5), (1, 1, 2.0)]).unwrap();
        assert!(matches!(m.solve_spd(&[1.0, 1.0]), Err(SparseError::Asymmetric { .. })));
        // Asymmetry in the pattern (entry missing entirely on one side).
        let p = csr_from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2.0)]).unwrap();
        assert!(matches!(p.solve_spd(&[1.0, 1.0]), Err(SparseError::Asymmetric { .. })));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        // Symmetric with eigenvalues 3 and -1.
        let m = csr_from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(m.solve_spd(&[1.0, 1.0]), Err(SparseError::NotPositiveDefinite)));
    }

    #[test]
    fn huge_scale_contrast_meets_residual_contract() {
        // Penalty-style conditioning: diagonal blocks at scale 1 and 1e10.
        let n = 50;
        let mut triplets = Vec::new();
        for i in 0..n {
            let scale = if i % 2 == 0 { 1.0 } else { 1e10 };
            triplets.push((i, i, 2.0 * scale));
            if i + 1 < n {
                // Couple neighbors weakly to keep the matrix SPD.
                triplets.push((i, i + 1, -0.5));
                triplets.push((i + 1, i, -0.5));
            }
        }
        let a = csr_from_triplets(n, n, &triplets).unwrap();
        let mut rng = Rng(31);
        let x0: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let b = a.spmv(&x0).unwrap();
        let x = a.solve_spd(&b).unwrap();
        let r = a.spmv(&x).unwrap();
        let res: Vec<f64> = r.iter().zip(&b).map(|(ri, bi)| bi - ri).collect();
        assert!(norm2(&res) <= SOLVE_REL_TOL * norm2(&b));
        // Recovery of the generating vector to 1e-9 relative.
        let err: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) <= 1e-9 * norm2(&x0));
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let m = csr_from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 2.0)]).unwrap();
        assert_eq!(m.solve_spd(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }
}

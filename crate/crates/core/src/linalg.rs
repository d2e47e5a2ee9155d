//! CSR matrices and Jacobi-preconditioned conjugate gradients.

use thiserror::Error;

pub const DEFAULT_CG_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("diagonal entry {row} is {value}")]
    BadDiagonal { row: usize, value: f64 },
    #[error("index ({row}, {col}) outside a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays. Column indices must be sorted
    /// and unique within each row.
    pub fn from_parts(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_ptr.len() != n + 1 {
            return Err(LinalgError::DimensionMismatch {
                expected: n + 1,
                found: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() || row_ptr[n] != col_idx.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: row_ptr[n],
                found: col_idx.len(),
            });
        }
        for row in 0..n {
            let cols = &col_idx[row_ptr[row]..row_ptr[row + 1]];
            if let Some(&col) = cols.iter().find(|&&c| c >= n) {
                return Err(LinalgError::IndexOutOfRange { row, col, n });
            }
            debug_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
        Ok(CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut sorted = triplets.to_vec();
        for &(row, col, _) in &sorted {
            if row >= n || col >= n {
                return Err(LinalgError::IndexOutOfRange { row, col, n });
            }
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
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

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Iterates `(col, value)` over the stored entries of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n, "matvec: input length");
        assert_eq!(y.len(), self.n, "matvec: output length");
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        dense
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final unpreconditioned residual norm relative to `‖b‖`.
    pub relative_residual: f64,
}

/// Solves `A x = b` by conjugate gradients with a Jacobi preconditioner,
/// stopping once `‖b - A x‖ <= tol ‖b‖`. Running out of iterations is not
/// an error; the outcome is marked `converged = false`.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<CgOutcome, LinalgError> {
    let n = a.dim();
    for len in [b.len(), x0.len()] {
        if len != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if !a.values.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::NonFinite("matrix"));
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::NonFinite("right-hand side"));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::NonFinite("initial guess"));
    }
    let inv_diag = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(LinalgError::BadDiagonal { row, value: d })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
        });
    }

    let mut x = x0.to_vec();
    let mut r = a.matvec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut r_norm = norm2(&r);
    let mut iterations = 0;

    while r_norm > tol * b_norm && iterations < maxit {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        r_norm = norm2(&r);
        iterations += 1;
    }

    let relative_residual = r_norm / b_norm;
    Ok(CgOutcome {
        x,
        iterations,
        converged: relative_residual <= tol,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = [1.0, -2.0, 3.5, 0.25, 7.0];
        let out = cg_solve(&a, &b, &[0.0; 5], DEFAULT_CG_TOL, 50).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert_eq!(out.x, b);
    }

    #[test]
    fn zero_rhs() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)])
            .unwrap();
        let out = cg_solve(&a, &[0.0, 0.0], &[1.0, 1.0], 1e-10, 10).unwrap();
        assert_eq!(out.x, vec![0.0, 0.0]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn small_matvec() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)])
            .unwrap();
        assert_eq!(a.matvec(&[1.0, 1.0]), vec![3.0, 4.0]);
        assert_eq!(CsrMatrix::identity(3).matvec(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn triplets_merge_duplicates() {
        let a = CsrMatrix::from_triplets(2, &[(1, 1, 1.0), (0, 0, 1.0), (1, 1, 2.0), (0, 1, 4.0)])
            .unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 1), 3.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert!(CsrMatrix::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn error_paths() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 0.0)]).unwrap();
        assert_eq!(
            cg_solve(&a, &[1.0, 1.0], &[0.0, 0.0], 1e-10, 10),
            Err(LinalgError::BadDiagonal { row: 1, value: 0.0 })
        );
        let a = CsrMatrix::identity(2);
        assert_eq!(
            cg_solve(&a, &[f64::NAN, 1.0], &[0.0, 0.0], 1e-10, 10),
            Err(LinalgError::NonFinite("right-hand side"))
        );
        assert!(matches!(
            cg_solve(&a, &[1.0], &[0.0, 0.0], 1e-10, 10),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        let mut bad = CsrMatrix::identity(2);
        bad.values_mut()[0] = f64::INFINITY;
        assert_eq!(
            cg_solve(&bad, &[1.0, 1.0], &[0.0, 0.0], 1e-10, 10),
            Err(LinalgError::NonFinite("matrix"))
        );
    }

    #[test]
    fn maxit_is_flagged() {
        // 1D Laplacian needs ~n iterations
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t).unwrap();
        let out = cg_solve(&a, &vec![1.0; n], &vec![0.0; n], 1e-12, 3).unwrap();
        assert_eq!(out.iterations, 3);
        assert!(!out.converged);
    }
}

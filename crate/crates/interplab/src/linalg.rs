//! Dense matrix/vector arithmetic for desk-scale problems.
//!
//! Everything is `f64`, row-major, and bounds-checked at construction
//! (finite entries, consistent shapes). The solvers are textbook
//! implementations: LU with partial pivoting, cyclic Jacobi for symmetric
//! eigenvalues, power iteration for spectral norms. Matrices here stay
//! small (at most a few hundred rows), so clarity beats BLAS.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build from row-major data; rejects shape mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidData(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix data length",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { context: "matrix entries" });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (i, slot) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(v.data()) {
                acc += a * b;
            }
            *slot = acc;
        }
        Vector::new(out)
    }
}

/// Dense vector of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidData("vector must be non-empty".into()));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { context: "vector entries" });
        }
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.data
    }
}

/// C = A * B with the usual inner-dimension check.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            context: "matmul inner dimension",
            expected: a.cols,
            got: b.rows,
        });
    }
    let mut c = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            for j in 0..b.cols {
                c.data[i * c.cols + j] += aik * b.get(k, j);
            }
        }
    }
    Ok(c)
}

/// Relative pivot floor for declaring a matrix singular.
const PIVOT_RELATIVE_FLOOR: f64 = 1e-12;

/// Invert a square matrix via LU with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when a pivot magnitude falls below
/// `1e-12` times the largest absolute entry of the input.
pub fn solve_or_invert(m: &Matrix) -> Result<Matrix> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch {
            context: "inversion requires a square matrix",
            expected: m.rows,
            got: m.cols,
        });
    }
    let n = m.rows;
    let threshold = PIVOT_RELATIVE_FLOOR * m.max_abs();

    // Work on an augmented copy [A | I], reduce in place.
    let mut lu = m.data.clone();
    let mut inv = Matrix::identity(n);
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // Partial pivoting: the largest remaining entry in this column.
        let mut pivot_row = col;
        let mut pivot_val = lu[perm[col] * n + col].abs();
        for r in (col + 1)..n {
            let v = lu[perm[r] * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= threshold {
            return Err(Error::SingularMatrix {
                pivot: pivot_val,
                threshold,
            });
        }
        perm.swap(col, pivot_row);

        let prow = perm[col];
        let pivot = lu[prow * n + col];
        for r in (col + 1)..n {
            let row = perm[r];
            let factor = lu[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            lu[row * n + col] = factor;
            for c in (col + 1)..n {
                lu[row * n + c] -= factor * lu[prow * n + c];
            }
            for c in 0..n {
                let v = inv.get(prow, c);
                if v != 0.0 {
                    let cur = inv.get(row, c);
                    inv.set(row, c, cur - factor * v);
                }
            }
        }
    }

    // Back substitution on each column of the (permuted) right-hand side.
    let mut out = Matrix::zeros(n, n);
    for c in 0..n {
        for i in (0..n).rev() {
            let row = perm[i];
            let mut acc = inv.get(row, c);
            for j in (i + 1)..n {
                acc -= lu[row * n + j] * out.get(j, c);
            }
            out.set(i, c, acc / lu[row * n + i]);
        }
    }
    Ok(out)
}

/// Random orthogonal matrix: Gaussian entries, then modified Gram-Schmidt.
pub fn random_orthogonal(n: usize, rng: &mut SeededRng) -> Matrix {
    loop {
        let g = Matrix::from_fn(n, n, |_, _| rng.standard_normal());
        if let Some(q) = gram_schmidt(&g) {
            return q;
        }
        // A rank-deficient Gaussian draw has probability zero; retry on the
        // measure-zero numerical fluke.
    }
}

fn gram_schmidt(m: &Matrix) -> Option<Matrix> {
    let n = m.rows;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| m.get(i, j)).collect();
        for prev in &cols {
            let proj: f64 = col.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= proj * p;
            }
        }
        let norm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        for c in &mut col {
            *c /= norm;
        }
        cols.push(col);
    }
    Some(Matrix::from_fn(n, n, |i, j| cols[j][i]))
}

/// Random regular (invertible) matrix with smallest singular value at least
/// `min_singular`: an orthogonal factor times a diagonal with entries drawn
/// uniformly from `[min_singular, 1]`. Regularity holds by construction, no
/// rejection step involved.
pub fn random_regular(n: usize, rng: &mut SeededRng, min_singular: f64) -> Matrix {
    assert!(
        min_singular > 0.0 && min_singular < 1.0,
        "min_singular must lie in (0, 1), got {min_singular}"
    );
    let q = random_orthogonal(n, rng);
    let diag: Vec<f64> = (0..n).map(|_| rng.uniform(min_singular, 1.0)).collect();
    Matrix::from_fn(n, n, |i, j| q.get(i, j) * diag[j])
}

/// Eigenvalues of a symmetric matrix, descending, via cyclic Jacobi sweeps.
pub fn sym_eigenvalues_desc(m: &Matrix) -> Result<Vec<f64>> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch {
            context: "symmetric eigenvalues require a square matrix",
            expected: m.rows,
            got: m.cols,
        });
    }
    let n = m.rows;
    let mut a = m.data.clone();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    Ok(eig)
}

/// Singular values, descending, via the eigenvalues of the smaller Gram matrix.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let gram = if m.rows <= m.cols {
        matmul(m, &m.transpose())?
    } else {
        matmul(&m.transpose(), m)?
    };
    let eig = sym_eigenvalues_desc(&gram)?;
    Ok(eig.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

/// Spectral norm (largest singular value) via power iteration at the given
/// relative tolerance. Iterates on the smaller Gram side.
pub fn spectral_norm(m: &Matrix, tol: f64) -> f64 {
    let gram = if m.rows <= m.cols {
        matmul(m, &m.transpose()).expect("shapes agree by construction")
    } else {
        matmul(&m.transpose(), m).expect("shapes agree by construction")
    };
    let n = gram.rows;
    if n == 1 {
        return gram.get(0, 0).max(0.0).sqrt();
    }

    // Deterministic start with nonzero overlap against any fixed vector.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + 3) % 13) as f64 / 13.0).collect();
    normalize(&mut v);
    let mut lambda = 0.0f64;
    for _ in 0..10_000 {
        let mut w = vec![0.0; n];
        for i in 0..n {
            let row = gram.row(i);
            w[i] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let new_lambda = normalize(&mut w);
        v = w;
        if (new_lambda - lambda).abs() <= tol * new_lambda.max(1e-300) {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    lambda.max(0.0).sqrt()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

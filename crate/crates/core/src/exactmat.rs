//! Exact dense integer matrices and vectors.
//!
//! Everything here is generic over an exact integer scalar ([`ExactInt`]);
//! the scheme itself uses `BigInt` through the [`crate::IntMatrix`] and
//! [`crate::IntVector`] aliases, while tests and small oracles run on `i64`.
//! No operation rounds: every division goes through [`exact_div`].

use std::fmt;
use std::ops::Index;

use num_integer::Integer;
use num_traits::Signed;
use thiserror::Error;

/// Exact signed integer scalar usable as a matrix entry.
pub trait ExactInt: Clone + Integer + Signed + fmt::Debug {}

impl<T: Clone + Integer + Signed + fmt::Debug> ExactInt for T {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("matrix is not unit upper-triangular (entry ({row}, {col}))")]
    NotUnitUpperTriangular { row: usize, col: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("inexact division: {dividend} is not a multiple of {divisor}")]
    InexactDivision { dividend: String, divisor: String },
}

/// Divides `a` by `b`, failing unless `b` divides `a` exactly.
pub fn exact_div<T: ExactInt>(a: &T, b: &T) -> Result<T, MatrixError> {
    if b.is_zero() {
        return Err(MatrixError::DivisionByZero);
    }
    let (q, r) = a.div_rem(b);
    if !r.is_zero() {
        return Err(MatrixError::InexactDivision {
            dividend: format!("{a:?}"),
            divisor: format!("{b:?}"),
        });
    }
    Ok(q)
}

/// Integer row vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vector<T> {
    entries: Vec<T>,
}

impl<T: ExactInt> Vector<T> {
    pub fn new(entries: Vec<T>) -> Self {
        Self { entries }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            entries: vec![T::zero(); len],
        }
    }

    /// The `k`-th standard basis vector of length `len`.
    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.entries[k] = T::one();
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.entries.iter()
    }

    /// Row-vector times matrix, `self · m`.
    pub fn mul_mat(&self, m: &Matrix<T>) -> Result<Vector<T>, MatrixError> {
        if self.len() != m.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "vector of length {} times {}x{} matrix",
                self.len(),
                m.rows,
                m.cols
            )));
        }
        let out = (0..m.cols)
            .map(|j| {
                self.entries
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (i, x)| acc + x.clone() * m.get(i, j).clone())
            })
            .collect();
        Ok(Vector::new(out))
    }

    /// Entrywise exact quotient by `s`.
    pub fn exact_div(&self, s: &T) -> Result<Vector<T>, MatrixError> {
        self.entries
            .iter()
            .map(|e| exact_div(e, s))
            .collect::<Result<Vec<_>, _>>()
            .map(Vector::new)
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.entries[i]
    }
}

impl<T> From<Vec<T>> for Vector<T> {
    fn from(entries: Vec<T>) -> Self {
        Self { entries }
    }
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: ExactInt> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
            return Err(MatrixError::DimensionMismatch(format!(
                "row {i} has {} entries, expected {n_cols}",
                r.len()
            )));
        }
        Self::from_vec(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = d.clone();
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> Vector<T> {
        Vector::new(self.row(i).to_vec())
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols)
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .collect()
    }

    /// Exact product `self · other`.
    pub fn mat_mul(&self, other: &Matrix<T>) -> Result<Matrix<T>, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_unit_lower_triangular(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.get(i, i).is_one() && (i + 1..self.cols).all(|j| self.get(i, j).is_zero())
            })
    }

    pub fn is_unit_upper_triangular(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| self.get(i, i).is_one() && (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_non_negative(&self) -> bool {
        self.data.iter().all(|e| !e.is_negative())
    }

    /// `x · self · xᵀ` for a square `self`.
    pub fn quadratic_form(&self, x: &Vector<T>) -> Result<T, MatrixError> {
        if !self.is_square() || x.len() != self.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "vector of length {} against {}x{} form",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut acc = T::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let row_sum = self
                .row(i)
                .iter()
                .zip(x.iter())
                .fold(T::zero(), |s, (b, xj)| s + b.clone() * xj.clone());
            acc = acc + xi.clone() * row_sum;
        }
        Ok(acc)
    }

    /// Solves `x · self = z` for a unit upper-triangular `self`.
    ///
    /// Column `j` of the product only involves `x_0..=x_j`, so the solve is a
    /// forward sweep with no division.
    pub fn solve_unit_upper(&self, z: &Vector<T>) -> Result<Vector<T>, MatrixError> {
        if !self.is_square() || z.len() != self.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "right-hand side of length {} against {}x{} system",
                z.len(),
                self.rows,
                self.cols
            )));
        }
        for i in 0..self.rows {
            if !self.get(i, i).is_one() {
                return Err(MatrixError::NotUnitUpperTriangular { row: i, col: i });
            }
            if let Some(j) = (0..i).find(|&j| !self.get(i, j).is_zero()) {
                return Err(MatrixError::NotUnitUpperTriangular { row: i, col: j });
            }
        }
        let mut x: Vec<T> = Vec::with_capacity(z.len());
        for j in 0..self.cols {
            let partial = x
                .iter()
                .enumerate()
                .fold(T::zero(), |s, (i, xi)| s + xi.clone() * self.get(i, j).clone());
            x.push(z[j].clone() - partial);
        }
        Ok(Vector::new(x))
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.data.chunks(self.cols).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

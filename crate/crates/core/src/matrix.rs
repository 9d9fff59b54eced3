//! Dense matrices over a [`FieldSpec`].
//!
//! Entries are stored row-major. Elimination uses first-nonzero pivoting, so
//! every derived object (RREF, kernel basis, solutions, transvection lists)
//! is a deterministic function of the input.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

/// Reduced row-echelon form together with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Determinant, adjugate and (when it exists) inverse of a square matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseAdjugate {
    pub det: Scalar,
    pub adj: Matrix,
    pub inv: Option<Matrix>,
}

/// Which side the unknown sits on in [`Matrix::solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Solve `A X = B`.
    Right,
    /// Solve `X A = B`.
    Left,
}

/// Proof that a linear system has no solution.
///
/// For [`Side::Right`] (`A X = B`) `combination` is a row vector `y` with
/// `y A = 0` and `(y B)[index] = value != 0`. For [`Side::Left`]
/// (`X A = B`) it is a column vector `z` with `A z = 0` and
/// `(B z)[index] = value != 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub side: Side,
    pub combination: Matrix,
    pub index: usize,
    pub value: Scalar,
}

impl Certificate {
    /// Re-derives `0 = value` from the system; true iff the certificate is sound.
    pub fn check(&self, a: &Matrix, b: &Matrix) -> bool {
        if self.value.is_zero() {
            return false;
        }
        let (lhs, rhs) = match self.side {
            Side::Right => match (self.combination.checked_mul(a), self.combination.checked_mul(b)) {
                (Ok(l), Ok(r)) => (l, r.get(0, self.index).clone()),
                _ => return false,
            },
            Side::Left => match (a.checked_mul(&self.combination), b.checked_mul(&self.combination)) {
                (Ok(l), Ok(r)) => (l, r.get(self.index, 0).clone()),
                _ => return false,
            },
        };
        lhs.is_zero() && rhs == self.value
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Matrix),
    NoSolution(Certificate),
}

impl SolveOutcome {
    pub fn solution(self) -> Option<Matrix> {
        match self {
            SolveOutcome::Solved(m) => Some(m),
            SolveOutcome::NoSolution(_) => None,
        }
    }
}

/// `I + factor * E_{row,col}` with `row != col`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transvection {
    pub row: usize,
    pub col: usize,
    pub factor: Scalar,
}

impl Transvection {
    pub fn to_matrix(&self, n: usize) -> Matrix {
        let field = self.factor.field();
        let mut m = Matrix::identity(field, n);
        m.set(self.row, self.col, self.factor.clone());
        m
    }
}

/// `M = T_1 ... T_k * diag(1, ..., 1, det M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransvectionFactorization {
    pub n: usize,
    pub transvections: Vec<Transvection>,
    pub dilatation: Matrix,
}

impl TransvectionFactorization {
    pub fn matrices(&self) -> Vec<Matrix> {
        self.transvections.iter().map(|t| t.to_matrix(self.n)).collect()
    }

    pub fn product(&self) -> Matrix {
        self.matrices()
            .iter()
            .fold(Matrix::identity(self.dilatation.field(), self.n), |acc, t| &acc * t)
            .mul_ref(&self.dilatation)
    }
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// The elementary matrix `E_{i,j}` of size `rows x cols` (0-based indices).
    pub fn unit(field: FieldSpec, rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(field, rows, cols);
        m.data[i * cols + j] = field.one();
        m
    }

    /// `diag(I_r, 0)` of shape `rows x cols`.
    pub fn rank_block(field: FieldSpec, rows: usize, cols: usize, r: usize) -> Self {
        let mut m = Matrix::zeros(field, rows, cols);
        for i in 0..r.min(rows).min(cols) {
            m.data[i * cols + i] = field.one();
        }
        m
    }

    /// `J_r = diag(I_r, 0)` in `M_n`.
    pub fn j_r(field: FieldSpec, n: usize, r: usize) -> Self {
        Matrix::rank_block(field, n, n, r)
    }

    pub fn diag(field: FieldSpec, entries: &[Scalar]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(field, n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    /// Permutation matrix sending `e_j` to `e_{perm[j]}`.
    pub fn permutation(field: FieldSpec, perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Matrix::zeros(field, n, n);
        for (j, &i) in perm.iter().enumerate() {
            m.data[i * n + j] = field.one();
        }
        m
    }

    pub fn from_vec(field: FieldSpec, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|s| s.field() != field) {
            return Err(Error::FieldMismatch(field, bad.field()));
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dims("ragged rows"));
        }
        Matrix::from_vec(field, r, c, rows.into_iter().flatten().collect())
    }

    /// Integer-literal constructor, entries reduced into `field`.
    pub fn from_ints<R: AsRef<[i64]>>(field: FieldSpec, rows: &[R]) -> Self {
        let scalars = rows
            .iter()
            .map(|row| row.as_ref().iter().map(|&x| Scalar::from_i64(field, x)).collect())
            .collect();
        Matrix::from_rows(field, scalars).expect("integer rows")
    }

    pub fn column(field: FieldSpec, entries: Vec<Scalar>) -> Result<Self> {
        let n = entries.len();
        Matrix::from_vec(field, n, 1, entries)
    }

    pub fn row_vector(field: FieldSpec, entries: Vec<Scalar>) -> Result<Self> {
        let n = entries.len();
        Matrix::from_vec(field, 1, n, entries)
    }

    /// Invertible matrix whose first column is the nonzero column vector `x`,
    /// completed with unit columns.
    pub fn with_first_column(x: &Matrix) -> Result<Matrix> {
        if x.cols != 1 {
            return Err(Error::dims("with_first_column expects a column vector"));
        }
        let n = x.rows;
        let pivot = x.data.iter().position(|s| !s.is_zero()).ok_or(Error::SingularInput)?;
        let mut m = Matrix::zeros(x.field, n, n);
        m.set_block(0, 0, x);
        for (k, j) in (0..n).filter(|&j| j != pivot).enumerate() {
            m.data[j * n + k + 1] = x.field.one();
        }
        Ok(m)
    }

    /// `self = x y` with `x` a column and `y` a row, when `self` has rank one.
    pub fn rank_one_factors(&self) -> Option<(Matrix, Matrix)> {
        if self.rank() != 1 {
            return None;
        }
        let pos = self.data.iter().position(|s| !s.is_zero())?;
        let (i, j) = (pos / self.cols, pos % self.cols);
        let x = self.col(j);
        let y = self.row(i).scale(&self.get(i, j).inv()?);
        Some((x, y))
    }

    /// Invertible matrix whose first row is the nonzero row vector `y`.
    pub fn with_first_row(y: &Matrix) -> Result<Matrix> {
        if y.rows != 1 {
            return Err(Error::dims("with_first_row expects a row vector"));
        }
        Ok(Matrix::with_first_column(&y.transpose())?.transpose())
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        assert_eq!(value.field(), self.field, "Matrix::set field");
        self.data[i * self.cols + j] = value;
    }

    /// Row-major entries; this is the vectorization used project-wide.
    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Scalar> {
        self.data
    }

    pub fn row(&self, i: usize) -> Matrix {
        self.block(i, 0, 1, self.cols)
    }

    pub fn col(&self, j: usize) -> Matrix {
        self.block(0, j, self.rows, 1)
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Matrix {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "block out of range");
        let mut data = Vec::with_capacity(h * w);
        for i in r0..r0 + h {
            data.extend_from_slice(&self.data[i * self.cols + c0..i * self.cols + c0 + w]);
        }
        Matrix {
            field: self.field,
            rows: h,
            cols: w,
            data,
        }
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "set_block out of range"
        );
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = b.get(i, j).clone();
            }
        }
    }

    /// Removes row `i`.
    pub fn without_row(&self, i: usize) -> Matrix {
        let mut data = Vec::with_capacity((self.rows - 1) * self.cols);
        for r in (0..self.rows).filter(|&r| r != i) {
            data.extend_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        Matrix {
            field: self.field,
            rows: self.rows - 1,
            cols: self.cols,
            data,
        }
    }

    /// Inserts a zero row so that it becomes row `i`.
    pub fn with_zero_row(&self, i: usize) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows + 1, self.cols);
        for r in 0..self.rows {
            let dst = if r < i { r } else { r + 1 };
            for c in 0..self.cols {
                out.data[dst * self.cols + c] = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        self.field.check_same(&other.field)?;
        if self.shape() != other.shape() {
            return Err(Error::dims(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn checked_sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn checked_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.field.check_same(&other.field)?;
        if self.cols != other.rows {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k * other.cols + j];
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.data[idx] = &out.data[idx] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Product that panics on incompatible operands.
    pub fn mul_ref(&self, other: &Matrix) -> Matrix {
        self.checked_mul(other).expect("Matrix::mul")
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        assert_eq!(s.field(), self.field, "Matrix::scale field");
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn trace(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::dims("trace of a non-square matrix"));
        }
        Ok((0..self.rows).fold(self.field.zero(), |acc, i| acc + self.get(i, i)))
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Matrix) -> Result<Scalar> {
        self.field.check_same(&other.field)?;
        if self.rows != other.cols || self.cols != other.rows {
            return Err(Error::dims("trace_product shape"));
        }
        let mut acc = self.field.zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if !a.is_zero() {
                    acc = acc + a * other.get(k, i);
                }
            }
        }
        Ok(acc)
    }

    /// Gauss-Jordan on `self`, pivoting only in the first `pivot_cols` columns.
    /// Row operations are applied across all columns.
    fn eliminate(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        let cols = self.cols;
        for c in 0..pivot_cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.data[i * cols + c].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = self.data[r * cols + c].inv().expect("nonzero pivot");
            if !inv.is_one() {
                for j in c..cols {
                    self.data[r * cols + j] = &self.data[r * cols + j] * &inv;
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c].clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..cols {
                    let sub = &f * &self.data[r * cols + j];
                    if !sub.is_zero() {
                        self.data[i * cols + j] = &self.data[i * cols + j] - &sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> Rref {
        let mut reduced = self.clone();
        let pivots = reduced.eliminate(self.cols);
        Rref {
            rank: pivots.len(),
            reduced,
            pivots,
        }
    }

    /// RREF plus the invertible `T` with `T * self = reduced`.
    pub fn rref_with_transform(&self) -> (Rref, Matrix) {
        let mut aug = self.hstack(&Matrix::identity(self.field, self.rows));
        let pivots = aug.eliminate(self.cols);
        let reduced = aug.block(0, 0, self.rows, self.cols);
        let transform = aug.block(0, self.cols, self.rows, self.rows);
        (
            Rref {
                rank: pivots.len(),
                reduced,
                pivots,
            },
            transform,
        )
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack rows");
        let mut out = Matrix::zeros(self.field, self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        out
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack cols");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of `{x : self * x = 0}` as column vectors, one per free column.
    pub fn kernel_basis(&self) -> Vec<Matrix> {
        let Rref { reduced, pivots, .. } = self.rref();
        let free = (0..self.cols).filter(|c| !pivots.contains(c));
        free.map(|f| {
            let mut x = Matrix::zeros(self.field, self.cols, 1);
            x.data[f] = self.field.one();
            for (i, &pc) in pivots.iter().enumerate() {
                x.data[pc] = -reduced.get(i, f);
            }
            x
        })
        .collect()
    }

    /// Basis of `{y : y * self = 0}` as row vectors.
    pub fn left_kernel_basis(&self) -> Vec<Matrix> {
        self.transpose()
            .kernel_basis()
            .into_iter()
            .map(|v| v.transpose())
            .collect()
    }

    pub fn det(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::dims("determinant of a non-square matrix"));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[i * n + c].is_zero()) else {
                return Ok(self.field.zero());
            };
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let pivot = a[c * n + c].clone();
            det = &det * &pivot;
            let inv = pivot.inv().expect("nonzero pivot");
            for i in c + 1..n {
                let f = &a[i * n + c] * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let sub = &f * &a[c * n + j];
                    a[i * n + j] = &a[i * n + j] - &sub;
                }
            }
        }
        Ok(det)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let (rref, t) = self.rref_with_transform();
        (rref.rank == self.rows).then_some(t)
    }

    /// Deletes row `i` and column `j`.
    pub fn minor(&self, i: usize, j: usize) -> Matrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in (0..self.rows).filter(|&r| r != i) {
            for c in (0..self.cols).filter(|&c| c != j) {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix {
            field: self.field,
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// Matrix of cofactors `Com(M)`; `adj(M) = Com(M)^T`.
    pub fn cofactor_matrix(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::dims("cofactors of a non-square matrix"));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(Matrix::identity(self.field, 1));
        }
        let mut com = Matrix::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                let m = self.minor(i, j).det()?;
                com.data[i * n + j] = if (i + j) % 2 == 0 { m } else { -m };
            }
        }
        Ok(com)
    }

    pub fn adjugate(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::dims("adjugate of a non-square matrix"));
        }
        if self.rows > 3 {
            if let Some(inv) = self.inverse() {
                return Ok(inv.scale(&self.det()?));
            }
        }
        Ok(self.cofactor_matrix()?.transpose())
    }

    pub fn inverse_and_adjugate(&self) -> Result<InverseAdjugate> {
        let det = self.det()?;
        let adj = self.adjugate()?;
        let inv = det.inv().map(|d| adj.scale(&d));
        Ok(InverseAdjugate { det, adj, inv })
    }

    /// `P * self * P^{-1}`.
    pub fn conjugate(&self, p: &Matrix) -> Result<Matrix> {
        let p_inv = p.inverse().ok_or(Error::SingularConjugator)?;
        p.checked_mul(self)?.checked_mul(&p_inv)
    }

    /// Solves `a X = b` ([`Side::Right`]) or `X a = b` ([`Side::Left`]).
    pub fn solve(a: &Matrix, b: &Matrix, side: Side) -> Result<SolveOutcome> {
        a.field.check_same(&b.field)?;
        match side {
            Side::Right => {
                if a.rows != b.rows {
                    return Err(Error::dims("solve: A and B row counts differ"));
                }
                let (rref, t) = a.rref_with_transform();
                let tb = t.mul_ref(b);
                for i in rref.rank..a.rows {
                    if let Some(k) = (0..b.cols).find(|&k| !tb.get(i, k).is_zero()) {
                        return Ok(SolveOutcome::NoSolution(Certificate {
                            side,
                            combination: t.row(i),
                            index: k,
                            value: tb.get(i, k).clone(),
                        }));
                    }
                }
                let mut x = Matrix::zeros(a.field, a.cols, b.cols);
                for (i, &pc) in rref.pivots.iter().enumerate() {
                    for k in 0..b.cols {
                        x.data[pc * b.cols + k] = tb.get(i, k).clone();
                    }
                }
                Ok(SolveOutcome::Solved(x))
            }
            Side::Left => {
                if a.cols != b.cols {
                    return Err(Error::dims("solve: A and B column counts differ"));
                }
                Ok(match Matrix::solve(&a.transpose(), &b.transpose(), Side::Right)? {
                    SolveOutcome::Solved(x) => SolveOutcome::Solved(x.transpose()),
                    SolveOutcome::NoSolution(c) => SolveOutcome::NoSolution(Certificate {
                        side,
                        combination: c.combination.transpose(),
                        ..c
                    }),
                })
            }
        }
    }

    /// Invertible `G`, `H` and the rank `r` with `G * self * H = diag(I_r, 0)`.
    pub fn rank_normal_form(&self) -> (Matrix, Matrix, usize) {
        let (rref, g) = self.rref_with_transform();
        let r = rref.rank;
        let mut y = Matrix::zeros(self.field, self.cols, self.cols);
        y.set_block(0, 0, &rref.reduced.block(0, 0, r, self.cols));
        let free = (0..self.cols).filter(|c| !rref.pivots.contains(c));
        for (k, f) in free.enumerate() {
            y.data[(r + k) * self.cols + f] = self.field.one();
        }
        let h = y.inverse().expect("pivot rows completed by unit rows");
        (g, h, r)
    }

    /// Writes an invertible matrix as transvections times `diag(1, ..., 1, det)`.
    pub fn transvection_factor(&self) -> Result<TransvectionFactorization> {
        if !self.is_square() {
            return Err(Error::dims("transvection_factor of a non-square matrix"));
        }
        let n = self.rows;
        let field = self.field;
        if !self.is_invertible() {
            return Err(Error::SingularInput);
        }
        let mut w = self.clone();
        // Each entry (target, source, lambda) is the row operation R_t += lambda R_s,
        // i.e. left multiplication by I + lambda E_{t,s}.
        let mut ops: Vec<(usize, usize, Scalar)> = Vec::new();
        let mut apply = |w: &mut Matrix, t: usize, s: usize, lambda: Scalar| {
            if lambda.is_zero() {
                return;
            }
            for j in 0..n {
                let add = &lambda * w.get(s, j);
                w.data[t * n + j] = &w.data[t * n + j] + &add;
            }
            ops.push((t, s, lambda));
        };
        let one = field.one();
        for j in 0..n.saturating_sub(1) {
            if !w.get(j, j).is_one() {
                if let Some(i) = (j + 1..n).find(|&i| !w.get(i, j).is_zero()) {
                    let lambda = (&one - w.get(j, j)) / w.get(i, j);
                    apply(&mut w, j, i, lambda);
                } else {
                    let a = w.get(j, j).clone();
                    apply(&mut w, j + 1, j, one.clone());
                    apply(&mut w, j, j + 1, (&one - &a) / &a);
                }
            }
            for i in (0..n).filter(|&i| i != j) {
                let f = -w.get(i, j);
                apply(&mut w, i, j, f);
            }
        }
        if n > 0 {
            let last = n - 1;
            let d = w.get(last, last).clone();
            for i in 0..last {
                let f = -(w.get(i, last) / &d);
                apply(&mut w, i, last, f);
            }
        }
        let transvections = ops
            .into_iter()
            .map(|(t, s, lambda)| Transvection {
                row: t,
                col: s,
                factor: -lambda,
            })
            .collect();
        Ok(TransvectionFactorization {
            n,
            transvections,
            dilatation: w,
        })
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.checked_add(rhs).expect("Matrix::add")
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.checked_sub(rhs).expect("Matrix::sub")
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.mul_ref(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<String>>,
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        RawMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawMatrix::deserialize(d)?;
        if raw.rows == 0 || raw.cols == 0 {
            return Err(D::Error::custom("matrix dimensions must be positive"));
        }
        if raw.entries.len() != raw.rows || raw.entries.iter().any(|r| r.len() != raw.cols) {
            return Err(D::Error::custom(format!(
                "entries do not match declared shape {}x{}",
                raw.rows, raw.cols
            )));
        }
        let data = raw
            .entries
            .iter()
            .flatten()
            .map(|t| Scalar::parse(raw.field, t))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Matrix::from_vec(raw.field, raw.rows, raw.cols, data).map_err(D::Error::custom)
    }
}

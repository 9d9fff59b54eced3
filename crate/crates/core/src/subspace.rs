//! Linear and affine subspaces of matrix spaces, and hyperplanes of `M_n`.
//!
//! Subspaces are stored through a canonical basis: the nonzero rows of the
//! reduced echelon form of the row-major vectorized spanning set. Equal
//! subspaces therefore compare equal structurally.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::{Matrix, Side, SolveOutcome};

fn reduce_against<'a>(rows: impl Iterator<Item = &'a [Scalar]>, pivots: &[usize], v: &[Scalar]) -> Vec<Scalar> {
    let mut v = v.to_vec();
    for (row, &p) in rows.zip(pivots) {
        let c = v[p].clone();
        if c.is_zero() {
            continue;
        }
        for (x, r) in v.iter_mut().zip(row).skip(p) {
            if !r.is_zero() {
                *x = &*x - &(&c * r);
            }
        }
    }
    v
}

/// Incremental reduced echelon basis of a subspace of `F^dim`.
#[derive(Clone, Debug)]
pub struct SpanBuilder {
    field: FieldSpec,
    dim: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl SpanBuilder {
    pub fn new(field: FieldSpec, dim: usize) -> Self {
        SpanBuilder {
            field,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    /// Remainder of `v` after subtracting its projection on the pivot coordinates.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        reduce_against(self.rows.iter().map(Vec::as_slice), &self.pivots, v)
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim, "SpanBuilder::insert length");
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].inv().expect("nonzero");
        for x in v.iter_mut().skip(p) {
            *x = &*x * &inv;
        }
        for row in &mut self.rows {
            let c = row[p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, r) in row.iter_mut().zip(&v).skip(p) {
                if !r.is_zero() {
                    *x = &*x - &(&c * r);
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, v);
        true
    }

    fn into_parts(self) -> (Vec<Vec<Scalar>>, Vec<usize>) {
        (self.rows, self.pivots)
    }

    fn field(&self) -> FieldSpec {
        self.field
    }
}

/// A linear subspace of `rows x cols` matrices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearSubspace {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    basis: Vec<Matrix>,
    pivots: Vec<usize>,
}

impl LinearSubspace {
    fn from_builder(b: SpanBuilder, rows: usize, cols: usize) -> Self {
        let field = b.field();
        let (vecs, pivots) = b.into_parts();
        let basis = vecs
            .into_iter()
            .map(|v| Matrix::from_vec(field, rows, cols, v).expect("builder shape"))
            .collect();
        LinearSubspace {
            field,
            rows,
            cols,
            basis,
            pivots,
        }
    }

    /// Canonical span of `mats`, all of shape `rows x cols` over `field`.
    pub fn span_from(field: FieldSpec, rows: usize, cols: usize, mats: &[Matrix]) -> Result<Self> {
        let mut b = SpanBuilder::new(field, rows * cols);
        for m in mats {
            field.check_same(&m.field())?;
            if m.shape() != (rows, cols) {
                return Err(Error::dims(format!(
                    "spanning matrix is {}x{}, expected {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )));
            }
            b.insert(m.entries());
        }
        Ok(LinearSubspace::from_builder(b, rows, cols))
    }

    /// Span of square matrices of size `n`.
    pub fn span(field: FieldSpec, n: usize, mats: &[Matrix]) -> Result<Self> {
        LinearSubspace::span_from(field, n, n, mats)
    }

    pub fn zero(field: FieldSpec, rows: usize, cols: usize) -> Self {
        LinearSubspace::from_builder(SpanBuilder::new(field, rows * cols), rows, cols)
    }

    pub fn full(field: FieldSpec, rows: usize, cols: usize) -> Self {
        LinearSubspace::units(field, rows, cols, |_, _| true)
    }

    /// Span of the `E_{i,j}` selected by `keep`.
    pub fn units(field: FieldSpec, rows: usize, cols: usize, keep: impl Fn(usize, usize) -> bool) -> Self {
        let mut pivots = Vec::new();
        let mut basis = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if keep(i, j) {
                    pivots.push(i * cols + j);
                    basis.push(Matrix::unit(field, rows, cols, i, j));
                }
            }
        }
        LinearSubspace {
            field,
            rows,
            cols,
            basis,
            pivots,
        }
    }

    /// Kernel of a linear map from `rows x cols` matrices to any matrix space.
    pub fn kernel_of(field: FieldSpec, rows: usize, cols: usize, f: impl Fn(&Matrix) -> Matrix) -> Self {
        let units: Vec<Matrix> = (0..rows * cols)
            .map(|k| Matrix::unit(field, rows, cols, k / cols, k % cols))
            .collect();
        let images: Vec<Matrix> = units.iter().map(&f).collect();
        let out_len = images.first().map_or(0, |m| m.rows() * m.cols());
        let mut map = Matrix::zeros(field, out_len, rows * cols);
        for (k, img) in images.iter().enumerate() {
            for (i, x) in img.entries().iter().enumerate() {
                map.set(i, k, x.clone());
            }
        }
        let kernel: Vec<Matrix> = map
            .kernel_basis()
            .into_iter()
            .map(|v| Matrix::from_vec(field, rows, cols, v.into_entries()).expect("shape"))
            .collect();
        LinearSubspace::span_from(field, rows, cols, &kernel).expect("kernel shape")
    }

    /// Trace-zero matrices.
    pub fn sl(field: FieldSpec, n: usize) -> Self {
        Hyperplane::sl(field, n).subspace()
    }

    /// Matrices whose first column is supported on its first entry (codim `n - 1`).
    pub fn w1(field: FieldSpec, n: usize) -> Self {
        LinearSubspace::w_block(field, n, 1)
    }

    /// `V_k`: first row vanishes on its first `k` entries.
    pub fn v_block(field: FieldSpec, n: usize, k: usize) -> Self {
        LinearSubspace::units(field, n, n, |i, j| !(i == 0 && j < k))
    }

    /// `W_k`: first column vanishes below its first `k` entries.
    pub fn w_block(field: FieldSpec, n: usize, k: usize) -> Self {
        LinearSubspace::units(field, n, n, |i, j| !(j == 0 && i >= k))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Matrix size of a square ambient space.
    pub fn n(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.codim() == 0
    }

    fn builder(&self) -> SpanBuilder {
        SpanBuilder {
            field: self.field,
            dim: self.ambient_dim(),
            rows: self.basis.iter().map(|b| b.entries().to_vec()).collect(),
            pivots: self.pivots.clone(),
        }
    }

    fn compatible(&self, m: &Matrix) -> bool {
        m.field() == self.field && m.shape() == (self.rows, self.cols)
    }

    /// `m` minus its canonical component in the subspace.
    pub fn remainder(&self, m: &Matrix) -> Matrix {
        assert!(self.compatible(m), "remainder: incompatible matrix");
        let v = reduce_against(self.basis.iter().map(Matrix::entries), &self.pivots, m.entries());
        Matrix::from_vec(self.field, self.rows, self.cols, v).expect("shape")
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.compatible(m) && self.remainder(m).is_zero()
    }

    /// Coordinates of `m` in the canonical basis, if `m` lies in the subspace.
    pub fn coordinates(&self, m: &Matrix) -> Option<Vec<Scalar>> {
        if !self.contains(m) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| m.entries()[p].clone()).collect())
    }

    pub fn combination(&self, coeffs: &[Scalar]) -> Matrix {
        assert_eq!(coeffs.len(), self.dim(), "combination length");
        let mut out = Matrix::zeros(self.field, self.rows, self.cols);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if !c.is_zero() {
                out = &out + &b.scale(c);
            }
        }
        out
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, spread: i64) -> Matrix {
        let coeffs: Vec<_> = (0..self.dim()).map(|_| self.field.random(rng, spread)).collect();
        self.combination(&coeffs)
    }

    pub fn is_subspace_of(&self, other: &LinearSubspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &LinearSubspace) -> Result<LinearSubspace> {
        self.check_compatible(other)?;
        let mut b = self.builder();
        for m in &other.basis {
            b.insert(m.entries());
        }
        Ok(LinearSubspace::from_builder(b, self.rows, self.cols))
    }

    fn check_compatible(&self, other: &LinearSubspace) -> Result<()> {
        self.field.check_same(&other.field)?;
        if self.shape() != other.shape() {
            return Err(Error::dims("subspaces of different matrix spaces"));
        }
        Ok(())
    }

    /// Annihilator under the entrywise dot product of vectorizations.
    fn annihilator(&self) -> LinearSubspace {
        let d = self.ambient_dim();
        let mut constraints = Matrix::zeros(self.field, self.dim(), d);
        for (i, b) in self.basis.iter().enumerate() {
            for (j, x) in b.entries().iter().enumerate() {
                constraints.set(i, j, x.clone());
            }
        }
        let kernel: Vec<Matrix> = constraints
            .kernel_basis()
            .into_iter()
            .map(|k| Matrix::from_vec(self.field, self.rows, self.cols, k.into_entries()).expect("shape"))
            .collect();
        LinearSubspace::span_from(self.field, self.rows, self.cols, &kernel).expect("kernel shape")
    }

    pub fn intersect(&self, other: &LinearSubspace) -> Result<LinearSubspace> {
        self.check_compatible(other)?;
        Ok(self.annihilator().sum(&other.annihilator())?.annihilator())
    }

    /// `{A : tr(A B) = 0 for all B}`; lives in `cols x rows` matrices.
    pub fn ortho_complement(&self) -> LinearSubspace {
        // tr(A B) = vec(A) . vec(B^T)
        let transposed: Vec<Matrix> = self.basis.iter().map(Matrix::transpose).collect();
        LinearSubspace::span_from(self.field, self.cols, self.rows, &transposed)
            .expect("transposed shape")
            .annihilator()
    }

    /// Image under a linear map into `rows x cols` matrices.
    pub fn map(&self, rows: usize, cols: usize, f: impl Fn(&Matrix) -> Matrix) -> LinearSubspace {
        let images: Vec<Matrix> = self.basis.iter().map(f).collect();
        LinearSubspace::span_from(self.field, rows, cols, &images).expect("map image shape")
    }

    /// `P V P^{-1}`.
    pub fn conjugate(&self, p: &Matrix) -> Result<LinearSubspace> {
        let p_inv = p.inverse().ok_or(Error::SingularConjugator)?;
        let (r, c) = self.shape();
        Ok(self.map(r, c, |b| &(p * b) * &p_inv))
    }

    /// `L V R` for square `L`, `R`.
    pub fn transform(&self, left: &Matrix, right: &Matrix) -> LinearSubspace {
        let (r, c) = self.shape();
        self.map(r, c, |b| &(left * b) * right)
    }
}

/// `span{B C : B in V, C in W}` computed over basis pairs.
pub fn product_span_two(v: &LinearSubspace, w: &LinearSubspace) -> Result<LinearSubspace> {
    v.field.check_same(&w.field)?;
    if v.cols != w.rows {
        return Err(Error::dims("product_span_two: inner dimensions differ"));
    }
    let (rows, cols) = (v.rows, w.cols);
    let mut b = SpanBuilder::new(v.field, rows * cols);
    'outer: for x in &v.basis {
        for y in &w.basis {
            b.insert((x * y).entries());
            if b.is_full() {
                break 'outer;
            }
        }
    }
    Ok(LinearSubspace::from_builder(b, rows, cols))
}

/// `span{A B - B A}` over basis pairs of a square subspace.
pub fn commutator_span(v: &LinearSubspace) -> LinearSubspace {
    let n = v.n();
    let mut b = SpanBuilder::new(v.field, n * n);
    for (i, x) in v.basis.iter().enumerate() {
        for y in &v.basis[i + 1..] {
            b.insert((&(x * y) - &(y * x)).entries());
        }
    }
    LinearSubspace::from_builder(b, n, n)
}

/// `{base + t : t in translation}` with `base` reduced modulo the translation space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineSubspace {
    base: Matrix,
    translation: LinearSubspace,
}

impl AffineSubspace {
    pub fn new(base: Matrix, translation: LinearSubspace) -> Result<Self> {
        translation.field.check_same(&base.field())?;
        if base.shape() != translation.shape() {
            return Err(Error::dims("affine base and translation space differ in shape"));
        }
        let base = translation.remainder(&base);
        Ok(AffineSubspace { base, translation })
    }

    pub fn linear(v: LinearSubspace) -> Self {
        let (r, c) = v.shape();
        AffineSubspace {
            base: Matrix::zeros(v.field, r, c),
            translation: v,
        }
    }

    pub fn point(m: Matrix) -> Self {
        let (r, c) = m.shape();
        AffineSubspace {
            translation: LinearSubspace::zero(m.field(), r, c),
            base: m,
        }
    }

    /// `{M : tr(A M) = value}`.
    pub fn level_set(normal: &Matrix, value: Scalar) -> Result<Self> {
        let h = Hyperplane::new(normal.clone())?;
        let n = h.n();
        let field = h.field();
        field.check_same(&value.field())?;
        // tr(A M) = sum A_{j,i} M_{i,j}
        let pos = normal
            .entries()
            .iter()
            .position(|x| !x.is_zero())
            .expect("nonzero normal");
        let (j, i) = (pos / n, pos % n);
        let base = Matrix::unit(field, n, n, i, j).scale(&(&value / normal.get(j, i)));
        AffineSubspace::new(base, h.subspace())
    }

    pub fn base(&self) -> &Matrix {
        &self.base
    }

    pub fn translation(&self) -> &LinearSubspace {
        &self.translation
    }

    pub fn field(&self) -> FieldSpec {
        self.translation.field
    }

    pub fn shape(&self) -> (usize, usize) {
        self.translation.shape()
    }

    pub fn n(&self) -> usize {
        self.translation.n()
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    pub fn codim(&self) -> usize {
        self.translation.codim()
    }

    /// True iff the subspace passes through zero.
    pub fn is_linear(&self) -> bool {
        self.base.is_zero()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.translation.compatible(m) && self.translation.contains(&(m - &self.base))
    }

    pub fn point_at(&self, coeffs: &[Scalar]) -> Matrix {
        &self.base + &self.translation.combination(coeffs)
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, spread: i64) -> Matrix {
        &self.base + &self.translation.random_element(rng, spread)
    }

    pub fn intersect_affine(&self, other: &AffineSubspace) -> Result<Option<AffineSubspace>> {
        self.translation.check_compatible(&other.translation)?;
        let (u, v) = (&self.translation, &other.translation);
        let field = self.field();
        let d = u.ambient_dim();
        let mut system = Matrix::zeros(field, d, u.dim() + v.dim());
        for (k, b) in u.basis.iter().enumerate() {
            for (i, x) in b.entries().iter().enumerate() {
                system.set(i, k, x.clone());
            }
        }
        for (k, b) in v.basis.iter().enumerate() {
            for (i, x) in b.entries().iter().enumerate() {
                system.set(i, u.dim() + k, -x);
            }
        }
        let diff = &other.base - &self.base;
        let rhs = Matrix::column(field, diff.into_entries())?;
        match Matrix::solve(&system, &rhs, Side::Right)? {
            SolveOutcome::NoSolution(_) => Ok(None),
            SolveOutcome::Solved(x) => {
                let coeffs: Vec<_> = (0..u.dim()).map(|k| x.get(k, 0).clone()).collect();
                let point = self.point_at(&coeffs);
                Ok(Some(AffineSubspace::new(point, u.intersect(v)?)?))
            }
        }
    }

    /// Restricts to matrices with the given entries; `None` if empty.
    pub fn constrain_entries(&self, fixed: &[(usize, usize, Scalar)]) -> Result<Option<AffineSubspace>> {
        let (r, c) = self.shape();
        let field = self.field();
        let positions: BTreeSet<(usize, usize)> = fixed.iter().map(|&(i, j, _)| (i, j)).collect();
        let mut base = Matrix::zeros(field, r, c);
        for (i, j, v) in fixed {
            base.set(*i, *j, v.clone());
        }
        let slice = AffineSubspace::new(
            base,
            LinearSubspace::units(field, r, c, |i, j| !positions.contains(&(i, j))),
        )?;
        self.intersect_affine(&slice)
    }

    /// Image under a linear map into `rows x cols` matrices.
    pub fn map(&self, rows: usize, cols: usize, f: impl Fn(&Matrix) -> Matrix) -> AffineSubspace {
        let base = f(&self.base);
        let translation = self.translation.map(rows, cols, &f);
        AffineSubspace::new(base, translation).expect("map image shape")
    }

    /// `P A P^{-1}`.
    pub fn conjugate(&self, p: &Matrix) -> Result<AffineSubspace> {
        let p_inv = p.inverse().ok_or(Error::SingularConjugator)?;
        let (r, c) = self.shape();
        Ok(self.map(r, c, |b| &(p * b) * &p_inv))
    }

    /// Number of elements over a finite field, saturating at `u128::MAX`.
    pub fn cardinality(&self) -> Result<u128> {
        let p = self.field().modulus().ok_or(Error::InfiniteField)?;
        Ok((0..self.dim()).fold(1u128, |acc, _| acc.saturating_mul(p as u128)))
    }

    /// Every element exactly once, in odometer order over coefficient residues.
    pub fn enumerate(&self, ceiling: u128) -> Result<AffinePoints> {
        let count = self.cardinality()?;
        if count > ceiling {
            return Err(Error::TooLarge { count, ceiling });
        }
        Ok(AffinePoints {
            p: self.field().modulus().expect("finite") as usize,
            basis: self.translation.basis.clone(),
            digits: vec![0; self.dim()],
            current: Some(self.base.clone()),
        })
    }
}

/// Iterator returned by [`AffineSubspace::enumerate`].
pub struct AffinePoints {
    p: usize,
    basis: Vec<Matrix>,
    digits: Vec<usize>,
    current: Option<Matrix>,
}

impl Iterator for AffinePoints {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        let out = self.current.take()?;
        // Adding b_k at a wrap from p - 1 to 0 contributes p * b_k = 0 overall.
        let mut next = out.clone();
        for k in 0..self.digits.len() {
            next = &next + &self.basis[k];
            self.digits[k] += 1;
            if self.digits[k] < self.p {
                self.current = Some(next);
                return Some(out);
            }
            self.digits[k] = 0;
        }
        Some(out)
    }
}

/// `{M : tr(A M) = 0}` for a nonzero normal `A`, scaled so its first nonzero entry is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    normal: Matrix,
}

impl Hyperplane {
    pub fn new(normal: Matrix) -> Result<Self> {
        if !normal.is_square() {
            return Err(Error::dims("hyperplane normal must be square"));
        }
        let lead = normal
            .entries()
            .iter()
            .find(|x| !x.is_zero())
            .ok_or_else(|| Error::pre("hyperplane normal must be nonzero"))?;
        let inv = lead.inv().expect("nonzero");
        Ok(Hyperplane {
            normal: normal.scale(&inv),
        })
    }

    pub fn sl(field: FieldSpec, n: usize) -> Self {
        Hyperplane {
            normal: Matrix::identity(field, n),
        }
    }

    /// `{M : M_{j,i} = 0}` (normal `E_{i,j}`).
    pub fn entry_zero(field: FieldSpec, n: usize, i: usize, j: usize) -> Self {
        Hyperplane {
            normal: Matrix::unit(field, n, n, j, i),
        }
    }

    pub fn normal(&self) -> &Matrix {
        &self.normal
    }

    pub fn n(&self) -> usize {
        self.normal.rows()
    }

    pub fn field(&self) -> FieldSpec {
        self.normal.field()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        m.field() == self.field()
            && m.shape() == self.normal.shape()
            && self.normal.trace_product(m).expect("shape checked").is_zero()
    }

    pub fn subspace(&self) -> LinearSubspace {
        LinearSubspace::span(self.field(), self.n(), std::slice::from_ref(&self.normal))
            .expect("normal shape")
            .ortho_complement()
    }

    pub fn to_affine(&self) -> AffineSubspace {
        AffineSubspace::linear(self.subspace())
    }

    /// `{Y : M Y in H}`, which is `M^{-1} H` for invertible `M`; normal `A M`.
    pub fn pullback_left(&self, m: &Matrix) -> Result<Hyperplane> {
        Hyperplane::new(self.normal.checked_mul(m)?)
    }

    /// `P H P^{-1}`; normal `P A P^{-1}`.
    pub fn conjugate(&self, p: &Matrix) -> Result<Hyperplane> {
        Hyperplane::new(self.normal.conjugate(p)?)
    }
}

/// Result of intersecting an affine subspace with a hyperplane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Meet {
    Point(Matrix),
    /// The intersection is empty, so the translation space lies inside the hyperplane.
    TranslationContained,
}

pub fn affine_meet_hyperplane(f: &Hyperplane, g: &AffineSubspace) -> Result<Meet> {
    f.field().check_same(&g.field())?;
    if g.shape() != f.normal.shape() {
        return Err(Error::dims("affine_meet_hyperplane shape"));
    }
    let a = &f.normal;
    let c0 = a.trace_product(&g.base)?;
    if c0.is_zero() {
        return Ok(Meet::Point(g.base.clone()));
    }
    for b in g.translation.basis() {
        let ci = a.trace_product(b)?;
        if !ci.is_zero() {
            return Ok(Meet::Point(&g.base - &b.scale(&(&c0 / &ci))));
        }
    }
    Ok(Meet::TranslationContained)
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum SubspaceKind {
    Linear,
    Affine,
    Hyperplane,
}

#[derive(Serialize, Deserialize)]
struct RawSubspace {
    kind: SubspaceKind,
    n: usize,
    field: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<Vec<Matrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal: Option<Matrix>,
}

/// Any of the three subspace kinds, as read from JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnySubspace {
    Linear(LinearSubspace),
    Affine(AffineSubspace),
    Hyperplane(Hyperplane),
}

impl AnySubspace {
    pub fn to_affine(&self) -> AffineSubspace {
        match self {
            AnySubspace::Linear(v) => AffineSubspace::linear(v.clone()),
            AnySubspace::Affine(a) => a.clone(),
            AnySubspace::Hyperplane(h) => h.to_affine(),
        }
    }

    fn from_raw(raw: RawSubspace) -> Result<Self> {
        let n = raw.n;
        if n == 0 {
            return Err(Error::Parse("n must be positive".into()));
        }
        let check = |m: &Matrix| -> Result<()> {
            raw.field.check_same(&m.field())?;
            if m.shape() != (n, n) {
                return Err(Error::dims(format!("expected {n}x{n} matrices")));
            }
            Ok(())
        };
        let span = |basis: &Option<Vec<Matrix>>| -> Result<LinearSubspace> {
            let mats = basis.as_deref().unwrap_or(&[]);
            mats.iter().try_for_each(check)?;
            LinearSubspace::span(raw.field, n, mats)
        };
        Ok(match raw.kind {
            SubspaceKind::Linear => AnySubspace::Linear(span(&raw.basis)?),
            SubspaceKind::Affine => {
                let base = raw
                    .base
                    .clone()
                    .ok_or_else(|| Error::Parse("affine subspace needs a base".into()))?;
                check(&base)?;
                AnySubspace::Affine(AffineSubspace::new(base, span(&raw.basis)?)?)
            }
            SubspaceKind::Hyperplane => {
                let normal = raw
                    .normal
                    .clone()
                    .ok_or_else(|| Error::Parse("hyperplane needs a normal".into()))?;
                check(&normal)?;
                AnySubspace::Hyperplane(Hyperplane::new(normal)?)
            }
        })
    }

    fn raw(&self) -> RawSubspace {
        match self {
            AnySubspace::Linear(v) => RawSubspace {
                kind: SubspaceKind::Linear,
                n: v.rows,
                field: v.field,
                basis: Some(v.basis.clone()),
                base: None,
                normal: None,
            },
            AnySubspace::Affine(a) => RawSubspace {
                kind: SubspaceKind::Affine,
                n: a.translation.rows,
                field: a.field(),
                basis: Some(a.translation.basis.clone()),
                base: Some(a.base.clone()),
                normal: None,
            },
            AnySubspace::Hyperplane(h) => RawSubspace {
                kind: SubspaceKind::Hyperplane,
                n: h.n(),
                field: h.field(),
                basis: Some(h.subspace().basis.clone()),
                base: None,
                normal: Some(h.normal.clone()),
            },
        }
    }
}

impl Serialize for AnySubspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AnySubspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        AnySubspace::from_raw(RawSubspace::deserialize(d)?).map_err(D::Error::custom)
    }
}

macro_rules! subspace_serde {
    ($ty:ident, $variant:ident, $what:literal) => {
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                AnySubspace::$variant(self.clone()).serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                use serde::de::Error as _;
                match AnySubspace::deserialize(d)? {
                    AnySubspace::$variant(x) => Ok(x),
                    _ => Err(D::Error::custom(concat!("expected a ", $what))),
                }
            }
        }
    };
}

subspace_serde!(LinearSubspace, Linear, "linear subspace");
subspace_serde!(AffineSubspace, Affine, "affine subspace");
subspace_serde!(Hyperplane, Hyperplane, "hyperplane");

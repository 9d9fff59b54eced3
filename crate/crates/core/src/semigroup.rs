//! Factoring arbitrary matrices as products of elements of an affine
//! subspace `V` of `M_n(F)` with `codim V < n - 1`.
//!
//! Invertible targets are handled after conjugating `V` into a "good"
//! position: first columns of `V` cover `F^n`, and the lower-right blocks of
//! `{M in V : M e_1 = e_1}` have small codimension in `M_{n-1}`. The target is
//! then peeled as `N * Q_1 ... Q_r * U`, where `N` fixes the first column,
//! the `Q_k` come from the `(n-1)`-dimensional problem and `U` is a unipotent
//! row correction. For `n = 3` and `V = {tr = a}` no good position exists and
//! explicit identities are used. Singular targets reduce to invertible ones
//! through a rank `n - 1` element of `V`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::Matrix;
use crate::subspace::{AffineSubspace, LinearSubspace};
use crate::witness::{find_nonsingular_in_affine, find_rank_r_in_affine, random_invertible, SearchBudget};

/// `target = factors[0] * ... * factors[k-1]` with every factor in `subspace`.
///
/// `conjugator` is the change of basis the solver worked in (identity when
/// none was needed); the factors themselves are in original coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFactorization {
    pub factors: Vec<Matrix>,
    pub target: Matrix,
    pub subspace: AffineSubspace,
    pub conjugator: Matrix,
}

impl ChainFactorization {
    pub fn new(factors: Vec<Matrix>, target: Matrix, subspace: AffineSubspace, conjugator: Matrix) -> Result<Self> {
        let chain = ChainFactorization {
            factors,
            target,
            subspace,
            conjugator,
        };
        if chain.factors.is_empty() {
            return Err(Error::contradiction("empty chain"));
        }
        if !chain.is_verified() {
            return Err(Error::contradiction(
                "chain does not multiply to the target inside the subspace",
            ));
        }
        Ok(chain)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn product(&self) -> Matrix {
        product(self.target.field(), self.target.shape().0, &self.factors)
    }

    pub fn is_verified(&self) -> bool {
        self.factors.iter().all(|f| self.subspace.contains(f)) && self.product() == self.target
    }
}

/// A conjugated copy of `V` in good position, with the derived objects the
/// invertible factorization runs on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodSituation {
    /// `P` with `P V P^{-1}` in good position.
    pub conjugator: Matrix,
    /// `P V P^{-1}`.
    pub conjugated: AffineSubspace,
    /// `{M in P V P^{-1} : M e_1 = e_1}`.
    pub slice: AffineSubspace,
    /// Lower-right `(n-1) x (n-1)` blocks of `slice`.
    pub k_image: AffineSubspace,
    /// First rows (without the corner) of translation-space elements supported on row 1.
    pub l_h: LinearSubspace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Situation {
    Good(Box<GoodSituation>),
    /// `n = 3` and `V = {M : tr M = a}`.
    Exceptional(Scalar),
}

/// Conjugates `V` into good position, or reports the exceptional trace case.
pub fn good_situation_transform(space: &AffineSubspace, budget: &SearchBudget) -> Result<Situation> {
    let (rows, cols) = space.shape();
    if rows != cols {
        return Err(Error::dims("good situation needs square matrices"));
    }
    let n = rows;
    if n < 2 {
        return Err(Error::pre("good situation needs n >= 2"));
    }
    if space.codim() >= n - 1 && space.codim() > 0 {
        return Err(Error::pre(format!(
            "codimension {} is not below n - 1 = {}",
            space.codim(),
            n - 1
        )));
    }
    let field = space.field();
    if n == 3 && *space.translation() == LinearSubspace::sl(field, 3) {
        return Ok(Situation::Exceptional(space.base().trace()?));
    }
    for p in conjugator_candidates(field, n, budget) {
        if let Some(gs) = try_good(space, &p)? {
            return Ok(Situation::Good(Box::new(gs)));
        }
    }
    Err(Error::BudgetExhausted(
        "no conjugator puts the subspace in good position".into(),
    ))
}

fn try_good(space: &AffineSubspace, p: &Matrix) -> Result<Option<GoodSituation>> {
    let n = space.n();
    let field = space.field();
    let conjugated = space.conjugate(p)?;
    // First columns cover F^n iff no nonzero annihilator is supported on the first row.
    let first_row = LinearSubspace::units(field, n, n, |i, _| i == 0);
    if !conjugated
        .translation()
        .ortho_complement()
        .intersect(&first_row)?
        .is_zero()
    {
        return Ok(None);
    }
    let Some(slice) = conjugated.constrain_entries(&first_column_e1(field, n))? else {
        return Ok(None);
    };
    let m = n - 1;
    let k_image = slice.map(m, m, |x| x.block(1, 1, m, m));
    if k_image.codim() > 0 && k_image.codim() + 1 >= m {
        return Ok(None);
    }
    let h = conjugated
        .translation()
        .intersect(&LinearSubspace::units(field, n, n, |i, j| i == 0 && j > 0))?;
    let l_h = h.map(1, m, |x| x.block(0, 1, 1, m));
    if l_h.is_zero() {
        return Ok(None);
    }
    Ok(Some(GoodSituation {
        conjugator: p.clone(),
        conjugated,
        slice,
        k_image,
        l_h,
    }))
}

/// Identity, permutations, random invertibles, then all of `GL_n` when small.
fn conjugator_candidates(field: FieldSpec, n: usize, budget: &SearchBudget) -> impl Iterator<Item = Matrix> {
    const MAX_PERMUTATIONS: usize = 720;
    let perms = Permutations::new(n)
        .take(MAX_PERMUTATIONS)
        .map(move |p| Matrix::permutation(field, &p));
    let mut rng = budget.rng();
    let randoms = (0..budget.max_random_trials).map(move |_| random_invertible(field, n, &mut rng));
    let exhaustive = budget
        .allow_exhaustive
        .then(|| AffineSubspace::linear(LinearSubspace::full(field, n, n)).enumerate(budget.exhaustive_ceiling as u128))
        .and_then(|r| r.ok())
        .into_iter()
        .flatten()
        .filter(Matrix::is_invertible);
    perms.chain(randoms).chain(exhaustive)
}

/// Lexicographic permutations of `0..n`, starting from the identity.
struct Permutations {
    next: Option<Vec<usize>>,
}

impl Permutations {
    fn new(n: usize) -> Self {
        Permutations {
            next: Some((0..n).collect()),
        }
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut p = cur.clone();
        if let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) {
            let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
            p.swap(i - 1, j);
            p[i..].reverse();
            self.next = Some(p);
        }
        Some(cur)
    }
}

fn first_column_e1(field: FieldSpec, n: usize) -> Vec<(usize, usize, Scalar)> {
    (0..n)
        .map(|i| (i, 0, if i == 0 { field.one() } else { field.zero() }))
        .collect()
}

fn product(field: FieldSpec, n: usize, factors: &[Matrix]) -> Matrix {
    factors.iter().fold(Matrix::identity(field, n), |acc, f| &acc * f)
}

/// `[[1, row], [0, I]]`.
fn unipotent(row: &Matrix) -> Matrix {
    let n = row.shape().1 + 1;
    let mut u = Matrix::identity(row.field(), n);
    u.set_block(0, 1, row);
    u
}

/// Canonical preimages under a linear map restricted to an affine subspace:
/// free coordinates are set to zero.
#[derive(Debug)]
struct Lift {
    space: AffineSubspace,
    image_base: Matrix,
    transform: Matrix,
    pivots: Vec<usize>,
    shape: (usize, usize),
    map: fn(&Matrix) -> Matrix,
}

impl Lift {
    fn new(space: &AffineSubspace, shape: (usize, usize), map: fn(&Matrix) -> Matrix) -> Lift {
        let field = space.field();
        let basis = space.translation().basis();
        let len = shape.0 * shape.1;
        let mut phi = Matrix::zeros(field, len, basis.len());
        for (k, b) in basis.iter().enumerate() {
            for (i, x) in map(b).entries().iter().enumerate() {
                phi.set(i, k, x.clone());
            }
        }
        let (rref, transform) = phi.rref_with_transform();
        Lift {
            space: space.clone(),
            image_base: map(space.base()),
            transform,
            pivots: rref.pivots,
            shape,
            map,
        }
    }

    fn lift(&self, y: &Matrix) -> Option<Matrix> {
        let field = self.space.field();
        let len = self.shape.0 * self.shape.1;
        let diff = y - &self.image_base;
        let rhs = Matrix::column(field, diff.entries().to_vec()).ok()?;
        let reduced = self.transform.mul_ref(&rhs);
        if (self.pivots.len()..len).any(|i| !reduced.get(i, 0).is_zero()) {
            return None;
        }
        let mut coeffs = vec![field.zero(); self.space.translation().dim()];
        for (i, &p) in self.pivots.iter().enumerate() {
            coeffs[p] = reduced.get(i, 0).clone();
        }
        let x = self.space.point_at(&coeffs);
        debug_assert_eq!((self.map)(&x), *y);
        Some(x)
    }
}

fn lower_right(x: &Matrix) -> Matrix {
    let m = x.shape().0 - 1;
    x.block(1, 1, m, m)
}

/// Factorizer for one affine subspace; plans and auxiliary chains are cached.
#[derive(Debug)]
pub struct SemigroupFactorizer {
    space: AffineSubspace,
    budget: SearchBudget,
    plan: Plan,
    rank_deficient: OnceLock<Result<Matrix>>,
}

#[derive(Debug)]
enum Plan {
    Full,
    Exceptional(Scalar),
    Good(Box<GoodPlan>),
}

#[derive(Debug)]
struct GoodPlan {
    gs: GoodSituation,
    p_inv: Matrix,
    sub: SemigroupFactorizer,
    lift: Lift,
    kit: OnceLock<Result<RowKit>>,
}

/// Chains producing `[[1, L_k + c E P_k], [0, I]]` for every `k`, where `E`
/// spans part of `l_h` and the `E P_k` form the standard basis of rows.
#[derive(Debug)]
struct RowKit {
    e: Matrix,
    pieces: Vec<KitPiece>,
}

#[derive(Debug)]
struct KitPiece {
    inv_chain: Vec<Matrix>,
    fwd_chain: Vec<Matrix>,
    offset: Matrix,
}

impl SemigroupFactorizer {
    pub fn new(space: &AffineSubspace, budget: &SearchBudget) -> Result<Self> {
        let (rows, cols) = space.shape();
        if rows != cols {
            return Err(Error::dims("semigroup factorization needs square matrices"));
        }
        let n = rows;
        let plan = if space.codim() == 0 {
            Plan::Full
        } else if space.codim() + 1 >= n {
            return Err(Error::pre(format!(
                "codimension {} is not below n - 1 = {}",
                space.codim(),
                n.saturating_sub(1)
            )));
        } else {
            match good_situation_transform(space, budget)? {
                Situation::Exceptional(a) => Plan::Exceptional(a),
                Situation::Good(gs) => {
                    let gs = *gs;
                    let p_inv = gs.conjugator.inverse().ok_or(Error::SingularConjugator)?;
                    let sub = SemigroupFactorizer::new(&gs.k_image, budget)?;
                    let lift = Lift::new(&gs.slice, (n - 1, n - 1), lower_right);
                    Plan::Good(Box::new(GoodPlan {
                        gs,
                        p_inv,
                        sub,
                        lift,
                        kit: OnceLock::new(),
                    }))
                }
            }
        };
        Ok(SemigroupFactorizer {
            space: space.clone(),
            budget: budget.clone(),
            plan,
            rank_deficient: OnceLock::new(),
        })
    }

    pub fn space(&self) -> &AffineSubspace {
        &self.space
    }

    pub fn good_situation(&self) -> Option<&GoodSituation> {
        match &self.plan {
            Plan::Good(g) => Some(&g.gs),
            _ => None,
        }
    }

    pub fn is_exceptional(&self) -> bool {
        matches!(self.plan, Plan::Exceptional(_))
    }

    pub fn factor(&self, m: &Matrix) -> Result<ChainFactorization> {
        self.check_target(m)?;
        let factors = self.factor_vec(m)?;
        let conjugator = match &self.plan {
            Plan::Good(g) => g.gs.conjugator.clone(),
            _ => Matrix::identity(m.field(), m.shape().0),
        };
        ChainFactorization::new(factors, m.clone(), self.space.clone(), conjugator)
    }

    fn check_target(&self, m: &Matrix) -> Result<()> {
        self.space.field().check_same(&m.field())?;
        if m.shape() != self.space.shape() {
            return Err(Error::dims("target shape differs from the subspace"));
        }
        Ok(())
    }

    fn factor_vec(&self, m: &Matrix) -> Result<Vec<Matrix>> {
        if self.space.contains(m) {
            return Ok(vec![m.clone()]);
        }
        if m.is_invertible() {
            return self.factor_invertible(m);
        }
        let b0 = self
            .rank_deficient
            .get_or_init(|| rank_deficient_element(&self.space, &self.budget))
            .clone()?;
        singular_chain(m, &b0, &mut |x| self.factor_invertible(x))
    }

    fn factor_invertible(&self, m: &Matrix) -> Result<Vec<Matrix>> {
        if self.space.contains(m) {
            return Ok(vec![m.clone()]);
        }
        match &self.plan {
            Plan::Full => Ok(vec![m.clone()]),
            Plan::Exceptional(a) => exceptional_chain(a, m),
            Plan::Good(g) => {
                let local = &(&g.gs.conjugator * m) * &g.p_inv;
                let chain = self.good_chain(g, &local)?;
                Ok(chain.iter().map(|f| &(&g.p_inv * f) * &g.gs.conjugator).collect())
            }
        }
    }

    /// Factors an invertible `m` over `g.gs.conjugated`.
    fn good_chain(&self, g: &GoodPlan, m: &Matrix) -> Result<Vec<Matrix>> {
        let n = m.shape().0;
        let field = m.field();
        let first = find_first_column_match(&g.gs.conjugated, &m.col(0), &self.budget)?;
        let rest = &first
            .inverse()
            .ok_or(Error::contradiction("first-column match is singular"))?
            * m;
        let sub_target = lower_right(&rest);
        let mut chain = vec![first];
        let mut qs = Vec::new();
        for piece in g.sub.factor_vec(&sub_target)? {
            qs.push(
                g.lift
                    .lift(&piece)
                    .ok_or(Error::contradiction("block factor outside the slice image"))?,
            );
        }
        let reached = product(field, n, &qs);
        let correction = &rest.block(0, 1, 1, n - 1) - &reached.block(0, 1, 1, n - 1);
        chain.extend(qs);
        if !correction.is_zero() {
            chain.extend(g.row_chain(&correction)?);
        }
        Ok(chain)
    }
}

impl GoodPlan {
    fn row_chain(&self, row: &Matrix) -> Result<Vec<Matrix>> {
        let u = unipotent(row);
        if self.gs.slice.contains(&u) {
            return Ok(vec![u]);
        }
        let kit = self
            .kit
            .get_or_init(|| build_row_kit(self))
            .as_ref()
            .map_err(Clone::clone)?;
        let n = row.shape().1 + 1;
        let mut c = row.clone();
        for piece in &kit.pieces {
            c = &c - &piece.offset;
        }
        let mut chain = Vec::new();
        for (k, piece) in kit.pieces.iter().enumerate() {
            let mut inv = piece.inv_chain.clone();
            let ck = c.get(0, k);
            if !ck.is_zero() {
                let mut bump = Matrix::zeros(row.field(), n, n);
                bump.set_block(0, 1, &kit.e.scale(ck));
                let last = inv.last_mut().expect("chains are never empty");
                *last = &*last + &bump;
            }
            chain.extend(inv);
            chain.extend(piece.fwd_chain.iter().cloned());
        }
        Ok(chain)
    }
}

fn build_row_kit(g: &GoodPlan) -> Result<RowKit> {
    let m = g.gs.k_image.n();
    let field = g.gs.k_image.field();
    let e =
        g.gs.l_h
            .basis()
            .first()
            .ok_or(Error::contradiction("empty row space"))?
            .clone();
    let t_inv = Matrix::with_first_row(&e)?
        .inverse()
        .ok_or(Error::contradiction("completion of E is singular"))?;
    let lift_all = |target: &Matrix| -> Result<Vec<Matrix>> {
        g.sub
            .factor_vec(target)?
            .iter()
            .map(|p| {
                g.lift
                    .lift(p)
                    .ok_or(Error::contradiction("block factor outside the slice image"))
            })
            .collect()
    };
    let mut pieces = Vec::with_capacity(m);
    for k in 0..m {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.swap(0, k);
        let r = &t_inv * &Matrix::permutation(field, &perm);
        let r_inv = r.inverse().ok_or(Error::contradiction("kit matrix is singular"))?;
        let inv_chain = lift_all(&r_inv)?;
        let fwd_chain = lift_all(&r)?;
        let top = |chain: &[Matrix]| product(field, m + 1, chain).block(0, 1, 1, m);
        let offset = &(&top(&inv_chain) * &r) + &top(&fwd_chain);
        pieces.push(KitPiece {
            inv_chain,
            fwd_chain,
            offset,
        });
    }
    Ok(RowKit { e, pieces })
}

/// A nonsingular `N` in `space` whose first column is `c`.
fn find_first_column_match(space: &AffineSubspace, c: &Matrix, budget: &SearchBudget) -> Result<Matrix> {
    let n = space.n();
    let field = space.field();
    let g_inv = Matrix::with_first_column(c)?;
    let g = g_inv
        .inverse()
        .ok_or(Error::contradiction("column completion is singular"))?;
    let moved = space.map(n, n, |x| &g * x);
    let slice = moved
        .constrain_entries(&first_column_e1(field, n))?
        .ok_or(Error::contradiction("first columns do not cover the target column"))?;
    let block = slice.map(n - 1, n - 1, lower_right);
    let k0 = find_nonsingular_in_affine(&block, budget)?;
    let fixed: Vec<_> = (0..n - 1)
        .flat_map(|i| (0..n - 1).map(move |j| (i, j)))
        .map(|(i, j)| (i + 1, j + 1, k0.get(i, j).clone()))
        .collect();
    let x = slice
        .constrain_entries(&fixed)?
        .ok_or(Error::contradiction("nonsingular block has no preimage"))?;
    Ok(&g_inv * x.base())
}

/// A rank `n - 1` element of `space`, built inside `space ∩ {row i = 0}`.
fn rank_deficient_element(space: &AffineSubspace, budget: &SearchBudget) -> Result<Matrix> {
    let n = space.n();
    let field = space.field();
    let dual = space.translation().ortho_complement();
    // Zeroing row i costs exactly n dimensions when no annihilator lives on column i.
    let row = (0..n)
        .find(|&i| {
            dual.intersect(&LinearSubspace::units(field, n, n, |_, j| j == i))
                .is_ok_and(|u| u.is_zero())
        })
        .ok_or_else(|| Error::pre("every column carries an annihilator"))?;
    let fixed: Vec<_> = (0..n).map(|j| (row, j, field.zero())).collect();
    let w = space
        .constrain_entries(&fixed)?
        .ok_or(Error::contradiction("row-zero slice is empty"))?;
    let deleted = w.map(n - 1, n, |x| x.without_row(row));
    let b = find_rank_r_in_affine(&deleted, n - 1, Some(n * (n - 2) + 1), budget)?;
    let b0 = b.with_zero_row(row);
    if !space.contains(&b0) || b0.rank() != n - 1 {
        return Err(Error::contradiction("rank n - 1 element failed verification"));
    }
    Ok(b0)
}

fn singular_chain(
    m: &Matrix,
    b0: &Matrix,
    solver: &mut dyn FnMut(&Matrix) -> Result<Vec<Matrix>>,
) -> Result<Vec<Matrix>> {
    let n = m.shape().0;
    let field = m.field();
    let (g, h, r) = m.rank_normal_form();
    let p_m = g.inverse().expect("normal form transforms are invertible");
    let q_m = h.inverse().expect("normal form transforms are invertible");
    let (g0, h0, _) = b0.rank_normal_form();
    // I - E_kk = (G_k^{-1} G0) B0 (H0 H_k^{-1})
    let mut sides = Vec::new();
    for k in r..n {
        let mut d = Matrix::identity(field, n);
        d.set(k, k, field.zero());
        let (gk, hk, _) = d.rank_normal_form();
        let left = &gk.inverse().expect("invertible") * &g0;
        let right = &h0 * &hk.inverse().expect("invertible");
        sides.push((left, right));
    }
    let mut chain = Vec::new();
    let mut carry = p_m;
    for (left, right) in sides {
        push_invertible(&mut chain, &(&carry * &left), solver)?;
        chain.push(b0.clone());
        carry = right;
    }
    push_invertible(&mut chain, &(&carry * &q_m), solver)?;
    Ok(chain)
}

fn push_invertible(
    chain: &mut Vec<Matrix>,
    x: &Matrix,
    solver: &mut dyn FnMut(&Matrix) -> Result<Vec<Matrix>>,
) -> Result<()> {
    if !x.is_identity() {
        chain.extend(solver(x)?);
    }
    Ok(())
}

/// Reduces a singular target to invertible ones via a rank `n - 1` element
/// of `space`; `solver` must factor invertible matrices over `space`.
pub fn singular_reduce(
    space: &AffineSubspace,
    m: &Matrix,
    solver: &mut dyn FnMut(&Matrix) -> Result<Vec<Matrix>>,
    budget: &SearchBudget,
) -> Result<ChainFactorization> {
    space.field().check_same(&m.field())?;
    let n = space.n();
    if m.shape() != space.shape() {
        return Err(Error::dims("target shape differs from the subspace"));
    }
    if m.rank() == n {
        return Err(Error::pre("singular_reduce needs a singular target"));
    }
    if space.codim() + 1 >= n {
        return Err(Error::pre(format!("codimension {} is not below n - 1", space.codim())));
    }
    let b0 = rank_deficient_element(space, budget)?;
    let factors = singular_chain(m, &b0, solver)?;
    ChainFactorization::new(factors, m.clone(), space.clone(), Matrix::identity(m.field(), n))
}

/// Factors any `m` over `space` (`codim < n - 1`).
pub fn semigroup_factor(space: &AffineSubspace, m: &Matrix, budget: &SearchBudget) -> Result<ChainFactorization> {
    SemigroupFactorizer::new(space, budget)?.factor(m)
}

/// Factors `[[1, row], [0, I]]` over the slice of a good situation.
pub fn unipotent_row_factor(gs: &GoodSituation, row: &Matrix, budget: &SearchBudget) -> Result<ChainFactorization> {
    let n = gs.slice.n();
    gs.slice.field().check_same(&row.field())?;
    if row.shape() != (1, n - 1) {
        return Err(Error::dims("row correction must be 1 x (n-1)"));
    }
    let p_inv = gs.conjugator.inverse().ok_or(Error::SingularConjugator)?;
    let plan = GoodPlan {
        gs: gs.clone(),
        p_inv,
        sub: SemigroupFactorizer::new(&gs.k_image, budget)?,
        lift: Lift::new(&gs.slice, (n - 1, n - 1), lower_right),
        kit: OnceLock::new(),
    };
    let factors = plan.row_chain(row)?;
    ChainFactorization::new(factors, unipotent(row), gs.slice.clone(), gs.conjugator.clone())
}

/// Factors any `m` in `M_3` over `{M : tr M = a}`.
pub fn exceptional_factor(a: &Scalar, m: &Matrix, budget: &SearchBudget) -> Result<ChainFactorization> {
    let field = a.field();
    field.check_same(&m.field())?;
    if m.shape() != (3, 3) {
        return Err(Error::dims("the trace case is 3 x 3"));
    }
    let space = AffineSubspace::level_set(&Matrix::identity(field, 3), a.clone())?;
    let factors = if m.is_invertible() {
        exceptional_chain(a, m)?
    } else {
        semigroup_factor(&space, m, budget)?.factors
    };
    ChainFactorization::new(factors, m.clone(), space, Matrix::identity(field, 3))
}

fn exceptional_chain(a: &Scalar, m: &Matrix) -> Result<Vec<Matrix>> {
    let field = m.field();
    if m.trace()? == *a {
        return Ok(vec![m.clone()]);
    }
    if let Some(chain) = elementary_chain(a, m)? {
        return Ok(chain);
    }
    let tf = m.transvection_factor()?;
    let mut pieces = tf.matrices();
    if !tf.dilatation.is_identity() {
        pieces.push(tf.dilatation.clone());
    }
    if pieces.is_empty() {
        // m = I: split as T T^{-1}.
        let t = Matrix::from_ints(field, &[[1, 1, 0], [0, 1, 0], [0, 0, 1]]);
        let t_inv = Matrix::from_ints(field, &[[1, -1, 0], [0, 1, 0], [0, 0, 1]]);
        pieces = vec![t, t_inv];
    }
    debug_assert_eq!(product(field, 3, &pieces), *m);
    let mut chain = Vec::new();
    for p in &pieces {
        match elementary_chain(a, p)? {
            Some(c) => chain.extend(c),
            None => return Err(Error::contradiction("transvection piece is not elementary")),
        }
    }
    Ok(chain)
}

/// Chains for matrices `I + x y` of rank-one perturbation (transvection or
/// dilatation conjugates); `None` for anything else.
fn elementary_chain(a: &Scalar, m: &Matrix) -> Result<Option<Vec<Matrix>>> {
    let field = m.field();
    if m.trace()? == *a {
        return Ok(Some(vec![m.clone()]));
    }
    let id = Matrix::identity(field, 3);
    let d = m - &id;
    let Some((x, y)) = d.rank_one_factors() else {
        return Ok(None);
    };
    let t = d.trace()?;
    if t.is_zero() {
        // m = S (I + E_12) S^{-1}
        let s = transvection_frame(&x, &y)?;
        let s_inv = s
            .inverse()
            .ok_or(Error::contradiction("transvection frame is singular"))?;
        let conj = |z: &Matrix| &(&s * z) * &s_inv;
        if field.modulus() == Some(2) {
            // tr(I + E_12) = 1 in F_2, so a = 0 here.
            let xm = Matrix::from_ints(field, &[[0, 1, 1], [0, 0, 1], [1, 0, 0]]);
            let ym = Matrix::from_ints(field, &[[0, 0, 1], [1, 0, 0], [0, 1, 0]]);
            return Ok(Some(vec![conj(&xm), conj(&ym)]));
        }
        // I + E_12 = X_l Y_l with l = 2, both dilatation conjugates.
        let two = Scalar::from_i64(field, 2);
        let half = two.inv().expect("characteristic is not 2");
        let one = field.one();
        let xl = Matrix::from_rows(
            field,
            vec![
                vec![two.clone(), &one - &two, field.zero()],
                vec![field.zero(), one.clone(), field.zero()],
                vec![field.zero(), field.zero(), one.clone()],
            ],
        )?;
        let yl = Matrix::from_rows(
            field,
            vec![
                vec![half, one.clone(), field.zero()],
                vec![field.zero(), one.clone(), field.zero()],
                vec![field.zero(), field.zero(), one],
            ],
        )?;
        let mut chain = Vec::new();
        for piece in [conj(&xl), conj(&yl)] {
            chain.extend(elementary_chain(a, &piece)?.ok_or(Error::contradiction("dilatation split failed"))?);
        }
        return Ok(Some(chain));
    }
    // m = S diag(mu, 1, 1) S^{-1} with mu = 1 + tr(x y).
    let mu = &field.one() + &t;
    let s = dilatation_frame(&x, &y)?;
    let one = field.one();
    let am1 = a - &one;
    let z1 = Matrix::from_rows(
        field,
        vec![
            vec![am1.clone(), one.clone(), field.zero()],
            vec![one.clone(), field.zero(), field.zero()],
            vec![field.zero(), field.zero(), one.clone()],
        ],
    )?;
    let z2 = Matrix::from_rows(
        field,
        vec![
            vec![field.zero(), mu.clone(), field.zero()],
            vec![one.clone(), am1, field.zero()],
            vec![field.zero(), field.zero(), one],
        ],
    )?;
    // z1 z2 = [[1, (mu+1)(a-1), 0], [0, mu, 0], [0, 0, 1]] is itself a diag(mu, 1, 1) conjugate.
    let g = &z1 * &z2;
    let (gx, gy) = (&g - &id)
        .rank_one_factors()
        .ok_or(Error::contradiction("z1 z2 - I is not rank one"))?;
    let u = dilatation_frame(&gx, &gy)?;
    let c = &s
        * &u.inverse()
            .ok_or(Error::contradiction("dilatation frame is singular"))?;
    let c_inv = c
        .inverse()
        .ok_or(Error::contradiction("dilatation frame is singular"))?;
    Ok(Some(vec![&(&c * &z1) * &c_inv, &(&c * &z2) * &c_inv]))
}

/// `S` with `S E_12 S^{-1} = x y`, given `y x = 0`.
fn transvection_frame(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    let field = x.field();
    let kernel = y.kernel_basis();
    let k = kernel
        .iter()
        .find(|k| x.hstack(k).rank() == 2)
        .ok_or(Error::contradiction("kernel of y is too small"))?
        .clone();
    let j = (0..3).find(|&j| !y.get(0, j).is_zero()).expect("nonzero row");
    let w = Matrix::unit(field, 3, 1, j, 0).scale(&y.get(0, j).inv().expect("nonzero"));
    Ok(x.hstack(&w).hstack(&k))
}

/// `S` with `S diag(mu, 1, 1) S^{-1} = I + x y`, given `y x != 0`.
fn dilatation_frame(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    let kernel = y.kernel_basis();
    if kernel.len() != 2 {
        return Err(Error::contradiction("row functional has the wrong kernel"));
    }
    Ok(x.hstack(&kernel[0]).hstack(&kernel[1]))
}

//! Factorizations with two factors: sums of pair products, products of two
//! hyperplane elements, the 2x2 classification and degenerate pairs of
//! subspaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Side, SolveOutcome};
use crate::subspace::{
    affine_meet_hyperplane, product_span_two, AffineSubspace, Hyperplane, LinearSubspace, Meet, SpanBuilder,
};
use crate::witness::{find_rank_r_in_affine, inverse_pair, search_nonsingular, SearchBudget};

/// `target = left * right` with `left in left_space`, `right in right_space`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairFactorization {
    pub left: Matrix,
    pub right: Matrix,
    pub target: Matrix,
    pub left_space: Hyperplane,
    pub right_space: Hyperplane,
    pub left_member: bool,
    pub right_member: bool,
}

impl PairFactorization {
    /// Checks product and memberships; refuses to build an unverified result.
    pub fn new(left: Matrix, right: Matrix, target: &Matrix, h1: &Hyperplane, h2: &Hyperplane) -> Result<Self> {
        let left_member = h1.contains(&left);
        let right_member = h2.contains(&right);
        if !left_member || !right_member || &(&left * &right) != target {
            return Err(Error::contradiction(format!(
                "pair factorization failed verification (left in H1: {left_member}, right in H2: {right_member})"
            )));
        }
        Ok(PairFactorization {
            left,
            right,
            target: target.clone(),
            left_space: h1.clone(),
            right_space: h2.clone(),
            left_member,
            right_member,
        })
    }

    pub fn is_verified(&self) -> bool {
        self.left_member
            && self.right_member
            && self.left_space.contains(&self.left)
            && self.right_space.contains(&self.right)
            && &self.left * &self.right == self.target
    }
}

/// `target = sum left_i * right_i` with every factor in `space`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumOfProducts {
    pub terms: Vec<(Matrix, Matrix)>,
    pub target: Matrix,
}

impl SumOfProducts {
    pub fn sum(&self) -> Matrix {
        let (r, c) = self.target.shape();
        self.terms
            .iter()
            .fold(Matrix::zeros(self.target.field(), r, c), |acc, (a, b)| &acc + &(a * b))
    }

    pub fn is_valid_for(&self, space: &LinearSubspace) -> bool {
        self.sum() == self.target && self.terms.iter().all(|(a, b)| space.contains(a) && space.contains(b))
    }
}

/// Writes `m` as a sum of products of pairs from `v`; needs `codim v < n - 1`.
pub fn sum_of_products_decompose(v: &LinearSubspace, m: &Matrix) -> Result<SumOfProducts> {
    let n = v.n();
    if v.codim() + 1 >= n {
        return Err(Error::pre(format!(
            "codimension {} is not below n - 1 = {}",
            v.codim(),
            n - 1
        )));
    }
    sum_of_products_decompose_unchecked(v, m)
}

/// As [`sum_of_products_decompose`] without the codimension check; reports
/// [`Error::SpanDeficient`] when `m` is outside the span of the products.
pub fn sum_of_products_decompose_unchecked(v: &LinearSubspace, m: &Matrix) -> Result<SumOfProducts> {
    v.field().check_same(&m.field())?;
    if m.shape() != v.shape() {
        return Err(Error::dims("target and subspace differ in size"));
    }
    let n = v.n();
    let field = v.field();
    let id = Matrix::identity(field, n);
    if v.contains(m) && v.contains(&id) {
        return Ok(SumOfProducts {
            terms: vec![(m.clone(), id)],
            target: m.clone(),
        });
    }

    // Independent products, remembered with their basis indices.
    let basis = v.basis();
    let mut span = SpanBuilder::new(field, n * n);
    let mut chosen: Vec<(usize, usize, Matrix)> = Vec::new();
    'outer: for (i, b) in basis.iter().enumerate() {
        for (j, c) in basis.iter().enumerate() {
            let prod = b * c;
            if span.insert(prod.entries()) {
                chosen.push((i, j, prod));
                if span.is_full() {
                    break 'outer;
                }
            }
        }
    }
    let mut system = Matrix::zeros(field, n * n, chosen.len());
    for (k, (_, _, prod)) in chosen.iter().enumerate() {
        for (r, x) in prod.entries().iter().enumerate() {
            system.set(r, k, x.clone());
        }
    }
    let rhs = Matrix::column(field, m.entries().to_vec())?;
    let coeffs = match Matrix::solve(&system, &rhs, Side::Right)? {
        SolveOutcome::Solved(x) => x,
        SolveOutcome::NoSolution(_) => return Err(Error::SpanDeficient),
    };
    // Group by right factor: sum_i c_ij B_i stays in v.
    let mut lefts: Vec<Option<Matrix>> = vec![None; basis.len()];
    for (k, (i, j, _)) in chosen.iter().enumerate() {
        let c = coeffs.get(k, 0);
        if c.is_zero() {
            continue;
        }
        let add = basis[*i].scale(c);
        lefts[*j] = Some(match lefts[*j].take() {
            Some(acc) => &acc + &add,
            None => add,
        });
    }
    let terms = lefts
        .into_iter()
        .enumerate()
        .filter_map(|(j, l)| l.filter(|l| !l.is_zero()).map(|l| (l, basis[j].clone())))
        .collect();
    let out = SumOfProducts {
        terms,
        target: m.clone(),
    };
    if !out.is_valid_for(v) {
        return Err(Error::contradiction("sum of products does not re-sum to the target"));
    }
    Ok(out)
}

/// `m = B C` with `B, C in h`, for `n >= 3`.
pub fn hyperplane_pair_factor(h: &Hyperplane, m: &Matrix, budget: &SearchBudget) -> Result<PairFactorization> {
    two_hyperplanes_factor(h, h, m, budget)
}

/// `m = B C` with `B in h1`, `C in h2`, for `n >= 3`.
pub fn two_hyperplanes_factor(
    h1: &Hyperplane,
    h2: &Hyperplane,
    m: &Matrix,
    budget: &SearchBudget,
) -> Result<PairFactorization> {
    let n = h1.n();
    h1.field().check_same(&h2.field())?;
    h1.field().check_same(&m.field())?;
    if h2.n() != n || m.shape() != (n, n) {
        return Err(Error::dims("hyperplanes and target differ in size"));
    }
    if n < 3 {
        return Err(Error::pre("two-factor hyperplane splitting needs n >= 3"));
    }
    let field = m.field();
    if m.is_zero() {
        let z = Matrix::zeros(field, n, n);
        return PairFactorization::new(z.clone(), z, m, h1, h2);
    }
    if m.is_invertible() {
        // P in H2 with P^{-1} in M^{-1} H1, then M = (M P^{-1}) P.
        let p = inverse_pair(h2, &h1.pullback_left(m)?, budget)?;
        let p_inv = p
            .inverse()
            .ok_or_else(|| Error::contradiction("inverse_pair returned a singular matrix"))?;
        return PairFactorization::new(m * &p_inv, p, m, h1, h2);
    }

    // Make the first row of A_1 nonzero by a transposition.
    let a1 = h1.normal();
    let row = (0..n)
        .find(|&i| (0..n).any(|j| !a1.get(i, j).is_zero()))
        .expect("nonzero normal");
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(0, row);
    let s = Matrix::permutation(field, &perm);
    let s_inv = s.transpose();
    let (g1, g2) = (h1.conjugate(&s)?, h2.conjugate(&s)?);
    let target = &(&s * m) * &s_inv;
    let (b, c) = singular_split(&g1, &g2, &target, budget)?;
    PairFactorization::new(&(&s_inv * &b) * &s, &(&s_inv * &c) * &s, m, h1, h2)
}

/// Singular target, first row of the left normal nonzero.
fn singular_split(h1: &Hyperplane, h2: &Hyperplane, m: &Matrix, budget: &SearchBudget) -> Result<(Matrix, Matrix)> {
    let n = m.rows();
    let field = m.field();
    let rref = m.rref();
    let p = rref.rank;
    let r = rref.reduced.block(0, 0, p, n);
    // C = [0; Z R] has kernel containing Ker M and image in span(e_2, ..., e_n).
    let lift = |z: &Matrix| Matrix::zeros(field, 1, n).vstack(&(z * &r));
    let a2 = h2.normal().clone();
    let slice = LinearSubspace::kernel_of(field, n - 1, p, |z| {
        Matrix::from_vec(field, 1, 1, vec![a2.trace_product(&lift(z)).expect("shape")]).expect("1x1")
    });
    let z = find_rank_r_in_affine(&AffineSubspace::linear(slice), p, Some((n - 1) * p - 1), budget)?;
    let c = lift(&z);
    let b0 = match Matrix::solve(&c, m, Side::Left)? {
        SolveOutcome::Solved(b0) => b0,
        SolveOutcome::NoSolution(_) => return Err(Error::contradiction("Ker C differs from Ker M")),
    };
    let annihilators = LinearSubspace::kernel_of(field, n, n, |b| b * &c);
    match affine_meet_hyperplane(h1, &AffineSubspace::new(b0, annihilators)?)? {
        Meet::Point(b) => Ok((b, c)),
        Meet::TranslationContained => Err(Error::contradiction(
            "every B with BC = 0 lies in H1, so the first row of its normal vanishes",
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum N2Verdict {
    #[serde(rename = "factorable")]
    Factorable,
    #[serde(rename = "conjugate_H0")]
    ConjugateH0,
    #[serde(rename = "conjugate_T2plus")]
    ConjugateT2Plus,
}

/// Classification of a hyperplane of `M_2`.
///
/// For the exceptional verdicts, `conjugator` is an `S` with `S H S^{-1}`
/// equal to `H_0 = {X : X_11 = 0}` or `T_2^+ = {X : X_21 = 0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct N2Class {
    pub verdict: N2Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conjugator: Option<Matrix>,
}

/// Why a target has no factorization through an exceptional 2x2 hyperplane.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    pub verdict: N2Verdict,
    pub conjugator: Matrix,
    /// `S M S^{-1}` in the normalized coordinates.
    pub normalized_target: Matrix,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum N2Outcome {
    Factored(PairFactorization),
    Impossible(Obstruction),
}

pub fn n2_classify(h: &Hyperplane) -> Result<N2Class> {
    if h.n() != 2 {
        return Err(Error::pre("n2_classify needs 2x2 matrices"));
    }
    let a = h.normal();
    let Some((x, y)) = a.rank_one_factors() else {
        return Ok(N2Class {
            verdict: N2Verdict::Factorable,
            conjugator: None,
        });
    };
    let field = a.field();
    let yx = (&y * &x).get(0, 0).clone();
    let (verdict, second) = if !yx.is_zero() {
        // S^{-1} = [x | k] with y k = 0, so S A S^{-1} = (y x) E_11.
        let k = a.kernel_basis().remove(0);
        (N2Verdict::ConjugateH0, k)
    } else {
        // S^{-1} = [x | w] with y w = 1, so S A S^{-1} = E_12.
        let pivot = (0..2).find(|&j| !y.get(0, j).is_zero()).expect("nonzero row");
        let w = Matrix::unit(field, 2, 1, pivot, 0).scale(&y.get(0, pivot).inv().expect("nonzero"));
        (N2Verdict::ConjugateT2Plus, w)
    };
    let s = x
        .hstack(&second)
        .inverse()
        .ok_or_else(|| Error::contradiction("conjugator is singular"))?;
    Ok(N2Class {
        verdict,
        conjugator: Some(s),
    })
}

/// `m = B C` with `B, C in h` for 2x2 matrices, or the obstruction.
pub fn n2_pair_factor(h: &Hyperplane, m: &Matrix, budget: &SearchBudget) -> Result<N2Outcome> {
    let class = n2_classify(h)?;
    h.field().check_same(&m.field())?;
    if m.shape() != (2, 2) {
        return Err(Error::dims("target must be 2x2"));
    }
    let field = m.field();
    if m.is_zero() {
        let z = Matrix::zeros(field, 2, 2);
        return Ok(N2Outcome::Factored(PairFactorization::new(z.clone(), z, m, h, h)?));
    }
    let Some(s) = class.conjugator.clone() else {
        let (b, c) = n2_factorable(h, m, budget)?;
        return Ok(N2Outcome::Factored(PairFactorization::new(b, c, m, h, h)?));
    };
    let s_inv = s.inverse().expect("conjugator");
    let t = &(&s * m) * &s_inv;
    let back = |x: &Matrix| &(&s_inv * x) * &s;
    let impossible = |reason: &str| {
        Ok(N2Outcome::Impossible(Obstruction {
            verdict: class.verdict,
            conjugator: s.clone(),
            normalized_target: t.clone(),
            reason: reason.into(),
        }))
    };
    let (b, c) = match class.verdict {
        N2Verdict::ConjugateT2Plus => {
            if !t.get(1, 0).is_zero() {
                return impossible("T_2^+ is a subalgebra and the normalized target has a nonzero (2,1) entry");
            }
            (t.clone(), Matrix::identity(field, 2))
        }
        N2Verdict::ConjugateH0 => {
            let (m11, m12, m21, m22) = (t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1));
            let one = field.one();
            let zero = field.zero();
            // B = [[0, b], [a, c]], C = [[0, b'], [a', c']]:
            // BC = [[b a', b c'], [c a', a b' + c c']].
            let (a, b, c, a2, b2, c2) = if !m11.is_zero() {
                let c = m21 / m11;
                let b2 = m22 - &(&c * m12);
                (one.clone(), one.clone(), c, m11.clone(), b2, m12.clone())
            } else if m12.is_zero() {
                (
                    one.clone(),
                    zero.clone(),
                    one.clone(),
                    m21.clone(),
                    m22.clone(),
                    zero.clone(),
                )
            } else if m21.is_zero() {
                (
                    one.clone(),
                    one.clone(),
                    zero.clone(),
                    zero.clone(),
                    m22.clone(),
                    m12.clone(),
                )
            } else {
                return impossible(
                    "in H_0 coordinates b a' = 0 forces b = 0 or a' = 0, killing the (1,2) or (2,1) entry, both nonzero here",
                );
            };
            let bm = Matrix::from_rows(field, vec![vec![zero.clone(), b], vec![a, c]])?;
            let cm = Matrix::from_rows(field, vec![vec![zero, b2], vec![a2, c2]])?;
            (bm, cm)
        }
        N2Verdict::Factorable => unreachable!("factorable has no conjugator"),
    };
    Ok(N2Outcome::Factored(PairFactorization::new(
        back(&b),
        back(&c),
        m,
        h,
        h,
    )?))
}

fn n2_factorable(h: &Hyperplane, m: &Matrix, budget: &SearchBudget) -> Result<(Matrix, Matrix)> {
    let field = m.field();
    let hs = h.subspace();
    if let Some(m_inv) = m.inverse() {
        // V = {M adj(N) : N in H}; a nonsingular B in V and H gives C = adj(M^{-1} B).
        let v = hs.map(2, 2, |n| m * &n.adjugate().expect("square"));
        let meet = AffineSubspace::linear(v.intersect(&hs)?);
        let b = search_nonsingular(&meet, budget, &mut budget.rng())
            .ok_or_else(|| Error::BudgetExhausted("no nonsingular matrix in V and H".into()))?;
        let c = (&m_inv * &b).adjugate()?;
        let det = c.det()?;
        let c = c.scale(&det.inv().ok_or_else(|| Error::contradiction("C is singular"))?);
        return Ok((b, c));
    }
    // Rank one: C in H with Ker M in Ker C, then B from the affine solution set.
    let k = m.kernel_basis().remove(0);
    let plane = LinearSubspace::kernel_of(field, 2, 2, |n| n * &k);
    let line = plane.intersect(&hs)?;
    let c = line
        .basis()
        .first()
        .cloned()
        .ok_or_else(|| Error::contradiction("kernel plane misses H"))?;
    let b0 = Matrix::solve(&c, m, Side::Left)?
        .solution()
        .ok_or_else(|| Error::contradiction("rank C differs from rank M"))?;
    let annihilators = LinearSubspace::kernel_of(field, 2, 2, |b| b * &c);
    match affine_meet_hyperplane(h, &AffineSubspace::new(b0, annihilators)?)? {
        Meet::Point(b) => Ok((b, c)),
        Meet::TranslationContained => Err(Error::contradiction(
            "{B : BC = 0} lies in H although the normal is nonsingular",
        )),
    }
}

/// Output of [`degenerate_pair_witness`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Degeneracy {
    NonDegenerate,
    /// `V = P V_p Q` and `W = Q^{-1} W_p R`.
    Degenerate {
        p: usize,
        pm: Matrix,
        qm: Matrix,
        rm: Matrix,
    },
}

/// For `codim V + codim W = n`, either `V W` spans `M_n` or the pair is
/// equivalent to `(V_p, W_p)`.
pub fn degenerate_pair_witness(v: &LinearSubspace, w: &LinearSubspace) -> Result<Degeneracy> {
    v.field().check_same(&w.field())?;
    if v.shape() != w.shape() {
        return Err(Error::dims("subspaces of different matrix spaces"));
    }
    let n = v.n();
    if v.codim() + w.codim() != n {
        return Err(Error::pre(format!(
            "codimensions sum to {}, not n = {n}",
            v.codim() + w.codim()
        )));
    }
    let span = product_span_two(v, w)?;
    if span.is_full() {
        return Ok(Degeneracy::NonDegenerate);
    }
    let field = v.field();
    let d = span.ortho_complement().basis()[0].clone();
    let (x, y) = d
        .rank_one_factors()
        .ok_or_else(|| Error::contradiction(format!("orthogonal element has rank {}, not 1", d.rank())))?;
    let p_mat = Matrix::with_first_column(&x)?;
    let r_mat = Matrix::with_first_row(&y)?;
    let v1 = v.transform(&r_mat, &Matrix::identity(field, n));
    let first_rows: Vec<Matrix> = v1.basis().iter().map(|b| b.row(0)).collect();
    let e = LinearSubspace::span_from(field, 1, n, &first_rows)?;
    let p = n - e.dim();
    let mut z_rows = Vec::new();
    let mut grown = e.clone();
    for j in 0..n {
        if z_rows.len() == p {
            break;
        }
        let u = Matrix::unit(field, 1, n, 0, j);
        if !grown.contains(&u) {
            grown = grown.sum(&LinearSubspace::span_from(field, 1, n, std::slice::from_ref(&u))?)?;
            z_rows.push(u);
        }
    }
    z_rows.extend(e.basis().iter().cloned());
    let z = z_rows.iter().skip(1).fold(z_rows[0].clone(), |acc, r| acc.vstack(r));
    let q_mat = z
        .inverse()
        .ok_or_else(|| Error::contradiction("row completion is singular"))?;
    let pm = r_mat.inverse().expect("completion");
    let rm = p_mat.inverse().expect("completion");
    let qm = z;
    let vp = LinearSubspace::v_block(field, n, p);
    let wp = LinearSubspace::w_block(field, n, p);
    let v_ok = vp.transform(&pm, &qm) == *v;
    let w_ok = wp.transform(&q_mat, &rm) == *w;
    if !(v_ok && w_ok) {
        return Err(Error::contradiction(format!(
            "recovered blocks do not reproduce the pair (V: {v_ok}, W: {w_ok})"
        )));
    }
    Ok(Degeneracy::Degenerate { p, pm, qm, rm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::witness::cyclic_permutation;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn e(f: FieldSpec, n: usize, i: usize, j: usize) -> Matrix {
        Matrix::unit(f, n, n, i, j)
    }

    #[test]
    fn pair_examples() {
        let f = q();
        let b = SearchBudget::default();
        let sl = Hyperplane::sl(f, 3);
        let id = Matrix::identity(f, 3);
        let pf = hyperplane_pair_factor(&sl, &id, &b).unwrap();
        assert!(pf.is_verified());
        // The left factor is a permutation (a 3-cycle) and the right its transpose.
        let cyc = cyclic_permutation(f, 3);
        assert!(pf.right == cyc || pf.right == cyc.transpose());
        assert_eq!(pf.left, pf.right.transpose());

        let pf = hyperplane_pair_factor(&sl, &e(f, 3, 0, 0), &b).unwrap();
        assert!(pf.is_verified());

        let h1 = Hyperplane::entry_zero(f, 3, 1, 0);
        let h2 = Hyperplane::entry_zero(f, 3, 0, 1);
        let pf = two_hyperplanes_factor(&h1, &h2, &id, &b).unwrap();
        assert_eq!((pf.left, pf.right), (id.clone(), id));

        let zero = Matrix::zeros(f, 3, 3);
        assert!(hyperplane_pair_factor(&sl, &zero, &b).unwrap().is_verified());
        assert!(matches!(
            hyperplane_pair_factor(&Hyperplane::sl(f, 2), &Matrix::identity(f, 2), &b),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn sum_of_products_examples() {
        let f = gf(2);
        let full = LinearSubspace::full(f, 3, 3);
        let m = Matrix::from_ints(f, &[[1, 0, 1], [0, 1, 1], [1, 1, 0]]);
        let s = sum_of_products_decompose(&full, &m).unwrap();
        assert_eq!(s.terms, vec![(m.clone(), Matrix::identity(f, 3))]);

        let w1 = LinearSubspace::w1(f, 3);
        assert!(matches!(
            sum_of_products_decompose(&w1, &m),
            Err(Error::PreconditionViolated(_))
        ));
        assert_eq!(
            sum_of_products_decompose_unchecked(&w1, &e(f, 3, 1, 0)),
            Err(Error::SpanDeficient)
        );

        let sl = LinearSubspace::sl(f, 3);
        let s = sum_of_products_decompose(&sl, &e(f, 3, 0, 0)).unwrap();
        assert!(s.terms.len() <= 9);
        assert!(s.is_valid_for(&sl));
    }

    #[test]
    fn n2_examples() {
        let f = gf(2);
        let swap = Matrix::from_ints(f, &[[0, 1], [1, 0]]);
        let h = Hyperplane::new(swap.clone()).unwrap();
        assert_eq!(n2_classify(&h).unwrap().verdict, N2Verdict::Factorable);
        let t2 = Hyperplane::new(e(f, 2, 0, 1)).unwrap();
        assert_eq!(n2_classify(&t2).unwrap().verdict, N2Verdict::ConjugateT2Plus);
        let h0 = Hyperplane::new(e(f, 2, 0, 0)).unwrap();
        let class = n2_classify(&h0).unwrap();
        assert_eq!(class.verdict, N2Verdict::ConjugateH0);
        let out = n2_pair_factor(&h0, &swap, &SearchBudget::default()).unwrap();
        assert!(matches!(out, N2Outcome::Impossible(_)));
        assert_eq!(
            serde_json::to_value(&class).unwrap()["verdict"],
            serde_json::json!("conjugate_H0")
        );
        assert!(matches!(
            n2_classify(&Hyperplane::sl(f, 3)),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn n2_conjugators_normalize() {
        for f in [gf(2), gf(3), q()] {
            let full = LinearSubspace::full(f, 2, 2);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..30 {
                let a = full.random_element(&mut rng, 2);
                if a.is_zero() {
                    continue;
                }
                let h = Hyperplane::new(a).unwrap();
                let class = n2_classify(&h).unwrap();
                let Some(s) = class.conjugator else { continue };
                let normal = h.conjugate(&s).unwrap();
                let expected = match class.verdict {
                    N2Verdict::ConjugateH0 => e(f, 2, 0, 0),
                    N2Verdict::ConjugateT2Plus => e(f, 2, 0, 1),
                    N2Verdict::Factorable => unreachable!(),
                };
                assert_eq!(normal.normal(), &expected);
            }
        }
    }

    #[test]
    fn degenerate_examples() {
        let f = gf(3);
        let out = degenerate_pair_witness(&LinearSubspace::v_block(f, 3, 1), &LinearSubspace::w1(f, 3)).unwrap();
        let id = Matrix::identity(f, 3);
        assert_eq!(
            out,
            Degeneracy::Degenerate {
                p: 1,
                pm: id.clone(),
                qm: id.clone(),
                rm: id
            }
        );
        let full = LinearSubspace::full(f, 3, 3);
        assert!(matches!(
            degenerate_pair_witness(&full, &full),
            Err(Error::PreconditionViolated(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn two_hyperplanes_gf3(seed in any::<u64>()) {
            let f = gf(3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = LinearSubspace::full(f, 3, 3);
            let (a1, a2) = (full.random_element(&mut rng, 1), full.random_element(&mut rng, 1));
            prop_assume!(!a1.is_zero() && !a2.is_zero());
            let (h1, h2) = (Hyperplane::new(a1).unwrap(), Hyperplane::new(a2).unwrap());
            let m = full.random_element(&mut rng, 1);
            let pf = two_hyperplanes_factor(&h1, &h2, &m, &SearchBudget::with_seed(seed)).unwrap();
            prop_assert!(pf.is_verified());
        }

        #[test]
        fn singular_targets_rationals(seed in any::<u64>(), n in 3usize..5, rank in 1usize..4) {
            let f = q();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = LinearSubspace::full(f, n, n);
            let a = full.random_element(&mut rng, 3);
            prop_assume!(!a.is_zero());
            let h = Hyperplane::new(a).unwrap();
            let rank = rank.min(n - 1);
            let left = LinearSubspace::full(f, n, rank).random_element(&mut rng, 3);
            let right = LinearSubspace::full(f, rank, n).random_element(&mut rng, 3);
            let m = &left * &right;
            let pf = hyperplane_pair_factor(&h, &m, &SearchBudget::with_seed(seed)).unwrap();
            prop_assert!(pf.is_verified());
        }

        #[test]
        fn conjugation_covariance(seed in any::<u64>()) {
            let f = gf(5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = LinearSubspace::full(f, 3, 3);
            let a = full.random_element(&mut rng, 1);
            prop_assume!(!a.is_zero());
            let h = Hyperplane::new(a).unwrap();
            let m = full.random_element(&mut rng, 1);
            let p = crate::witness::random_invertible(f, 3, &mut rng);
            let p_inv = p.inverse().unwrap();
            let budget = SearchBudget::with_seed(seed);
            let pf = hyperplane_pair_factor(&h.conjugate(&p).unwrap(), &(&(&p * &m) * &p_inv), &budget).unwrap();
            // Pulling the factors back gives a factorization of the original problem.
            let (b, c) = (&(&p_inv * &pf.left) * &p, &(&p_inv * &pf.right) * &p);
            prop_assert!(h.contains(&b) && h.contains(&c));
            prop_assert_eq!(&b * &c, m);
        }

        #[test]
        fn degenerate_recovery(seed in any::<u64>(), p in 0usize..4) {
            let f = gf(3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3;
            let (pp, qq, rr) = (
                crate::witness::random_invertible(f, n, &mut rng),
                crate::witness::random_invertible(f, n, &mut rng),
                crate::witness::random_invertible(f, n, &mut rng),
            );
            let v = LinearSubspace::v_block(f, n, p).transform(&pp, &qq);
            let w = LinearSubspace::w_block(f, n, p).transform(&qq.inverse().unwrap(), &rr);
            match degenerate_pair_witness(&v, &w).unwrap() {
                Degeneracy::Degenerate { p: got, pm, qm, rm } => {
                    prop_assert_eq!(got, p);
                    prop_assert_eq!(LinearSubspace::v_block(f, n, got).transform(&pm, &qm), v);
                    prop_assert_eq!(LinearSubspace::w_block(f, n, got).transform(&qm.inverse().unwrap(), &rm), w);
                }
                Degeneracy::NonDegenerate => prop_assert!(false, "V_p W_p never spans M_n"),
            }
        }
    }
}

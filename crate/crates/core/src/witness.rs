//! Seeded searches for matrices whose existence is guaranteed by a theorem:
//! nonsingular elements of large affine subspaces, elements of prescribed
//! rank, and invertible pairs `P in H1`, `P^{-1} in H2`.
//!
//! Every returned witness has been re-checked against its defining predicate.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::{Matrix, Side};
use crate::subspace::{AffineSubspace, Hyperplane};

// Coefficient spread for random points over the rationals.
const SPREAD: i64 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub rng_seed: u64,
    pub max_random_trials: usize,
    /// Exhaustive fallback over prime fields.
    pub allow_exhaustive: bool,
    /// Largest number of elements an exhaustive pass may visit.
    pub exhaustive_ceiling: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            rng_seed: 0,
            max_random_trials: 64,
            allow_exhaustive: true,
            exhaustive_ceiling: 2_000_000,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(rng_seed: u64) -> Self {
        SearchBudget {
            rng_seed,
            ..SearchBudget::default()
        }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }

    fn trials(&self) -> usize {
        self.max_random_trials.max(1)
    }

    fn can_exhaust(&self, a: &AffineSubspace) -> bool {
        self.allow_exhaustive && a.cardinality().is_ok_and(|c| c <= self.exhaustive_ceiling as u128)
    }
}

/// A nonsingular element of `a`. Unless the base point already qualifies,
/// the codimension of `a` must be below `n`.
pub fn find_nonsingular_in_affine(a: &AffineSubspace, budget: &SearchBudget) -> Result<Matrix> {
    let (r, c) = a.shape();
    if r != c {
        return Err(Error::dims("nonsingular search needs square matrices"));
    }
    if a.base().is_invertible() {
        return Ok(a.base().clone());
    }
    if a.codim() >= r {
        return Err(Error::pre(format!("codimension {} is not below n = {r}", a.codim())));
    }
    search_nonsingular(a, budget, &mut budget.rng())
        .ok_or_else(|| Error::BudgetExhausted("no nonsingular matrix found".into()))
}

/// Nonsingular search without the codimension check; `None` if nothing was found.
pub(crate) fn search_nonsingular(a: &AffineSubspace, budget: &SearchBudget, rng: &mut ChaCha8Rng) -> Option<Matrix> {
    let n = a.shape().0;
    if a.base().is_invertible() {
        return Some(a.base().clone());
    }
    let mut starts = vec![a.base().clone()];
    for _ in 0..budget.trials() {
        let m = a.random_element(rng, SPREAD);
        if m.is_invertible() {
            return Some(m);
        }
        if starts.len() < 4 {
            starts.push(m);
        }
    }
    if budget.can_exhaust(a) {
        return a
            .enumerate(budget.exhaustive_ceiling as u128)
            .ok()?
            .find(Matrix::is_invertible);
    }
    // det(start + t B) has degree at most n in t, so n + 1 values of t
    // decide whether the pencil avoids the singular locus.
    for start in &starts {
        for b in a.translation().basis() {
            for t in 1..=(n as i64 + 1) {
                let m = start + &b.scale(&Scalar::from_i64(a.field(), t));
                if m.is_invertible() {
                    return Some(m);
                }
            }
        }
    }
    None
}

/// An element of `a` of rank exactly `r`.
///
/// `min_dimension` lets the caller state the dimension hypothesis under
/// which the relevant existence theorem applies; it is checked up front.
pub fn find_rank_r_in_affine(
    a: &AffineSubspace,
    r: usize,
    min_dimension: Option<usize>,
    budget: &SearchBudget,
) -> Result<Matrix> {
    let (rows, cols) = a.shape();
    if r > rows.min(cols) {
        return Err(Error::pre(format!("rank {r} exceeds the shape {rows}x{cols}")));
    }
    if let Some(d) = min_dimension {
        if a.dim() < d {
            return Err(Error::pre(format!("dimension {} is below the required {d}", a.dim())));
        }
    }
    if a.dim() == 0 && a.base().rank() != r {
        return Err(Error::pre(format!(
            "the single point has rank {}, not {r}",
            a.base().rank()
        )));
    }
    search_rank(a, r, budget, &mut budget.rng())
        .ok_or_else(|| Error::BudgetExhausted(format!("no rank-{r} matrix found")))
}

pub(crate) fn search_rank(a: &AffineSubspace, r: usize, budget: &SearchBudget, rng: &mut ChaCha8Rng) -> Option<Matrix> {
    let hit = |m: &Matrix| m.rank() == r;
    let basis = a.translation().basis();
    let mut partial = a.base().clone();
    let mut structured = vec![a.base().clone()];
    for b in basis {
        structured.push(a.base() + b);
        partial = &partial + b;
        structured.push(partial.clone());
    }
    if let Some(m) = structured.into_iter().find(hit) {
        return Some(m);
    }
    for _ in 0..budget.trials() {
        let m = a.random_element(rng, SPREAD);
        if hit(&m) {
            return Some(m);
        }
    }
    if budget.can_exhaust(a) {
        return a.enumerate(budget.exhaustive_ceiling as u128).ok()?.find(hit);
    }
    None
}

/// A nonsingular `P` in `h1` with `P^{-1}` in `h2`, for `n >= 3`.
///
/// Layers: the identity and the cyclic permutation; random nonsingular
/// elements of `h1`; univariate pencils through them; a block construction
/// after a change of basis; exhaustive search over small prime fields.
pub fn inverse_pair(h1: &Hyperplane, h2: &Hyperplane, budget: &SearchBudget) -> Result<Matrix> {
    h1.field().check_same(&h2.field())?;
    if h1.n() != h2.n() {
        return Err(Error::dims("hyperplanes of different sizes"));
    }
    let n = h1.n();
    if n < 3 {
        return Err(Error::pre("inverse_pair needs n >= 3"));
    }
    let field = h1.field();
    let ok = |p: &Matrix| h1.contains(p) && p.inverse().is_some_and(|q| h2.contains(&q));

    let mut canonical = vec![Matrix::identity(field, n), cyclic_permutation(field, n)];
    canonical.push(canonical[1].transpose());
    if let Some(p) = canonical.into_iter().find(|p| ok(p)) {
        return Ok(p);
    }

    let mut rng = budget.rng();
    let h1_space = h1.to_affine();
    let mut first = None;
    for _ in 0..budget.trials().min(16) {
        let Some(p0) = search_nonsingular(&h1_space, budget, &mut rng) else {
            break;
        };
        if ok(&p0) {
            return Ok(p0);
        }
        first.get_or_insert(p0);
    }

    if let Some(p0) = first {
        if let Some(p) = pencil_refine(&p0, h1, h2) {
            return Ok(p);
        }
    }

    if let Some(p) = block_construction(h1.normal(), h2.normal(), budget, &mut rng) {
        if ok(&p) {
            return Ok(p);
        }
    }

    if budget.can_exhaust(&h1_space) {
        if let Some(p) = h1_space
            .enumerate(budget.exhaustive_ceiling as u128)?
            .find(|p| p.is_invertible() && ok(p))
        {
            return Ok(p);
        }
    }
    Err(Error::BudgetExhausted("no inverse pair found".into()))
}

/// `E_{1,n} + sum E_{j+1,j}`: traceless, with traceless inverse (its transpose).
pub fn cyclic_permutation(field: FieldSpec, n: usize) -> Matrix {
    let perm: Vec<usize> = (0..n).map(|j| (j + 1) % n).collect();
    Matrix::permutation(field, &perm)
}

/// Along `p0 + t D` for basis directions `D` of `h1`, solves
/// `tr(A_2 adj(p0 + t D)) = 0`, a polynomial of degree at most `n - 1`.
fn pencil_refine(p0: &Matrix, h1: &Hyperplane, h2: &Hyperplane) -> Option<Matrix> {
    let field = h1.field();
    let n = h1.n();
    let a2 = h2.normal();
    let accept = |p: &Matrix| p.is_invertible() && p.inverse().is_some_and(|q| h2.contains(&q));
    for d in h1.subspace().basis() {
        let at = |t: &Scalar| p0 + &d.scale(t);
        match field.modulus() {
            Some(p) if p <= 4096 => {
                let hit = field.elements().ok()?.map(|t| at(&t)).find(|m| accept(m));
                if hit.is_some() {
                    return hit;
                }
            }
            Some(_) => {}
            None => {
                let g = |t: &Scalar| a2.trace_product(&at(t).adjugate().ok()?).ok();
                let coeffs = interpolate(field, n, g)?;
                for t in rational_roots(&coeffs) {
                    let m = at(&Scalar::from_big_rational(t));
                    if accept(&m) {
                        return Some(m);
                    }
                }
            }
        }
    }
    None
}

/// Coefficients (low degree first) of the degree `< points` polynomial through
/// `g(0), ..., g(points - 1)` over the rationals.
fn interpolate(field: FieldSpec, points: usize, g: impl Fn(&Scalar) -> Option<Scalar>) -> Option<Vec<BigRational>> {
    let mut vander = Matrix::zeros(field, points, points);
    let mut values = Matrix::zeros(field, points, 1);
    for i in 0..points {
        let t = Scalar::from_i64(field, i as i64);
        let mut pow = field.one();
        for j in 0..points {
            vander.set(i, j, pow.clone());
            pow = &pow * &t;
        }
        values.set(i, 0, g(&t)?);
    }
    let c = Matrix::solve(&vander, &values, Side::Right).ok()?.solution()?;
    (0..points).map(|j| c.get(j, 0).as_rational().cloned()).collect()
}

// Divisor enumeration is skipped for coefficients above this bound.
const ROOT_SEARCH_CAP: u64 = 1_000_000_000_000;

fn divisors(x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= x {
        if x.is_multiple_of(d) {
            out.push(d);
            if d * d != x {
                out.push(x / d);
            }
        }
        d += 1;
    }
    out
}

/// All rational roots of a polynomial (rational-root theorem).
fn rational_roots(coeffs: &[BigRational]) -> Vec<BigRational> {
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| (c * BigRational::from(lcm.clone())).to_integer())
        .collect();
    while ints.last().is_some_and(Zero::is_zero) {
        ints.pop();
    }
    if ints.len() < 2 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    let low = ints.iter().position(|c| !c.is_zero()).expect("nonzero polynomial");
    if low > 0 {
        roots.push(BigRational::zero());
    }
    let ints = &ints[low..];
    if ints.len() < 2 {
        return roots;
    }
    let (Some(a0), Some(an)) = (ints[0].abs().to_u64(), ints[ints.len() - 1].abs().to_u64()) else {
        return roots;
    };
    if a0 > ROOT_SEARCH_CAP || an > ROOT_SEARCH_CAP {
        return roots;
    }
    let eval = |t: &BigRational| {
        ints.iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + BigRational::from(c.clone()))
    };
    for num in divisors(a0) {
        for den in divisors(an) {
            for sign in [1i64, -1] {
                let t = BigRational::new(BigInt::from(num) * sign, BigInt::from(den));
                if eval(&t).is_zero() && !roots.contains(&t) {
                    roots.push(t);
                }
            }
        }
    }
    roots
}

/// Candidate first columns for the change of basis in [`block_construction`].
fn candidate_vectors(field: FieldSpec, n: usize, budget: &SearchBudget, rng: &mut ChaCha8Rng) -> Vec<Matrix> {
    let unit = |i: usize| Matrix::unit(field, n, 1, i, 0);
    let mut out: Vec<Matrix> = (0..n).map(unit).collect();
    let two = Scalar::from_i64(field, 2);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(&unit(i) + &unit(j));
                if !two.is_zero() {
                    out.push(&unit(i) + &unit(j).scale(&two));
                }
            }
        }
    }
    for _ in 0..budget.trials() {
        let v: Vec<_> = (0..n).map(|_| field.random(rng, SPREAD)).collect();
        out.push(Matrix::column(field, v).expect("column"));
    }
    if let Some(p) = field.modulus() {
        let count = (p as u128).saturating_pow(n as u32);
        if budget.allow_exhaustive && count <= budget.exhaustive_ceiling as u128 {
            let space = AffineSubspace::linear(crate::subspace::LinearSubspace::full(field, n, 1));
            out.extend(space.enumerate(count).expect("bounded"));
        }
    }
    out.retain(|v| !v.is_zero());
    out
}

fn is_scalar(a: &Matrix) -> bool {
    let d = a.get(0, 0);
    let n = a.rows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            if i == j {
                a.get(i, j) == d
            } else {
                a.get(i, j).is_zero()
            }
        })
    })
}

/// Change of basis `S` with `S e_1 = x` for some `x` that is not an eigenvector
/// of `A_1`, then `P = S [[1, X], [0, Q]] S^{-1}` where the two trace
/// conditions become linear equations in the row `X`. Roles of the
/// hyperplanes are swapped when `A_1` is scalar.
fn block_construction(a1: &Matrix, a2: &Matrix, budget: &SearchBudget, rng: &mut ChaCha8Rng) -> Option<Matrix> {
    let field = a1.field();
    let n = a1.rows();
    if is_scalar(a1) && is_scalar(a2) {
        return Some(cyclic_permutation(field, n));
    }
    if is_scalar(a1) {
        return block_construction(a2, a1, budget, rng).and_then(|p| p.inverse());
    }
    for x in candidate_vectors(field, n, budget, rng) {
        if x.hstack(&(a1 * &x)).rank() < 2 {
            continue;
        }
        let s = Matrix::with_first_column(&x).ok()?;
        let s_inv = s.inverse()?;
        let b1 = &(&s_inv * a1) * &s;
        let b2 = &(&s_inv * a2) * &s;
        if let Some(f) = block_solution(&b1, &b2, budget, rng) {
            return Some(&(&s * &f) * &s_inv);
        }
    }
    None
}

fn block_solution(a1: &Matrix, a2: &Matrix, budget: &SearchBudget, rng: &mut ChaCha8Rng) -> Option<Matrix> {
    let field = a1.field();
    let n = a1.rows();
    let m = n - 1;
    let (alpha, c1, m1) = (a1.get(0, 0).clone(), a1.block(1, 0, m, 1), a1.block(1, 1, m, m));
    let (beta, c2, m2) = (a2.get(0, 0).clone(), a2.block(1, 0, m, 1), a2.block(1, 1, m, m));
    let q_inv = if !c2.is_zero() {
        // Q^{-1} sends C_2 to a unit vector independent of C_1.
        let t = (0..m)
            .map(|i| Matrix::unit(field, m, 1, i, 0))
            .find(|t| t.hstack(&c1).rank() == 2)?;
        let to_t = Matrix::with_first_column(&t).ok()?;
        let from_c2 = Matrix::with_first_column(&c2).ok()?.inverse()?;
        &to_t * &from_c2
    } else if !m2.is_zero() {
        let level = AffineSubspace::level_set(&m2, -&beta).ok()?;
        search_nonsingular(&level, budget, rng)?
    } else {
        return None;
    };
    let q = q_inv.inverse()?;
    // f(X) in H_1:       X C_1 = -alpha - tr(M_1 Q)
    // f(X)^{-1} in H_2:  X Q^{-1} C_2 = beta + tr(M_2 Q^{-1})
    let lhs = c1.hstack(&(&q_inv * &c2));
    let rhs = Matrix::row_vector(
        field,
        vec![
            -&alpha - m1.trace_product(&q).ok()?,
            &beta + &m2.trace_product(&q_inv).ok()?,
        ],
    )
    .ok()?;
    let x = Matrix::solve(&lhs, &rhs, Side::Left).ok()?.solution()?;
    let mut f = Matrix::identity(field, n);
    f.set_block(0, 1, &x);
    f.set_block(1, 1, &q);
    Some(f)
}

/// Uniformly seeded random invertible matrix (rejection sampling).
pub(crate) fn random_invertible(field: FieldSpec, n: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        let data = (0..n * n).map(|_| field.random(rng, SPREAD)).collect();
        let m = Matrix::from_vec(field, n, n, data).expect("shape");
        if m.is_invertible() {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::LinearSubspace;
    use proptest::prelude::*;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn nonsingular_examples() {
        let b = SearchBudget::default();
        let id = AffineSubspace::point(Matrix::identity(q(), 3));
        assert_eq!(find_nonsingular_in_affine(&id, &b).unwrap(), Matrix::identity(q(), 3));

        let f = gf(2);
        let tr1 = AffineSubspace::level_set(&Matrix::identity(f, 2), f.one()).unwrap();
        let m = find_nonsingular_in_affine(&tr1, &b).unwrap();
        assert!(tr1.contains(&m) && m.is_invertible());
        // Independent check: the 8-element set really has units, and we found one.
        let units: Vec<_> = tr1.enumerate(8).unwrap().filter(Matrix::is_invertible).collect();
        assert!(units.contains(&m));

        let sl3 = Hyperplane::sl(q(), 3).to_affine();
        let m = find_nonsingular_in_affine(&sl3, &b).unwrap();
        assert!(m.trace().unwrap().is_zero() && m.is_invertible());

        let w1 = AffineSubspace::linear(LinearSubspace::w1(q(), 3));
        assert!(matches!(
            find_nonsingular_in_affine(&AffineSubspace::point(Matrix::zeros(q(), 2, 2)), &b),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(find_nonsingular_in_affine(&w1, &b).is_ok());
    }

    #[test]
    fn nonsingular_is_deterministic() {
        let f = gf(7);
        let a = Hyperplane::new(Matrix::from_ints(f, &[[1, 2, 0], [0, 3, 1], [4, 0, 0]]))
            .unwrap()
            .to_affine();
        let a = AffineSubspace::new(Matrix::zeros(f, 3, 3), a.translation().clone()).unwrap();
        let b = SearchBudget::with_seed(9);
        assert_eq!(find_nonsingular_in_affine(&a, &b), find_nonsingular_in_affine(&a, &b));
    }

    #[test]
    fn rank_examples() {
        let f = gf(2);
        let b = SearchBudget::default();
        let full = AffineSubspace::linear(LinearSubspace::full(f, 2, 3));
        let m = find_rank_r_in_affine(&full, 2, None, &b).unwrap();
        assert_eq!(m.rank(), 2);
        let zero = AffineSubspace::point(Matrix::zeros(f, 2, 2));
        assert!(matches!(
            find_rank_r_in_affine(&zero, 1, None, &b),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            find_rank_r_in_affine(&full, 3, None, &b),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            find_rank_r_in_affine(&full, 1, Some(7), &b),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn inverse_pair_examples() {
        let b = SearchBudget::default();
        let f = q();
        let sl = Hyperplane::sl(f, 3);
        let p = inverse_pair(&sl, &sl, &b).unwrap();
        assert_eq!(p, cyclic_permutation(f, 3));
        assert_eq!(p.inverse().unwrap(), p.transpose());

        let h1 = Hyperplane::entry_zero(f, 3, 1, 0);
        let h2 = Hyperplane::entry_zero(f, 3, 0, 1);
        assert_eq!(inverse_pair(&h1, &h2, &b).unwrap(), Matrix::identity(f, 3));

        assert!(matches!(
            inverse_pair(&Hyperplane::sl(f, 2), &Hyperplane::sl(f, 2), &b),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn block_construction_alone_covers_sl_against_others() {
        // Drive the constructive layer directly, without the earlier layers.
        let f = q();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = SearchBudget::default();
        let a1 = Matrix::identity(f, 3);
        for a2 in [
            Matrix::from_ints(f, &[[0, 1, 0], [0, 0, 0], [0, 0, 0]]),
            Matrix::from_ints(f, &[[1, 0, 0], [0, 0, 0], [0, 0, 0]]),
            Matrix::from_ints(f, &[[2, -1, 3], [0, 5, 1], [7, 0, -4]]),
        ] {
            let p = block_construction(&a1, &a2, &b, &mut rng).unwrap();
            assert!(a1.trace_product(&p).unwrap().is_zero());
            assert!(a2.trace_product(&p.inverse().unwrap()).unwrap().is_zero());
        }
    }

    #[test]
    fn rational_roots_of_small_polynomials() {
        let r = |x: i64, y: i64| BigRational::new(x.into(), y.into());
        // (2t - 1)(t + 3) = 2t^2 + 5t - 3
        let mut roots = rational_roots(&[r(-3, 1), r(5, 1), r(2, 1)]);
        roots.sort();
        assert_eq!(roots, vec![r(-3, 1), r(1, 2)]);
        assert!(rational_roots(&[r(1, 1), r(0, 1), r(1, 1)]).is_empty());
        assert_eq!(rational_roots(&[r(0, 1), r(1, 3)]), vec![r(0, 1)]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn inverse_pair_random_gf5(seed in any::<u64>()) {
            let f = gf(5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = LinearSubspace::full(f, 3, 3);
            let (a1, a2) = (full.random_element(&mut rng, 1), full.random_element(&mut rng, 1));
            prop_assume!(!a1.is_zero() && !a2.is_zero());
            let (h1, h2) = (Hyperplane::new(a1).unwrap(), Hyperplane::new(a2).unwrap());
            let p = inverse_pair(&h1, &h2, &SearchBudget::with_seed(seed)).unwrap();
            prop_assert!(h1.contains(&p));
            prop_assert!(h2.contains(&p.inverse().unwrap()));
        }

        #[test]
        fn inverse_pair_random_rationals(seed in any::<u64>(), n in 3usize..5) {
            let f = q();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = LinearSubspace::full(f, n, n);
            let (a1, a2) = (full.random_element(&mut rng, 4), full.random_element(&mut rng, 4));
            prop_assume!(!a1.is_zero() && !a2.is_zero());
            let (h1, h2) = (Hyperplane::new(a1).unwrap(), Hyperplane::new(a2).unwrap());
            let p = inverse_pair(&h1, &h2, &SearchBudget::with_seed(seed)).unwrap();
            prop_assert!(h1.contains(&p));
            prop_assert!(h2.contains(&p.inverse().unwrap()));
        }

        #[test]
        fn block_construction_rationals(seed in any::<u64>()) {
            let f = q();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = LinearSubspace::full(f, 3, 3);
            let (a1, a2) = (full.random_element(&mut rng, 4), full.random_element(&mut rng, 4));
            prop_assume!(!a1.is_zero() && !a2.is_zero());
            let p = block_construction(&a1, &a2, &SearchBudget::default(), &mut rng).unwrap();
            prop_assert!(a1.trace_product(&p).unwrap().is_zero());
            prop_assert!(a2.trace_product(&p.inverse().unwrap()).unwrap().is_zero());
        }
    }
}

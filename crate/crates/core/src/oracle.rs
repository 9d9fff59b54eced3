//! Brute-force ground truth over small prime fields.
//!
//! Matrices are packed into `u64` codes (row-major base-`p` digits, first
//! entry most significant) and multiplied with plain integer arithmetic, so
//! the oracle shares no elimination or product code with the algorithms it
//! checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor2::{
    hyperplane_pair_factor, n2_classify, n2_pair_factor, sum_of_products_decompose, N2Outcome, N2Verdict,
};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::Matrix;
use crate::semigroup::SemigroupFactorizer;
use crate::subspace::{AffinePoints, AffineSubspace, Hyperplane, LinearSubspace};
use crate::witness::SearchBudget;

pub const DEFAULT_CEILING: u128 = 2_000_000;

/// Packs `rows x cols` matrices over `GF(p)` into integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Codec {
    field: FieldSpec,
    p: u64,
    rows: usize,
    cols: usize,
}

impl Codec {
    pub fn new(field: FieldSpec, rows: usize, cols: usize) -> Result<Self> {
        let p = field.modulus().ok_or(Error::InfiniteField)?;
        let len = (rows * cols) as u32;
        if p.checked_pow(len).is_none() {
            return Err(Error::TooLarge {
                count: (p as u128).saturating_pow(len),
                ceiling: u64::MAX as u128,
            });
        }
        Ok(Codec { field, p, rows, cols })
    }

    pub fn square(field: FieldSpec, n: usize) -> Result<Self> {
        Codec::new(field, n, n)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Number of matrices of this shape.
    pub fn size(&self) -> u64 {
        self.p.pow((self.rows * self.cols) as u32)
    }

    pub fn encode(&self, m: &Matrix) -> u64 {
        self.pack(&self.digits_of(m))
    }

    pub fn decode(&self, code: u64) -> Matrix {
        let entries = self
            .unpack(code)
            .into_iter()
            .map(|d| Scalar::from_i64(self.field, d as i64))
            .collect();
        Matrix::from_vec(self.field, self.rows, self.cols, entries).expect("codec shape")
    }

    fn digits_of(&self, m: &Matrix) -> Vec<u32> {
        m.entries()
            .iter()
            .map(|s| s.residue().expect("finite field") as u32)
            .collect()
    }

    fn pack(&self, digits: &[u32]) -> u64 {
        digits.iter().fold(0, |acc, &d| acc * self.p + d as u64)
    }

    fn unpack(&self, mut code: u64) -> Vec<u32> {
        let len = self.rows * self.cols;
        let mut digits = vec![0; len];
        for k in (0..len).rev() {
            digits[k] = (code % self.p) as u32;
            code /= self.p;
        }
        digits
    }

    fn mul(&self, a: &[u32], b: &[u32], out: &mut [u32]) {
        let n = self.rows;
        let p = self.p;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc += a[i * n + k] as u64 * b[k * n + j] as u64;
                }
                out[i * n + j] = (acc % p) as u32;
            }
        }
    }
}

/// A set of matrices of one shape over a prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementSet {
    codec: Codec,
    codes: BTreeSet<u64>,
}

impl ElementSet {
    pub fn new(codec: Codec) -> Self {
        ElementSet {
            codec,
            codes: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, m: &Matrix) -> bool {
        self.codes.insert(self.codec.encode(m))
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.codes.contains(&self.codec.encode(m))
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// True when every matrix of the shape is present.
    pub fn is_everything(&self) -> bool {
        self.codes.len() as u64 == self.codec.size()
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.codes.is_subset(&other.codes)
    }

    pub fn matrices(&self) -> impl Iterator<Item = Matrix> + '_ {
        self.codes.iter().map(|&c| self.codec.decode(c))
    }
}

fn check_size(a: &AffineSubspace, ceiling: u128) -> Result<u128> {
    let count = a.cardinality()?;
    if count > ceiling {
        return Err(Error::TooLarge { count, ceiling });
    }
    Ok(count)
}

/// Every element of `a`, each exactly once.
pub fn enumerate_affine(a: &AffineSubspace, ceiling: u128) -> Result<AffinePoints> {
    check_size(a, ceiling)?;
    a.enumerate(ceiling)
}

/// Digit vectors of every element of `a`, by an odometer over coefficients.
fn affine_digits(codec: &Codec, a: &AffineSubspace, ceiling: u128) -> Result<Vec<Vec<u32>>> {
    let count = check_size(a, ceiling)? as usize;
    let p = codec.p as u32;
    let basis: Vec<Vec<u32>> = a.translation().basis().iter().map(|b| codec.digits_of(b)).collect();
    let mut current = codec.digits_of(a.base());
    let mut coeffs = vec![0u32; basis.len()];
    let mut out = Vec::with_capacity(count);
    loop {
        out.push(current.clone());
        let mut k = 0;
        loop {
            if k == basis.len() {
                return Ok(out);
            }
            for (c, b) in current.iter_mut().zip(&basis[k]) {
                *c = (*c + b) % p;
            }
            coeffs[k] += 1;
            if coeffs[k] < p {
                break;
            }
            coeffs[k] = 0;
            k += 1;
        }
    }
}

fn square_codec(a: &AffineSubspace) -> Result<Codec> {
    let (r, c) = a.shape();
    if r != c {
        return Err(Error::dims("products need square matrices"));
    }
    Codec::square(a.field(), r)
}

fn products(codec: Codec, left: &[Vec<u32>], right: &[Vec<u32>]) -> ElementSet {
    let mut set = ElementSet::new(codec);
    let mut out = vec![0u32; codec.rows * codec.cols];
    let full = codec.size();
    for a in left {
        for b in right {
            codec.mul(a, b, &mut out);
            set.codes.insert(codec.pack(&out));
        }
        if set.codes.len() as u64 == full {
            break;
        }
    }
    set
}

/// `{A B : A, B in v}`.
pub fn product_set(v: &AffineSubspace, ceiling: u128) -> Result<ElementSet> {
    product_set_two(v, v, ceiling)
}

/// `{A B : A in v, B in w}`.
pub fn product_set_two(v: &AffineSubspace, w: &AffineSubspace, ceiling: u128) -> Result<ElementSet> {
    let codec = square_codec(v)?;
    if square_codec(w)? != codec {
        return Err(Error::dims("factor sets differ in shape or field"));
    }
    let left = affine_digits(&codec, v, ceiling)?;
    let right = affine_digits(&codec, w, ceiling)?;
    Ok(products(codec, &left, &right))
}

/// `{A B}` for explicit finite sets.
pub fn product_set_of(left: &[Matrix], right: &[Matrix]) -> Result<ElementSet> {
    let first = left.first().or(right.first()).ok_or(Error::pre("empty factor sets"))?;
    let codec = Codec::square(first.field(), first.shape().0)?;
    let digits = |ms: &[Matrix]| -> Vec<Vec<u32>> { ms.iter().map(|m| codec.digits_of(m)).collect() };
    Ok(products(codec, &digits(left), &digits(right)))
}

/// Linear span of `{A B : A in v, B in w}`, by elimination mod `p` over all pairs.
pub fn span_of_products(v: &AffineSubspace, w: &AffineSubspace, ceiling: u128) -> Result<LinearSubspace> {
    let codec = square_codec(v)?;
    if square_codec(w)? != codec {
        return Err(Error::dims("factor sets differ in shape or field"));
    }
    let left = affine_digits(&codec, v, ceiling)?;
    let right = affine_digits(&codec, w, ceiling)?;
    let len = codec.rows * codec.cols;
    let mut echelon = ModPEchelon::new(codec.p);
    let mut out = vec![0u32; len];
    'outer: for a in &left {
        for b in &right {
            codec.mul(a, b, &mut out);
            echelon.insert(&out);
            if echelon.rank() == len {
                break 'outer;
            }
        }
    }
    let mats: Vec<Matrix> = echelon.rows.iter().map(|r| codec.decode(codec.pack(r))).collect();
    LinearSubspace::span_from(codec.field, codec.rows, codec.cols, &mats)
}

/// Echelon rows mod `p`, keyed by pivot position.
struct ModPEchelon {
    p: u64,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl ModPEchelon {
    fn new(p: u64) -> Self {
        ModPEchelon {
            p,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, v: &[u32]) -> bool {
        let p = self.p;
        let mut v: Vec<u32> = v.to_vec();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv] as u64;
            if c != 0 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x = ((*x as u64 + (p - c) * *r as u64) % p) as u32;
                }
            }
        }
        let Some(piv) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = mod_inverse(v[piv] as u64, p);
        for x in v.iter_mut() {
            *x = (*x as u64 * inv % p) as u32;
        }
        self.rows.push(v);
        self.pivots.push(piv);
        true
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// The semigroup generated by a finite set, with shortest generator words.
#[derive(Clone, Debug)]
pub struct ClosureResult {
    codec: Codec,
    pub generators: Vec<Matrix>,
    /// Code of each element mapped to a shortest word of generator indices.
    words: BTreeMap<u64, Vec<usize>>,
    /// Number of breadth-first levels until no new element appeared.
    pub saturated_at: usize,
}

impl ClosureResult {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.words.contains_key(&self.codec.encode(m))
    }

    pub fn is_everything(&self) -> bool {
        self.words.len() as u64 == self.codec.size()
    }

    pub fn elements(&self) -> ElementSet {
        ElementSet {
            codec: self.codec,
            codes: self.words.keys().copied().collect(),
        }
    }

    /// A shortest product of generators equal to `m`.
    pub fn witness(&self, m: &Matrix) -> Option<Vec<Matrix>> {
        let word = self.words.get(&self.codec.encode(m))?;
        Some(word.iter().map(|&i| self.generators[i].clone()).collect())
    }
}

/// Breadth-first closure of `generators` under multiplication.
pub fn closure(generators: &[Matrix], ceiling: u128) -> Result<ClosureResult> {
    let first = generators.first().ok_or(Error::pre("closure of an empty set"))?;
    let codec = Codec::square(first.field(), first.shape().0)?;
    let gens: Vec<Vec<u32>> = generators.iter().map(|g| codec.digits_of(g)).collect();
    let mut words: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let mut frontier = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let code = codec.pack(g);
        if let std::collections::btree_map::Entry::Vacant(e) = words.entry(code) {
            e.insert(vec![i]);
            frontier.push(code);
        }
    }
    let full = codec.size();
    let mut levels = 1;
    let mut out = vec![0u32; codec.rows * codec.cols];
    while !frontier.is_empty() && (words.len() as u64) < full {
        let mut next = Vec::new();
        for &code in &frontier {
            let x = codec.unpack(code);
            for (i, g) in gens.iter().enumerate() {
                codec.mul(&x, g, &mut out);
                let product = codec.pack(&out);
                if !words.contains_key(&product) {
                    let mut w = words[&code].clone();
                    w.push(i);
                    words.insert(product, w);
                    next.push(product);
                }
            }
        }
        if words.len() as u128 > ceiling {
            return Err(Error::TooLarge {
                count: words.len() as u128,
                ceiling,
            });
        }
        if !next.is_empty() {
            levels += 1;
        }
        frontier = next;
    }
    Ok(ClosureResult {
        codec,
        generators: generators.to_vec(),
        words,
        saturated_at: levels,
    })
}

/// Closure of every element of `a`.
pub fn closure_affine(a: &AffineSubspace, ceiling: u128) -> Result<ClosureResult> {
    let gens: Vec<Matrix> = enumerate_affine(a, ceiling)?.collect();
    closure(&gens, ceiling)
}

/// Nonzero `n x n` matrices whose first nonzero entry is 1: one normal per hyperplane.
pub fn hyperplane_normals(field: FieldSpec, n: usize) -> Result<impl Iterator<Item = Matrix>> {
    let codec = Codec::square(field, n)?;
    Ok((1..codec.size()).filter_map(move |code| {
        let digits = codec.unpack(code);
        let lead = digits.iter().find(|&&d| d != 0)?;
        (*lead == 1).then(|| codec.decode(code))
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// Products of pairs from a codim-1 subspace span `M_n`.
    Lc2,
    /// Affine hyperplanes generate `M_n` as a semigroup.
    Prodall,
    /// Every matrix is a product of two elements of a hyperplane.
    Prod2,
    /// Classification of hyperplanes of `M_2`.
    N2class,
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Theorem> {
        match s {
            "lc2" => Ok(Theorem::Lc2),
            "prodall" => Ok(Theorem::Prodall),
            "prod2" => Ok(Theorem::Prod2),
            "n2class" => Ok(Theorem::N2class),
            other => Err(Error::Parse(format!("unknown theorem `{other}`"))),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Theorem::Lc2 => "lc2",
            Theorem::Prodall => "prodall",
            Theorem::Prod2 => "prod2",
            Theorem::N2class => "n2class",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub theorem: Theorem,
    pub n: usize,
    pub p: u64,
    /// Random instances when not exhaustive.
    pub samples: usize,
    pub exhaustive: bool,
    /// Library factorizations cross-checked per instance.
    pub targets_per_instance: usize,
    pub budget: SearchBudget,
    pub ceiling: u128,
}

impl VerifyConfig {
    pub fn new(theorem: Theorem, n: usize, p: u64) -> Self {
        VerifyConfig {
            theorem,
            n,
            p,
            samples: 20,
            exhaustive: false,
            targets_per_instance: 2,
            budget: SearchBudget::default(),
            ceiling: DEFAULT_CEILING,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub description: String,
    pub normal: Option<Matrix>,
    /// Level of an affine hyperplane, as text.
    pub value: Option<String>,
    pub target: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub theorem: Theorem,
    pub n: usize,
    pub p: u64,
    pub exhaustive: bool,
    pub instances: usize,
    pub targets: usize,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

struct Tally {
    instances: usize,
    targets: usize,
}

type Check = std::result::Result<(), Box<Counterexample>>;

fn fail(description: impl Into<String>, normal: &Matrix, value: Option<&Scalar>, target: Option<&Matrix>) -> Check {
    Err(Box::new(Counterexample {
        description: description.into(),
        normal: Some(normal.clone()),
        value: value.map(|v| v.to_string()),
        target: target.cloned(),
    }))
}

/// Runs one theorem suite: oracle facts per instance plus library cross-checks.
pub fn verify_theorem(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let field = FieldSpec::prime(cfg.p)?;
    let n = cfg.n;
    match cfg.theorem {
        Theorem::N2class if n != 2 => return Err(Error::pre("n2class is the n = 2 suite")),
        Theorem::Lc2 | Theorem::Prod2 | Theorem::Prodall if n < 3 => {
            return Err(Error::pre(format!("{} needs n >= 3", cfg.theorem)))
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.budget.rng_seed);
    let normals: Vec<Matrix> = if cfg.exhaustive {
        hyperplane_normals(field, n)?.collect()
    } else {
        let mut out = Vec::new();
        while out.len() < cfg.samples {
            let m = random_matrix(field, n, &mut rng);
            if let Ok(h) = Hyperplane::new(m) {
                out.push(h.normal().clone());
            }
        }
        out
    };
    let mut tally = Tally {
        instances: 0,
        targets: 0,
    };
    let mut outcome = Ok(());
    for normal in &normals {
        let values: Vec<Scalar> = match cfg.theorem {
            Theorem::Prodall if cfg.exhaustive => field.elements()?.collect(),
            Theorem::Prodall => vec![field.random(&mut rng, 1)],
            _ => vec![field.zero()],
        };
        for value in &values {
            tally.instances += 1;
            outcome = match cfg.theorem {
                Theorem::Lc2 => check_lc2(cfg, normal, &mut rng, &mut tally)?,
                Theorem::Prod2 => check_prod2(cfg, normal, &mut rng, &mut tally)?,
                Theorem::Prodall => check_prodall(cfg, normal, value, &mut rng, &mut tally)?,
                Theorem::N2class => check_n2(cfg, normal, &mut tally)?,
            };
            if outcome.is_err() {
                break;
            }
        }
        if outcome.is_err() {
            break;
        }
    }
    Ok(VerifyReport {
        theorem: cfg.theorem,
        n,
        p: cfg.p,
        exhaustive: cfg.exhaustive,
        instances: tally.instances,
        targets: tally.targets,
        passed: outcome.is_ok(),
        counterexample: outcome.err().map(|c| *c),
    })
}

fn random_matrix(field: FieldSpec, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_vec(field, n, n, (0..n * n).map(|_| field.random(rng, 1)).collect()).expect("square")
}

fn check_lc2(cfg: &VerifyConfig, normal: &Matrix, rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<Check> {
    let h = Hyperplane::new(normal.clone())?;
    let v = h.to_affine();
    if !span_of_products(&v, &v, cfg.ceiling)?.is_full() {
        return Ok(fail("products do not span M_n", normal, None, None));
    }
    let space = h.subspace();
    for _ in 0..cfg.targets_per_instance {
        let m = random_matrix(h.field(), cfg.n, rng);
        tally.targets += 1;
        let ok = sum_of_products_decompose(&space, &m).is_ok_and(|s| s.is_valid_for(&space) && s.sum() == m);
        if !ok {
            return Ok(fail("sum of products failed", normal, None, Some(&m)));
        }
    }
    Ok(Ok(()))
}

fn check_prod2(cfg: &VerifyConfig, normal: &Matrix, rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<Check> {
    let h = Hyperplane::new(normal.clone())?;
    let set = product_set(&h.to_affine(), cfg.ceiling)?;
    if !set.is_everything() {
        let missing = (0..set.codec.size())
            .find(|c| !set.codes.contains(c))
            .map(|c| set.codec.decode(c));
        return Ok(fail("product set misses a matrix", normal, None, missing.as_ref()));
    }
    for _ in 0..cfg.targets_per_instance {
        let m = random_matrix(h.field(), cfg.n, rng);
        tally.targets += 1;
        if !hyperplane_pair_factor(&h, &m, &cfg.budget).is_ok_and(|f| f.is_verified()) {
            return Ok(fail("pair factorization failed", normal, None, Some(&m)));
        }
    }
    Ok(Ok(()))
}

fn check_prodall(
    cfg: &VerifyConfig,
    normal: &Matrix,
    value: &Scalar,
    rng: &mut ChaCha8Rng,
    tally: &mut Tally,
) -> Result<Check> {
    let v = AffineSubspace::level_set(normal, value.clone())?;
    let closure = closure_affine(&v, cfg.ceiling)?;
    if !closure.is_everything() {
        return Ok(fail("semigroup closure is not M_n", normal, Some(value), None));
    }
    let fz = SemigroupFactorizer::new(&v, &cfg.budget)?;
    for _ in 0..cfg.targets_per_instance {
        let m = random_matrix(v.field(), cfg.n, rng);
        tally.targets += 1;
        if !fz.factor(&m).is_ok_and(|c| c.is_verified()) {
            return Ok(fail("chain factorization failed", normal, Some(value), Some(&m)));
        }
    }
    Ok(Ok(()))
}

fn check_n2(cfg: &VerifyConfig, normal: &Matrix, tally: &mut Tally) -> Result<Check> {
    let h = Hyperplane::new(normal.clone())?;
    let field = h.field();
    let class = n2_classify(&h)?;
    let set = product_set(&h.to_affine(), cfg.ceiling)?;
    let expected_full = normal.is_invertible();
    let verdict_ok = match class.verdict {
        N2Verdict::Factorable => expected_full && set.is_everything(),
        N2Verdict::ConjugateH0 | N2Verdict::ConjugateT2Plus => !expected_full,
    };
    if !verdict_ok {
        return Ok(fail(
            format!("verdict {:?} disagrees with the product set", class.verdict),
            normal,
            None,
            None,
        ));
    }
    if let Some(s) = &class.conjugator {
        let s_inv = s.inverse().ok_or(Error::SingularConjugator)?;
        match class.verdict {
            N2Verdict::ConjugateH0 => {
                let swap = Matrix::from_ints(field, &[[0, 1], [1, 0]]);
                let pulled = &(&s_inv * &swap) * s;
                if set.contains(&pulled) {
                    return Ok(fail("conjugated swap is a product", normal, None, Some(&pulled)));
                }
            }
            N2Verdict::ConjugateT2Plus => {
                for m in set.matrices() {
                    let moved = &(s * &m) * &s_inv;
                    if !moved.get(1, 0).is_zero() {
                        return Ok(fail("product leaves the triangular algebra", normal, None, Some(&m)));
                    }
                }
            }
            N2Verdict::Factorable => {}
        }
    }
    let all = Codec::square(field, 2)?;
    for code in 0..all.size() {
        let m = all.decode(code);
        tally.targets += 1;
        let factored = match n2_pair_factor(&h, &m, &cfg.budget)? {
            N2Outcome::Factored(f) => {
                if !f.is_verified() {
                    return Ok(fail("unverified n = 2 factorization", normal, None, Some(&m)));
                }
                true
            }
            N2Outcome::Impossible(_) => false,
        };
        if factored != set.contains(&m) {
            return Ok(fail(
                "n = 2 solver disagrees with the product set",
                normal,
                None,
                Some(&m),
            ));
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn codec_round_trips() {
        let f = gf(3);
        let codec = Codec::square(f, 2).unwrap();
        for code in 0..codec.size() {
            assert_eq!(codec.encode(&codec.decode(code)), code);
        }
        let m = Matrix::from_ints(f, &[[1, 2], [0, 1]]);
        assert_eq!(codec.decode(codec.encode(&m)), m);
    }

    #[test]
    fn enumeration_counts() {
        let f = gf(2);
        let point = AffineSubspace::point(Matrix::identity(f, 2));
        assert_eq!(enumerate_affine(&point, DEFAULT_CEILING).unwrap().count(), 1);
        let sl2 = AffineSubspace::linear(LinearSubspace::sl(f, 2));
        let all: std::collections::HashSet<Matrix> = enumerate_affine(&sl2, DEFAULT_CEILING).unwrap().collect();
        assert_eq!(all.len(), 8);
        let h = Hyperplane::sl(gf(3), 3).to_affine();
        assert_eq!(h.cardinality().unwrap(), 6561);
        assert!(matches!(enumerate_affine(&h, 100), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn affine_digits_are_distinct_members() {
        let f = gf(3);
        let v = AffineSubspace::level_set(&Matrix::identity(f, 2), f.one()).unwrap();
        let codec = Codec::square(f, 2).unwrap();
        let digits = affine_digits(&codec, &v, DEFAULT_CEILING).unwrap();
        let codes: BTreeSet<u64> = digits.iter().map(|d| codec.pack(d)).collect();
        assert_eq!(codes.len(), 27);
        assert!(codes.iter().all(|&c| v.contains(&codec.decode(c))));
    }

    #[test]
    fn identity_products() {
        let i = Matrix::identity(gf(2), 3);
        let set = product_set_of(std::slice::from_ref(&i), std::slice::from_ref(&i)).unwrap();
        assert_eq!(set.matrices().collect::<Vec<_>>(), vec![i.clone()]);
        let c = closure(std::slice::from_ref(&i), DEFAULT_CEILING).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.witness(&i).unwrap(), vec![i]);
    }

    #[test]
    fn swap_is_not_a_product_of_h0() {
        let f = gf(2);
        let h0 = Hyperplane::new(Matrix::unit(f, 2, 2, 0, 0)).unwrap();
        let set = product_set(&h0.to_affine(), DEFAULT_CEILING).unwrap();
        assert!(!set.contains(&Matrix::from_ints(f, &[[0, 1], [1, 0]])));
    }

    #[test]
    fn sl3_gf2_products_cover_everything() {
        let set = product_set(&Hyperplane::sl(gf(2), 3).to_affine(), DEFAULT_CEILING).unwrap();
        assert_eq!(set.len(), 512);
    }

    #[test]
    fn w1_is_closed() {
        let f = gf(2);
        let w1 = AffineSubspace::linear(LinearSubspace::w1(f, 3));
        let c = closure_affine(&w1, DEFAULT_CEILING).unwrap();
        assert_eq!(c.len() as u128, w1.cardinality().unwrap());
        assert!(c.elements().matrices().all(|m| w1.contains(&m)));
    }

    #[test]
    fn trace_zero_closure_is_everything() {
        let f = gf(2);
        let v = Hyperplane::sl(f, 3).to_affine();
        let c = closure_affine(&v, DEFAULT_CEILING).unwrap();
        assert!(c.is_everything());
        for m in c.elements().matrices() {
            let word = c.witness(&m).unwrap();
            let prod = word.iter().skip(1).fold(word[0].clone(), |acc, g| &acc * g);
            assert_eq!(prod, m);
        }
    }

    #[test]
    fn closure_is_idempotent_and_contains_products() {
        let f = gf(3);
        let gens = vec![
            Matrix::from_ints(f, &[[1, 1], [0, 1]]),
            Matrix::from_ints(f, &[[2, 0], [0, 1]]),
        ];
        let c = closure(&gens, DEFAULT_CEILING).unwrap();
        let again: Vec<Matrix> = c.elements().matrices().collect();
        assert_eq!(closure(&again, DEFAULT_CEILING).unwrap().len(), c.len());
        let pairs = product_set_of(&gens, &gens).unwrap();
        assert!(pairs.is_subset(&c.elements()));
    }

    #[test]
    fn normals_count() {
        assert_eq!(hyperplane_normals(gf(2), 3).unwrap().count(), 511);
        assert_eq!(hyperplane_normals(gf(3), 2).unwrap().count(), 40);
    }

    #[test]
    fn span_of_products_matches_library_span() {
        let f = gf(3);
        let v = AffineSubspace::linear(LinearSubspace::w1(f, 3));
        let oracle = span_of_products(&v, &v, DEFAULT_CEILING).unwrap();
        let lib = crate::subspace::product_span_two(v.translation(), v.translation()).unwrap();
        assert_eq!(oracle, lib);
    }

    #[test]
    fn small_suites_pass() {
        let mut cfg = VerifyConfig::new(Theorem::N2class, 2, 2);
        cfg.exhaustive = true;
        assert!(verify_theorem(&cfg).unwrap().passed);
        let cfg = VerifyConfig::new(Theorem::Prod2, 3, 2);
        assert!(verify_theorem(&cfg).unwrap().passed);
        let cfg = VerifyConfig::new(Theorem::Lc2, 3, 2);
        assert!(verify_theorem(&cfg).unwrap().passed);
        let mut cfg = VerifyConfig::new(Theorem::Prodall, 3, 2);
        cfg.samples = 4;
        assert!(verify_theorem(&cfg).unwrap().passed);
    }

    #[test]
    fn theorem_names_round_trip() {
        for t in [Theorem::Lc2, Theorem::Prodall, Theorem::Prod2, Theorem::N2class] {
            assert_eq!(t.to_string().parse::<Theorem>().unwrap(), t);
        }
        assert!(verify_theorem(&VerifyConfig::new(Theorem::Prod2, 2, 2)).is_err());
    }
}

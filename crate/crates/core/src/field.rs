//! Exact scalars over a prime field GF(p) or the rationals.
//!
//! A [`Scalar`] always carries its field, and arithmetic between scalars of
//! different fields is rejected. Values are kept in canonical form: a
//! representative in `[0, p)` for GF(p), a reduced fraction with positive
//! denominator for Q. Equality is therefore representational equality.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus (exclusive); keeps `a * b` inside `u64`.
const MAX_MODULUS: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Prime(u64),
    Rationals,
}

/// Description of the base field K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFieldSpec", into = "RawFieldSpec")]
pub struct FieldSpec(Kind);

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawFieldSpec {
    PrimeField { p: u64 },
    Rationals,
}

impl TryFrom<RawFieldSpec> for FieldSpec {
    type Error = Error;

    fn try_from(raw: RawFieldSpec) -> Result<Self> {
        match raw {
            RawFieldSpec::PrimeField { p } => FieldSpec::prime(p),
            RawFieldSpec::Rationals => Ok(FieldSpec::rationals()),
        }
    }
}

impl From<FieldSpec> for RawFieldSpec {
    fn from(f: FieldSpec) -> Self {
        match f.0 {
            Kind::Prime(p) => RawFieldSpec::PrimeField { p },
            Kind::Rationals => RawFieldSpec::Rationals,
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// GF(p); fails unless `p` is a prime below 2^31.
    pub fn prime(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec(Kind::Prime(p)))
    }

    pub fn rationals() -> Self {
        FieldSpec(Kind::Rationals)
    }

    /// The modulus p for GF(p), `None` for Q.
    pub fn modulus(&self) -> Option<u64> {
        match self.0 {
            Kind::Prime(p) => Some(p),
            Kind::Rationals => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modulus().is_some()
    }

    pub fn zero(&self) -> Scalar {
        Scalar::from_i64(*self, 0)
    }

    pub fn one(&self) -> Scalar {
        Scalar::from_i64(*self, 1)
    }

    pub fn check_same(&self, other: &FieldSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FieldMismatch(*self, *other))
        }
    }

    /// All elements of a finite field in ascending representative order.
    pub fn elements(&self) -> Result<impl Iterator<Item = Scalar> + Clone> {
        let p = self.modulus().ok_or(Error::InfiniteField)?;
        Ok((0..p).map(move |v| Scalar(Repr::Mod { v, p })))
    }

    /// Draws a scalar: uniform over GF(p), an integer in `[-spread, spread]` over Q.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R, spread: i64) -> Scalar {
        match self.0 {
            Kind::Prime(p) => Scalar(Repr::Mod {
                v: rng.gen_range(0..p),
                p,
            }),
            Kind::Rationals => Scalar::from_i64(*self, rng.gen_range(-spread..=spread)),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Kind::Prime(p) => write!(f, "GF({p})"),
            Kind::Rationals => write!(f, "Q"),
        }
    }
}

/// Enumerates GF(p); errors with `InfiniteField` over Q.
pub fn enumerate_field(f: FieldSpec) -> Result<impl Iterator<Item = Scalar> + Clone> {
    f.elements()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Mod { v: u64, p: u64 },
    Rat(BigRational),
}

/// An element of a [`FieldSpec`] in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar(Repr);

/// Arithmetic selector for [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary arithmetic on two scalars.
pub fn arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => a.checked_div(b),
    }
}

fn reduce_i128(x: i128, p: u64) -> u64 {
    x.rem_euclid(p as i128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

impl Scalar {
    pub fn from_i64(field: FieldSpec, x: i64) -> Self {
        match field.0 {
            Kind::Prime(p) => Scalar(Repr::Mod {
                v: reduce_i128(x as i128, p),
                p,
            }),
            Kind::Rationals => Scalar(Repr::Rat(BigRational::from_integer(BigInt::from(x)))),
        }
    }

    /// `num / den` in the given field; `den` must be invertible there.
    pub fn from_ratio(field: FieldSpec, num: i64, den: i64) -> Result<Self> {
        Scalar::from_i64(field, num).checked_div(&Scalar::from_i64(field, den))
    }

    pub fn from_big_rational(q: BigRational) -> Self {
        Scalar(Repr::Rat(q))
    }

    pub fn field(&self) -> FieldSpec {
        match &self.0 {
            Repr::Mod { p, .. } => FieldSpec(Kind::Prime(*p)),
            Repr::Rat(_) => FieldSpec::rationals(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Mod { v, .. } => *v == 0,
            Repr::Rat(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.0 {
            Repr::Mod { v, .. } => *v == 1,
            Repr::Rat(q) => q.is_one(),
        }
    }

    /// Canonical residue for GF(p) scalars.
    pub fn residue(&self) -> Option<u64> {
        match &self.0 {
            Repr::Mod { v, .. } => Some(*v),
            Repr::Rat(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Rat(q) => Some(q),
            Repr::Mod { .. } => None,
        }
    }

    pub fn checked_add(&self, rhs: &Scalar) -> Result<Scalar> {
        match (&self.0, &rhs.0) {
            (Repr::Mod { v: a, p }, Repr::Mod { v: b, p: q }) if p == q => {
                Ok(Scalar(Repr::Mod { v: (a + b) % p, p: *p }))
            }
            (Repr::Rat(a), Repr::Rat(b)) => Ok(Scalar(Repr::Rat(a + b))),
            _ => Err(Error::FieldMismatch(self.field(), rhs.field())),
        }
    }

    pub fn checked_sub(&self, rhs: &Scalar) -> Result<Scalar> {
        match (&self.0, &rhs.0) {
            (Repr::Mod { v: a, p }, Repr::Mod { v: b, p: q }) if p == q => Ok(Scalar(Repr::Mod {
                v: (a + p - b) % p,
                p: *p,
            })),
            (Repr::Rat(a), Repr::Rat(b)) => Ok(Scalar(Repr::Rat(a - b))),
            _ => Err(Error::FieldMismatch(self.field(), rhs.field())),
        }
    }

    pub fn checked_mul(&self, rhs: &Scalar) -> Result<Scalar> {
        match (&self.0, &rhs.0) {
            (Repr::Mod { v: a, p }, Repr::Mod { v: b, p: q }) if p == q => {
                Ok(Scalar(Repr::Mod { v: a * b % p, p: *p }))
            }
            (Repr::Rat(a), Repr::Rat(b)) => Ok(Scalar(Repr::Rat(a * b))),
            _ => Err(Error::FieldMismatch(self.field(), rhs.field())),
        }
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar> {
        self.field().check_same(&rhs.field())?;
        let inv = rhs.inv().ok_or(Error::DivisionByZero)?;
        self.checked_mul(&inv)
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match &self.0 {
            // Fermat: v^(p-2) = v^-1 for prime p.
            Repr::Mod { v, p } => Scalar(Repr::Mod {
                v: pow_mod(*v, p - 2, *p),
                p: *p,
            }),
            Repr::Rat(q) => Scalar(Repr::Rat(q.recip())),
        })
    }

    /// Parses the text form: a decimal integer for GF(p) (reduced mod p),
    /// `a` or `a/b` with `b != 0` for Q.
    pub fn parse(field: FieldSpec, text: &str) -> Result<Scalar> {
        let text = text.trim();
        let bad = || Error::Parse(format!("invalid {field} scalar {text:?}"));
        match field.0 {
            Kind::Prime(p) => {
                let x = i128::from_str(text).map_err(|_| bad())?;
                Ok(Scalar(Repr::Mod {
                    v: reduce_i128(x, p),
                    p,
                }))
            }
            Kind::Rationals => {
                let (num, den) = match text.split_once('/') {
                    Some((a, b)) => (a.trim(), b.trim()),
                    None => (text, "1"),
                };
                let num = BigInt::from_str(num).map_err(|_| bad())?;
                let den = BigInt::from_str(den).map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(Scalar(Repr::Rat(BigRational::new(num, den))))
            }
        }
    }

    /// Exact integer value, if this scalar is a rational with denominator 1.
    pub fn to_integer(&self) -> Option<BigInt> {
        match &self.0 {
            Repr::Rat(q) if q.is_integer() => Some(q.to_integer()),
            Repr::Mod { v, .. } => Some(BigInt::from(*v)),
            _ => None,
        }
    }

    /// Rough size for growth diagnostics (bits of numerator plus denominator).
    pub fn bit_size(&self) -> u64 {
        match &self.0 {
            Repr::Mod { .. } => 0,
            Repr::Rat(q) => q.numer().bits() + q.denom().bits(),
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(&self.0, Repr::Rat(q) if q.is_negative())
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Mod { v, .. } => *v as f64,
            Repr::Rat(q) => q.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Mod { v, .. } => write!(f, "{v}"),
            Repr::Rat(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}

// The operator impls panic on mixed fields. Matrix code checks fields once
// per matrix, so entries are known to agree by the time they meet here.
macro_rules! forward_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs)
                    .expect(concat!("Scalar::", stringify!($method)))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);
forward_op!(Div, div, checked_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match &self.0 {
            Repr::Mod { v, p } => Scalar(Repr::Mod { v: (p - v) % p, p: *p }),
            Repr::Rat(q) => Scalar(Repr::Rat(-q)),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

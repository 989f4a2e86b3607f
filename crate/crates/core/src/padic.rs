//! Fixed-precision p-adic numbers.
//!
//! A nonzero element is stored as `p^v * u + O(p^(v + k))` with `u` a unit
//! reduced modulo `p^k`, so `k` is the relative precision. Zero is a separate
//! value that only records an absolute bound `O(p^a)`: it means "not
//! distinguishable from zero below `p^a`", never exact nullity.
//!
//! Additive operations intersect absolute precisions, multiplicative ones
//! keep the smaller relative precision. Cancellation in a sum therefore
//! shows up as a shorter unit, not as wrong digits.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Trial-division primality test, fine for the small primes used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigUint {
        BigUint::from(self.0)
    }

    /// `p^e` for `e >= 0`.
    pub fn pow(self, e: i64) -> BigUint {
        assert!(e >= 0, "negative exponent {e}");
        self.big().pow(e as u32)
    }

    /// Number of bits of `p^k`.
    pub fn power_bits(self, k: i64) -> u64 {
        self.pow(k).bits()
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Splits `n != 0` into `(v, n / p^v)` with the quotient prime to `p`.
pub(crate) fn split_valuation(n: &BigUint, p: Prime) -> (i64, BigUint) {
    debug_assert!(!n.is_zero());
    let pb = p.big();
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

pub(crate) fn reduce_signed(n: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    n.mod_floor(&m).magnitude().clone()
}

pub(crate) fn inverse_mod(u: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    if modulus.is_one() {
        return Some(BigUint::zero());
    }
    let a = BigInt::from(u.clone());
    let m = BigInt::from(modulus.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(reduce_signed(&e.x, modulus))
}

#[derive(Debug, Clone)]
enum Repr {
    Zero { absolute: i64 },
    Nonzero { valuation: i64, unit: BigUint, precision: i64 },
}

/// An element of Q_p known to finite precision.
///
/// There is no `PartialEq`: two values can only be compared up to the
/// precision both of them certify, see [`PadicNumber::agrees_with`].
#[derive(Debug, Clone)]
pub struct PadicNumber {
    prime: Prime,
    repr: Repr,
}

impl PadicNumber {
    /// `O(p^absolute)`.
    pub fn zero(prime: Prime, absolute: i64) -> Self {
        PadicNumber { prime, repr: Repr::Zero { absolute } }
    }

    pub fn one(prime: Prime, precision: i64) -> Self {
        Self::from_integer(1, prime, precision)
    }

    /// Builds `p^valuation * n + O(p^(valuation + precision))`, pulling any
    /// factor of `p` out of `n` first.
    pub fn from_parts(prime: Prime, valuation: i64, n: BigUint, precision: i64) -> Self {
        if precision <= 0 {
            return Self::zero(prime, valuation + precision);
        }
        let n = n % prime.pow(precision);
        if n.is_zero() {
            return Self::zero(prime, valuation + precision);
        }
        let (w, unit) = split_valuation(&n, prime);
        PadicNumber {
            prime,
            repr: Repr::Nonzero { valuation: valuation + w, unit, precision: precision - w },
        }
    }

    /// Little-endian base-p digits of the unit part.
    pub fn from_digits(prime: Prime, valuation: i64, digits: &[u64], precision: i64) -> Self {
        let pb = prime.big();
        let n = digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &pb + BigUint::from(d));
        Self::from_parts(prime, valuation, n, precision)
    }

    /// An integer with `precision` relative digits. Zero becomes `O(p^precision)`.
    pub fn from_integer(n: impl Into<BigInt>, prime: Prime, precision: i64) -> Self {
        assert!(precision >= 1, "precision must be positive");
        let n: BigInt = n.into();
        if n.is_zero() {
            return Self::zero(prime, precision);
        }
        let (v, _) = split_valuation(n.magnitude(), prime);
        let scale = BigInt::from(prime.pow(v));
        let unit = reduce_signed(&(&n / scale), &prime.pow(precision));
        PadicNumber { prime, repr: Repr::Nonzero { valuation: v, unit, precision } }
    }

    pub fn from_rational(
        numerator: impl Into<BigInt>,
        denominator: impl Into<BigInt>,
        prime: Prime,
        precision: i64,
    ) -> Result<Self> {
        let den: BigInt = denominator.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_bigrational(&BigRational::new(numerator.into(), den), prime, precision))
    }

    pub fn from_bigrational(q: &BigRational, prime: Prime, precision: i64) -> Self {
        assert!(precision >= 1, "precision must be positive");
        if q.is_zero() {
            return Self::zero(prime, precision);
        }
        let (vn, un) = split_valuation(q.numer().magnitude(), prime);
        let (vd, ud) = split_valuation(q.denom().magnitude(), prime);
        let modulus = prime.pow(precision);
        let inv = inverse_mod(&(ud % &modulus), &modulus).expect("denominator unit is invertible");
        let mut unit = (un * inv) % &modulus;
        if q.is_negative() {
            unit = (&modulus - unit) % &modulus;
        }
        PadicNumber { prime, repr: Repr::Nonzero { valuation: vn - vd, unit, precision } }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Indistinguishable from zero at the stored precision.
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// `None` encodes the `+inf` valuation of the zero element.
    pub fn valuation(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { valuation, .. } => Some(valuation),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { unit, .. } => Some(unit),
        }
    }

    /// Relative precision; for zero this is 0.
    pub fn relative_precision(&self) -> i64 {
        match self.repr {
            Repr::Zero { .. } => 0,
            Repr::Nonzero { precision, .. } => precision,
        }
    }

    /// The exponent `a` in the trailing `O(p^a)`.
    pub fn absolute_precision(&self) -> i64 {
        match self.repr {
            Repr::Zero { absolute } => absolute,
            Repr::Nonzero { valuation, precision, .. } => valuation + precision,
        }
    }

    /// `p^{-v}`, and 0 for the zero element.
    pub fn norm(&self) -> BigRational {
        match self.valuation() {
            None => BigRational::zero(),
            Some(v) if v >= 0 => BigRational::new(BigInt::one(), BigInt::from(self.prime.pow(v))),
            Some(v) => BigRational::from_integer(BigInt::from(self.prime.pow(-v))),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    pub fn in_pzp(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 1)
    }

    /// Little-endian digits of the unit, trailing zeros dropped.
    pub fn digits(&self) -> Vec<u64> {
        let Some(unit) = self.unit() else { return Vec::new() };
        let pb = self.prime.big();
        let mut out = Vec::new();
        let mut n = unit.clone();
        while !n.is_zero() {
            let (q, r) = n.div_rem(&pb);
            out.push(r.to_u64().unwrap_or(0));
            n = q;
        }
        out
    }

    /// Integer representative in `[0, p^k)` of an integral element whose
    /// absolute precision is at least `k`.
    pub fn residue(&self, k: i64) -> Result<BigUint> {
        if !self.is_integral() {
            return Err(Error::NotIntegral(self.valuation().unwrap_or(0)));
        }
        if self.absolute_precision() < k {
            return Err(Error::InsufficientPrecision { needed: k, available: self.absolute_precision() });
        }
        Ok(match &self.repr {
            Repr::Zero { .. } => BigUint::zero(),
            Repr::Nonzero { valuation, unit, .. } => (unit * self.prime.pow(*valuation)) % self.prime.pow(k),
        })
    }

    /// The exact rational `p^v * u` (zero for the zero element).
    pub fn lift(&self) -> BigRational {
        match &self.repr {
            Repr::Zero { .. } => BigRational::zero(),
            Repr::Nonzero { valuation, unit, .. } => {
                let u = BigRational::from_integer(BigInt::from(unit.clone()));
                if *valuation >= 0 {
                    u * BigRational::from_integer(BigInt::from(self.prime.pow(*valuation)))
                } else {
                    u / BigRational::from_integer(BigInt::from(self.prime.pow(-valuation)))
                }
            }
        }
    }

    /// Drops digits so that the absolute precision is at most `absolute`.
    pub fn truncate(&self, absolute: i64) -> Self {
        if absolute >= self.absolute_precision() {
            return self.clone();
        }
        match &self.repr {
            Repr::Zero { .. } => Self::zero(self.prime, absolute),
            Repr::Nonzero { valuation, unit, .. } => {
                Self::from_parts(self.prime, *valuation, unit.clone(), absolute - valuation)
            }
        }
    }

    /// Exact multiplication by `p^e`.
    pub fn shift(&self, e: i64) -> Self {
        let repr = match &self.repr {
            Repr::Zero { absolute } => Repr::Zero { absolute: absolute + e },
            Repr::Nonzero { valuation, unit, precision } => {
                Repr::Nonzero { valuation: valuation + e, unit: unit.clone(), precision: *precision }
            }
        };
        PadicNumber { prime: self.prime, repr }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime.get(), other.prime.get()))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        Ok(self.add_unchecked(&other.negate()))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        Ok(self.mul_unchecked(&other.invert()?))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let p = self.prime;
        let a = self.absolute_precision().min(other.absolute_precision());
        match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, Repr::Zero { .. }) => Self::zero(p, a),
            (Repr::Zero { .. }, Repr::Nonzero { .. }) => other.truncate(a),
            (Repr::Nonzero { .. }, Repr::Zero { .. }) => self.truncate(a),
            (
                Repr::Nonzero { valuation: vx, unit: ux, .. },
                Repr::Nonzero { valuation: vy, unit: uy, .. },
            ) => {
                let vmin = (*vx).min(*vy);
                let n = ux * p.pow(vx - vmin) + uy * p.pow(vy - vmin);
                Self::from_parts(p, vmin, n, a - vmin)
            }
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let p = self.prime;
        match (&self.repr, &other.repr) {
            (Repr::Zero { absolute: a }, Repr::Zero { absolute: b }) => Self::zero(p, a + b),
            (Repr::Zero { absolute }, Repr::Nonzero { valuation, .. })
            | (Repr::Nonzero { valuation, .. }, Repr::Zero { absolute }) => Self::zero(p, absolute + valuation),
            (
                Repr::Nonzero { valuation: vx, unit: ux, precision: kx },
                Repr::Nonzero { valuation: vy, unit: uy, precision: ky },
            ) => {
                let k = (*kx).min(*ky);
                let unit = (ux * uy) % p.pow(k);
                PadicNumber { prime: p, repr: Repr::Nonzero { valuation: vx + vy, unit, precision: k } }
            }
        }
    }

    fn negate(&self) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Nonzero { valuation, unit, precision } => {
                let m = self.prime.pow(*precision);
                PadicNumber {
                    prime: self.prime,
                    repr: Repr::Nonzero { valuation: *valuation, unit: &m - unit, precision: *precision },
                }
            }
        }
    }

    pub fn invert(&self) -> Result<Self> {
        match &self.repr {
            Repr::Zero { .. } => Err(Error::NotInvertible),
            Repr::Nonzero { valuation, unit, precision } => {
                let inv = inverse_mod(unit, &self.prime.pow(*precision)).expect("unit is invertible");
                Ok(PadicNumber {
                    prime: self.prime,
                    repr: Repr::Nonzero { valuation: -valuation, unit: inv, precision: *precision },
                })
            }
        }
    }

    /// `x^0` is a one carrying the larger of the two precisions of `x`.
    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            let k = self.relative_precision().max(self.absolute_precision()).max(1);
            return Self::from_parts(self.prime, 0, BigUint::one(), k);
        }
        let mut acc: Option<Self> = None;
        let mut base = self.clone();
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul_unchecked(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul_unchecked(&base);
        }
        acc.expect("e >= 1")
    }

    /// True when the two values coincide at the precision both certify.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.check_prime(other).is_ok() && self.add_unchecked(&other.negate()).is_zero()
    }

    /// Valuation of `self - other`; when the difference vanishes at
    /// precision this is the shared absolute precision.
    pub fn discrepancy_valuation(&self, other: &Self) -> Result<i64> {
        let d = self.checked_sub(other)?;
        Ok(d.valuation().unwrap_or_else(|| d.absolute_precision()))
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prime.get();
        match &self.repr {
            Repr::Zero { absolute } => write!(f, "O({p}^{absolute})"),
            Repr::Nonzero { valuation, precision, .. } => {
                write!(f, "{p}^{valuation} * (")?;
                for (i, d) in self.digits().iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    match i {
                        0 => write!(f, "{d}")?,
                        1 => write!(f, "{d}*{p}")?,
                        _ => write!(f, "{d}*{p}^{i}")?,
                    }
                }
                write!(f, ") + O({p}^{})", valuation + precision)
            }
        }
    }
}

impl Serialize for PadicNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PadicNumber", 4)?;
        s.serialize_field("p", &self.prime.get())?;
        s.serialize_field("v", &self.valuation())?;
        s.serialize_field("digits", &self.digits())?;
        match self.repr {
            Repr::Zero { absolute } => s.serialize_field("prec", &absolute)?,
            Repr::Nonzero { precision, .. } => s.serialize_field("prec", &precision)?,
        }
        s.end()
    }
}

impl Neg for &PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        self.negate()
    }
}

impl Neg for PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        self.negate()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&PadicNumber> for &PadicNumber {
            type Output = PadicNumber;
            fn $method(self, rhs: &PadicNumber) -> PadicNumber {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<PadicNumber> for PadicNumber {
            type Output = PadicNumber;
            fn $method(self, rhs: PadicNumber) -> PadicNumber {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&PadicNumber> for PadicNumber {
            type Output = PadicNumber;
            fn $method(self, rhs: &PadicNumber) -> PadicNumber {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

//! The Morita p-adic gamma function.
//!
//! For a natural number `n`,
//!
//! ```text
//! Γ_p(n) = (-1)^n * prod_{1 <= j < n, p ∤ j} j
//! ```
//!
//! and `Γ_p` extends continuously to `Z_p`. A value modulo `p^K` only depends
//! on the argument modulo `p^K` (modulo `2^3` when `p = 2, K = 2`), so
//! `Γ_p(x)` is computed from the natural representative of `x`.
//!
//! Representatives are as large as `p^K`, so the restricted product is not
//! formed term by term. Instead, for every level `r >= 1`, the evaluator keeps
//!
//! ```text
//! H_r(s) = prod_{0 <= j < p^r, p ∤ j} (p^r * s + j)   (mod p^K)
//! ```
//!
//! as a polynomial in `s`. The coefficient of `s^i` is divisible by `p^(r*i)`,
//! so `H_r` has fewer than `K / r + 1` live coefficients, and
//! `H_{r+1}(s) = prod_{a < p} H_r(p*s + a)`. A product over `[0, N)` then
//! takes one block evaluation per base-p digit unit of `N`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intpoly::IntPolynomial;
use crate::padic::{PadicNumber, Prime};

/// `n!*`: product of the `j` in `[1, n]` not divisible by `p`.
pub fn restricted_factorial(n: u64, prime: Prime) -> BigUint {
    let p = prime.get();
    (1..=n).filter(|j| j % p != 0).map(BigUint::from).product()
}

/// `(p - 1)! ≡ -1 (mod p)`.
pub fn wilson_check(prime: Prime) -> bool {
    let p = prime.get() as u128;
    let fact = (1..p).fold(1u128, |acc, j| acc * j % p);
    fact == p - 1
}

/// `f(X) = (-1)^p (X + p - 1)(X + p - 2) ... (X + 1)`.
pub fn f_poly(prime: Prime) -> IntPolynomial {
    let p = prime.get();
    let prod = (1..p).fold(IntPolynomial::constant(1), |acc, i| acc.mul(&IntPolynomial::linear(i)));
    if p % 2 == 1 {
        prod.scale(&BigInt::from(-1))
    } else {
        prod
    }
}

/// `h_p(x) = -x` on units and `-1` on `pZ_p`.
pub fn h_p(x: &PadicNumber) -> Result<PadicNumber> {
    if !x.is_integral() {
        return Err(Error::NotIntegral(x.valuation().unwrap_or(0)));
    }
    if x.is_unit() {
        Ok(-x)
    } else {
        Ok(-PadicNumber::one(x.prime(), x.absolute_precision().max(1)))
    }
}

/// Result of comparing the two sides of an identity at their shared precision.
#[derive(Debug, Clone)]
pub struct Check {
    pub lhs: PadicNumber,
    pub rhs: PadicNumber,
    /// Valuation of `lhs - rhs`, or the shared precision when they agree.
    pub discrepancy: i64,
    pub precision: i64,
}

impl Check {
    fn new(lhs: PadicNumber, rhs: PadicNumber) -> Result<Self> {
        let discrepancy = lhs.discrepancy_valuation(&rhs)?;
        let precision = lhs.absolute_precision().min(rhs.absolute_precision());
        Ok(Check { lhs, rhs, discrepancy, precision })
    }

    pub fn holds(&self) -> bool {
        self.discrepancy >= self.precision
    }
}

/// Γ_p at a fixed precision, with the block polynomials precomputed.
///
/// Immutable after construction, so one evaluator can be shared by
/// reference across threads.
#[derive(Debug, Clone)]
pub struct GammaEvaluator {
    prime: Prime,
    precision: i64,
    // precision the products are carried at; one more digit than needed for p = 2, K = 2
    internal: i64,
    modulus: BigUint,
    // blocks[r] = coefficients of H_r, r >= 1
    blocks: Vec<Vec<BigUint>>,
}

impl GammaEvaluator {
    pub fn new(prime: Prime, precision: i64) -> Result<Self> {
        if precision < 1 {
            return Err(Error::InvalidPrecision(precision));
        }
        let internal = if prime.get() == 2 && precision == 2 { 3 } else { precision };
        let modulus = prime.pow(internal);
        let blocks = build_blocks(prime, internal, &modulus);
        Ok(GammaEvaluator { prime, precision, internal, modulus, blocks })
    }

    /// Like [`GammaEvaluator::new`], refusing moduli `p^K` wider than `max_bits`.
    pub fn with_work_limit(prime: Prime, precision: i64, max_bits: u64) -> Result<Self> {
        if precision >= 1 && prime.power_bits(precision) > max_bits {
            return Err(Error::ConfigRejected(format!(
                "{prime}^{precision} exceeds the work limit of {max_bits} bits"
            )));
        }
        Self::new(prime, precision)
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// Number of input digits needed to determine `Γ_p` at this precision.
    pub fn input_digits(&self) -> i64 {
        self.internal
    }

    /// `prod_{1 <= j < n, p ∤ j} j mod p^internal` for `n < p^internal`.
    fn restricted_product_below(&self, n: &BigUint) -> BigUint {
        let p = self.prime.big();
        let mut digits = Vec::new();
        let mut rest = n.clone();
        while !rest.is_zero() {
            let (q, r) = rest.div_rem(&p);
            digits.push(r.to_u64().expect("digit < p"));
            rest = q;
        }
        let mut prod = BigUint::one();
        let mut offset = BigUint::zero();
        for r in (1..digits.len()).rev() {
            let step = self.prime.pow(r as i64);
            for _ in 0..digits[r] {
                let s = &offset / &step;
                prod = prod * eval_mod(&self.blocks[r], &s, &self.modulus) % &self.modulus;
                offset += &step;
            }
        }
        // offset is now a multiple of p
        for i in 1..digits.first().copied().unwrap_or(0) {
            prod = prod * (&offset + BigUint::from(i)) % &self.modulus;
        }
        prod
    }

    /// Γ_p(n) for a natural number `n`, as a unit with `precision` digits.
    pub fn gamma_nat(&self, n: &BigUint) -> PadicNumber {
        let reduced = n % &self.modulus;
        let prod = self.restricted_product_below(&reduced);
        let value = if reduced.is_odd() { (&self.modulus - prod) % &self.modulus } else { prod };
        PadicNumber::from_parts(self.prime, 0, value, self.precision)
    }

    pub fn gamma_nat_u64(&self, n: u64) -> PadicNumber {
        self.gamma_nat(&BigUint::from(n))
    }

    /// Γ_p(x) for `x ∈ Z_p`.
    pub fn gamma(&self, x: &PadicNumber) -> Result<PadicNumber> {
        if !x.is_integral() {
            return Err(Error::NotIntegral(x.valuation().unwrap_or(0)));
        }
        let n = x.residue(self.internal)?;
        Ok(self.gamma_nat(&n))
    }

    /// Γ_p(x + 1) against h_p(x) Γ_p(x).
    pub fn check_functional(&self, x: &PadicNumber) -> Result<Check> {
        let one = PadicNumber::one(self.prime, self.precision);
        let lhs = self.gamma(&(x + &one))?;
        let rhs = &h_p(x)? * &self.gamma(x)?;
        Check::new(lhs, rhs)
    }

    /// g(x + p) against f(x) g(x) for `x ∈ pZ_p`.
    pub fn check_pstep(&self, x: &PadicNumber) -> Result<Check> {
        if !x.in_pzp() {
            return Err(Error::NotInMaximalIdeal(x.valuation().unwrap_or(0)));
        }
        let p = PadicNumber::from_integer(self.prime.get(), self.prime, self.precision);
        let lhs = self.gamma(&(x + &p))?;
        let rhs = &f_poly(self.prime).eval_padic(x) * &self.gamma(x)?;
        Check::new(lhs, rhs)
    }
}

/// One-shot Γ_p(n) mod p^K.
pub fn gamma_nat(n: u64, prime: Prime, precision: i64) -> Result<PadicNumber> {
    Ok(GammaEvaluator::new(prime, precision)?.gamma_nat_u64(n))
}

fn eval_mod(coeffs: &[BigUint], s: &BigUint, modulus: &BigUint) -> BigUint {
    coeffs.iter().rev().fold(BigUint::zero(), |acc, c| (acc * s + c) % modulus)
}

fn mul_trunc(a: &[BigUint], b: &[BigUint], len: usize, modulus: &BigUint) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); len.min(a.len() + b.len() - 1)];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= out.len() {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out.iter_mut().for_each(|c| *c %= modulus);
    out
}

/// `h(c*s + a)` truncated to `len` coefficients.
fn compose_linear(h: &[BigUint], c: &BigUint, a: &BigUint, len: usize, modulus: &BigUint) -> Vec<BigUint> {
    let lin = [a.clone(), c.clone()];
    let mut acc = vec![BigUint::zero()];
    for coef in h.iter().rev() {
        acc = mul_trunc(&acc, &lin, len, modulus);
        acc[0] = (&acc[0] + coef) % modulus;
    }
    acc
}

fn live_len(internal: i64, r: i64) -> usize {
    ((internal + r - 1) / r).max(1) as usize
}

fn build_blocks(prime: Prime, internal: i64, modulus: &BigUint) -> Vec<Vec<BigUint>> {
    let p = prime.get();
    let pb = prime.big();
    let mut blocks = vec![Vec::new()];
    if internal < 2 {
        return blocks;
    }
    let len = live_len(internal, 1);
    let mut h = vec![BigUint::one()];
    for i in 1..p {
        h = mul_trunc(&h, &[BigUint::from(i), pb.clone()], len, modulus);
    }
    blocks.push(h);
    for r in 2..internal {
        let len = live_len(internal, r);
        let prev = &blocks[(r - 1) as usize];
        let mut next = vec![BigUint::one()];
        for a in 0..p {
            let shifted = compose_linear(prev, &pb, &BigUint::from(a), len, modulus);
            next = mul_trunc(&next, &shifted, len, modulus);
        }
        blocks.push(next);
    }
    blocks
}

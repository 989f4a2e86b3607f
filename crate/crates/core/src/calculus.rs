//! Derivatives of functions on `pZ_p` that are only available as evaluators.
//!
//! Derivatives come from forward differences with step `h = p^m`. A single
//! difference quotient `Δ_h^k f(x) / h^k` is only accurate to `O(h)`, so the
//! estimator sums the forward-difference series
//!
//! ```text
//! f^(k)(x) = h^-k * sum_{l >= k} (k! s(l, k) / l!) Δ_h^l f(x)
//! ```
//!
//! (`s` the signed Stirling numbers of the first kind, i.e. the expansion of
//! `log(1 + Δ)^k`) until the differences vanish at the working precision.
//! For a locally analytic `f`, `v(Δ_h^l f)` grows roughly like `l * m`, so
//! the series stops after a few dozen terms at most.
//!
//! Precision: the division by `h^k` costs `k*m` digits and the rational
//! weights cost `v(l!)` more; `certified_digits` reports what is left minus
//! a guard.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gamma::GammaEvaluator;
use crate::intpoly::IntPolynomial;
use crate::padic::{PadicNumber, Prime};

pub const DEFAULT_GUARD: i64 = 4;

/// Something that can be evaluated on `pZ_p`.
pub trait PadicFunction: Sync {
    fn eval(&self, x: &PadicNumber) -> Result<PadicNumber>;
}

impl PadicFunction for GammaEvaluator {
    fn eval(&self, x: &PadicNumber) -> Result<PadicNumber> {
        self.gamma(x)
    }
}

impl PadicFunction for IntPolynomial {
    fn eval(&self, x: &PadicNumber) -> Result<PadicNumber> {
        Ok(self.eval_padic(x))
    }
}

impl<F> PadicFunction for F
where
    F: Fn(&PadicNumber) -> Result<PadicNumber> + Sync,
{
    fn eval(&self, x: &PadicNumber) -> Result<PadicNumber> {
        self(x)
    }
}

#[derive(Debug, Clone)]
pub struct DerivativeEstimate {
    pub value: PadicNumber,
    pub order: u32,
    pub step_exponent: u32,
    pub certified_digits: i64,
}

/// Exact iterated derivative of an integer polynomial.
pub fn poly_derivative(poly: &IntPolynomial, order: usize) -> IntPolynomial {
    poly.derivative(order)
}

/// Step `p^m`, working precision `K` and guard digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DifferenceScheme {
    pub step_exponent: u32,
    pub precision: i64,
    pub guard: i64,
}

impl DifferenceScheme {
    pub fn new(step_exponent: u32, precision: i64) -> Self {
        DifferenceScheme { step_exponent, precision, guard: DEFAULT_GUARD }
    }

    pub fn with_guard(mut self, guard: i64) -> Self {
        self.guard = guard;
        self
    }

    /// Digits left for an order-`k` derivative before weights and guard.
    pub fn budget(&self, order: u32) -> i64 {
        self.precision - i64::from(order) * i64::from(self.step_exponent)
    }

    fn check(&self, order: u32) -> Result<()> {
        if self.step_exponent == 0 {
            return Err(Error::ConfigRejected("step exponent must be at least 1".into()));
        }
        if self.budget(order) <= 0 {
            return Err(Error::InsufficientPrecision {
                needed: i64::from(order) * i64::from(self.step_exponent) + 1,
                available: self.precision,
            });
        }
        Ok(())
    }

    /// Estimates of `f, f', ..., f^(n)` at `x`, sharing one difference table.
    pub fn jet<F: PadicFunction + ?Sized>(
        &self,
        f: &F,
        x: &PadicNumber,
        n: u32,
    ) -> Result<Vec<DerivativeEstimate>> {
        self.check(n)?;
        let prime = x.prime();
        let diffs = self.forward_differences(f, x, n)?;
        let converged = diffs.converged;
        let max_l = diffs.values.len() - 1;
        let stirling = stirling_first_kind(max_l);
        let mut out = Vec::with_capacity(n as usize + 1);
        for k in 0..=n {
            let ku = k as usize;
            let shift = -i64::from(k) * i64::from(self.step_exponent);
            let mut sum: Option<PadicNumber> = None;
            let mut last_term = None;
            for (l, delta) in diffs.values.iter().enumerate().skip(ku) {
                let weight = gregory_weight(&stirling, l, ku);
                if weight.is_zero() {
                    continue;
                }
                let w = PadicNumber::from_bigrational(&weight, prime, self.precision + 8);
                let term = &w * delta;
                sum = Some(match sum {
                    None => term.clone(),
                    Some(s) => &s + &term,
                });
                last_term = Some(term);
            }
            let value = sum.expect("at least the l = k term").shift(shift);
            let mut certified = value.absolute_precision();
            if !converged {
                if let Some(t) = last_term {
                    let tail = t.valuation().unwrap_or_else(|| t.absolute_precision()) + shift;
                    certified = certified.min(tail);
                }
            }
            let certified = certified.min(self.budget(k)) - self.guard;
            if certified < 1 {
                return Err(Error::InsufficientPrecision {
                    needed: self.budget(k) - certified + 1,
                    available: self.precision,
                });
            }
            out.push(DerivativeEstimate { value, order: k, step_exponent: self.step_exponent, certified_digits: certified });
        }
        Ok(out)
    }

    pub fn derivative<F: PadicFunction + ?Sized>(
        &self,
        f: &F,
        x: &PadicNumber,
        order: u32,
    ) -> Result<DerivativeEstimate> {
        Ok(self.jet(f, x, order)?.pop().expect("jet has order + 1 entries"))
    }

    /// `Δ^l f(x)` for `l = 0..=L`, stopping once two consecutive
    /// differences beyond order `n` vanish at precision.
    fn forward_differences<F: PadicFunction + ?Sized>(
        &self,
        f: &F,
        x: &PadicNumber,
        n: u32,
    ) -> Result<Differences> {
        let prime = x.prime();
        let step = PadicNumber::from_integer(prime.pow(i64::from(self.step_exponent)), prime, self.precision);
        let cap = n as usize + self.precision as usize + 2;
        // last[l] = Δ^l f(x + (i - l) h) after the i-th evaluation
        let mut last: Vec<PadicNumber> = Vec::new();
        let mut at_x = Vec::new();
        let mut point = x.clone();
        let mut zeros_in_a_row = 0;
        for i in 0..=cap {
            let mut next = Vec::with_capacity(i + 1);
            next.push(f.eval(&point)?);
            for l in 1..=i {
                let d = &next[l - 1] - &last[l - 1];
                next.push(d);
            }
            let delta = next[i].clone();
            if i > n as usize && delta.is_zero() {
                zeros_in_a_row += 1;
            } else {
                zeros_in_a_row = 0;
            }
            at_x.push(delta);
            last = next;
            if zeros_in_a_row >= 2 {
                return Ok(Differences { values: at_x, converged: true });
            }
            point = &point + &step;
        }
        Ok(Differences { values: at_x, converged: false })
    }
}

struct Differences {
    values: Vec<PadicNumber>,
    converged: bool,
}

/// Forward-difference estimate of `f^(k)(x)` with step `p^m`.
pub fn finite_difference_derivative<F: PadicFunction + ?Sized>(
    f: &F,
    x: &PadicNumber,
    order: u32,
    step_exponent: u32,
    precision: i64,
    guard: i64,
) -> Result<DerivativeEstimate> {
    DifferenceScheme::new(step_exponent, precision).with_guard(guard).derivative(f, x, order)
}

/// `s(l, k)` for `0 <= k <= l <= max_l`.
fn stirling_first_kind(max_l: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::one()]];
    for l in 0..max_l {
        let prev = &s[l];
        let mut row = vec![BigInt::zero(); l + 2];
        for k in 0..=l + 1 {
            let carry = if k >= 1 { prev[k - 1].clone() } else { BigInt::zero() };
            let keep = prev.get(k).cloned().unwrap_or_default();
            row[k] = carry - BigInt::from(l) * keep;
        }
        s.push(row);
    }
    s
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn gregory_weight(stirling: &[Vec<BigInt>], l: usize, k: usize) -> BigRational {
    BigRational::new(factorial(k) * &stirling[l][k], factorial(l))
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// One row of a Leibniz-chain comparison.
#[derive(Debug, Clone)]
pub struct LeibnizLine {
    pub order: u32,
    pub discrepancy: i64,
    /// Certified digits of the weaker side.
    pub threshold: i64,
}

impl LeibnizLine {
    pub fn passed(&self) -> bool {
        self.discrepancy >= self.threshold
    }
}

#[derive(Debug, Clone)]
pub struct LeibnizReport {
    pub lines: Vec<LeibnizLine>,
}

impl LeibnizReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(LeibnizLine::passed)
    }

    pub fn min_discrepancy(&self) -> i64 {
        self.lines.iter().map(|l| l.discrepancy).min().unwrap_or(i64::MAX)
    }
}

/// Compares `g^(j)(x + p)` with `sum_k C(j, k) f^(j-k)(x) g^(k)(x)` for
/// `j = 0..=n`, where `g(x + p) = f(x) g(x)` is assumed of the pair.
pub fn leibniz_chain_check<G: PadicFunction + ?Sized>(
    g: &G,
    f: &IntPolynomial,
    x: &PadicNumber,
    n: u32,
    scheme: &DifferenceScheme,
) -> Result<LeibnizReport> {
    if n < 1 {
        return Err(Error::ConfigRejected("chain order must be at least 1".into()));
    }
    if !x.in_pzp() {
        return Err(Error::NotInMaximalIdeal(x.valuation().unwrap_or(0)));
    }
    let prime: Prime = x.prime();
    let shifted = x + &PadicNumber::from_integer(prime.get(), prime, scheme.precision);
    let at_x = scheme.jet(g, x, n)?;
    let at_shift = scheme.jet(g, &shifted, n)?;
    let f_derivs: Vec<PadicNumber> = (0..=n as usize).map(|i| f.derivative(i).eval_padic(x)).collect();
    let mut lines = Vec::new();
    for j in 0..=n {
        let mut rhs: Option<PadicNumber> = None;
        let mut weakest = at_shift[j as usize].certified_digits;
        for k in 0..=j {
            let c = PadicNumber::from_integer(binomial(j, k), prime, scheme.precision);
            let term = &(&c * &f_derivs[(j - k) as usize]) * &at_x[k as usize].value;
            rhs = Some(match rhs {
                None => term,
                Some(r) => &r + &term,
            });
            weakest = weakest.min(at_x[k as usize].certified_digits);
        }
        let discrepancy = at_shift[j as usize].value.discrepancy_valuation(&rhs.expect("k = 0 term"))?;
        lines.push(LeibnizLine { order: j, discrepancy, threshold: weakest });
    }
    Ok(LeibnizReport { lines })
}

//! Differential polynomials `P(X, Y0, ..., Yn)` with exact rational
//! coefficient polynomials in `X`.

mod ratpoly;
mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::calculus::poly_derivative;
use crate::error::{Error, Result};
use crate::gamma::f_poly;
use crate::padic::{PadicNumber, Prime};

pub use ratpoly::{RationalFunction, RationalPolynomial};
pub use text::{parse, parse_with_max_order};

/// Exponents of `Y0, ..., Yn`, ordered antilexicographically: `a > b` iff
/// the leftmost nonzero entry of `a - b` is negative. Missing trailing
/// entries count as zero.
#[derive(Debug, Clone)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(exps: Vec<u32>) -> Self {
        ExponentVector(exps)
    }

    pub fn zeros(len: usize) -> Self {
        ExponentVector(vec![0; len])
    }

    /// `Y_index^exp` inside a vector of length `len`.
    pub fn unit(index: usize, exp: u32, len: usize) -> Self {
        let mut v = vec![0; len.max(index + 1)];
        v[index] = exp;
        ExponentVector(v)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// `|a|`
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Index of the last nonzero exponent.
    pub fn highest_index(&self) -> Option<usize> {
        self.0.iter().rposition(|&a| a != 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        ExponentVector((0..n).map(|i| self.get(i) + other.get(i)).collect())
    }

    pub fn resized(&self, len: usize) -> Self {
        debug_assert!(self.0.iter().skip(len).all(|&a| a == 0));
        ExponentVector((0..len).map(|i| self.get(i)).collect())
    }
}

impl PartialEq for ExponentVector {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExponentVector {}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.len().max(other.len());
        (0..n)
            .map(|i| other.get(i).cmp(&self.get(i)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

/// Antilexicographic comparison of two exponent vectors of equal length.
pub fn antilex_compare(a: &[u32], b: &[u32]) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    Ok(ExponentVector::new(a.to_vec()).cmp(&ExponentVector::new(b.to_vec())))
}

/// One entry of the JSON term list.
#[derive(Debug, Clone, Serialize)]
pub struct TermRecord {
    pub alpha: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone)]
pub struct DifferentialPolynomial {
    order: usize,
    // ascending antilex; the leading term is the last entry
    terms: BTreeMap<ExponentVector, RationalPolynomial>,
}

impl PartialEq for DifferentialPolynomial {
    // the ambient order does not change the polynomial
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for DifferentialPolynomial {}

impl DifferentialPolynomial {
    pub fn zero(order: usize) -> Self {
        DifferentialPolynomial { order, terms: BTreeMap::new() }
    }

    /// A polynomial in `X` alone.
    pub fn from_x_polynomial(q: RationalPolynomial, order: usize) -> Self {
        let mut p = Self::zero(order);
        p.add_term(ExponentVector::zeros(order + 1), q);
        p
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        Self::from_x_polynomial(RationalPolynomial::constant(c), order)
    }

    /// The indeterminate `Y_index`.
    pub fn y(index: usize, order: usize) -> Self {
        Self::monomial(RationalPolynomial::one(), ExponentVector::unit(index, 1, order + 1))
    }

    /// `q(X) * Y^alpha`, with order `len(alpha) - 1`.
    pub fn monomial(q: RationalPolynomial, alpha: ExponentVector) -> Self {
        let order = alpha.len().max(1) - 1;
        let mut p = Self::zero(order);
        p.add_term(alpha, q);
        p
    }

    /// Builds from `(alpha, q)` pairs; repeated exponents are summed.
    pub fn from_terms<I>(order: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, RationalPolynomial)>,
    {
        let mut p = Self::zero(order);
        for (alpha, q) in terms {
            if alpha.len() != order + 1 {
                return Err(Error::LengthMismatch { expected: order + 1, found: alpha.len() });
            }
            p.add_term(ExponentVector::new(alpha), q);
        }
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in decreasing antilex order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &RationalPolynomial)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, alpha: &ExponentVector) -> Option<&RationalPolynomial> {
        self.terms.get(alpha)
    }

    /// Same polynomial viewed with a larger ambient order.
    pub fn with_order(&self, order: usize) -> Self {
        let used = self.terms.keys().filter_map(ExponentVector::highest_index).max();
        assert!(used.is_none_or(|u| u <= order), "order {order} too small");
        DifferentialPolynomial {
            order,
            terms: self.terms.iter().map(|(a, q)| (a.resized(order + 1), q.clone())).collect(),
        }
    }

    fn add_term(&mut self, alpha: ExponentVector, q: RationalPolynomial) {
        if self.order + 1 < alpha.len() {
            if let Some(h) = alpha.highest_index() {
                if h > self.order {
                    *self = self.with_order(h);
                }
            }
        }
        let alpha = alpha.resized(self.order + 1);
        let sum = match self.terms.remove(&alpha) {
            Some(old) => old.add(&q),
            None => q,
        };
        if !sum.is_zero() {
            self.terms.insert(alpha, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.with_order(self.order.max(other.order));
        for (a, q) in &other.terms {
            out.add_term(a.clone(), q.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        DifferentialPolynomial {
            order: self.order,
            terms: self.terms.iter().map(|(a, q)| (a.clone(), q.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.order.max(other.order));
        for (a, q) in &self.terms {
            for (b, r) in &other.terms {
                out.add_term(a.add(b), q.mul(r));
            }
        }
        out
    }

    pub fn scale(&self, q: &RationalPolynomial) -> Self {
        let mut out = Self::zero(self.order);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.mul(q));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let one = Self::constant(BigRational::from_integer(1.into()), self.order);
        (0..e).fold(one, |acc, _| acc.mul(self))
    }

    /// Term with the antilex-maximal exponent vector.
    pub fn leading_term(&self) -> Result<(&ExponentVector, &RationalPolynomial)> {
        self.terms.last_key_value().ok_or(Error::ZeroPolynomial)
    }

    /// Applies `X -> X + shift` to every coefficient and `Yk -> images[k]`.
    pub fn substitute(&self, shift: &BigRational, images: &[DifferentialPolynomial]) -> Result<Self> {
        if images.len() != self.order + 1 {
            return Err(Error::LengthMismatch { expected: self.order + 1, found: images.len() });
        }
        let order = images.iter().map(|p| p.order).max().unwrap_or(self.order);
        let mut powers: Vec<Vec<DifferentialPolynomial>> = images
            .iter()
            .map(|img| vec![Self::constant(BigRational::from_integer(1.into()), order), img.clone()])
            .collect();
        let mut out = Self::zero(order);
        for (alpha, q) in &self.terms {
            let mut img = Self::from_x_polynomial(q.shift(shift), order);
            for (k, &e) in alpha.as_slice().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let table = &mut powers[k];
                while table.len() <= e as usize {
                    let next = table.last().expect("nonempty").mul(&table[1]);
                    table.push(next);
                }
                img = img.mul(&table[e as usize]);
            }
            for (a, c) in img.terms {
                out.add_term(a, c);
            }
        }
        Ok(out)
    }

    /// Coefficients evaluated at `X = x0`; with `set_y0_zero` every term
    /// containing `Y0` is dropped.
    pub fn partial_evaluate(&self, x0: &BigRational, set_y0_zero: bool) -> Self {
        let mut out = Self::zero(self.order);
        for (alpha, q) in &self.terms {
            if set_y0_zero && alpha.get(0) > 0 {
                continue;
            }
            out.add_term(alpha.clone(), RationalPolynomial::constant(q.eval(x0)));
        }
        out
    }

    /// `P(x, y0, ..., yn)` in `Q_p`.
    pub fn evaluate(&self, x: &PadicNumber, y: &[PadicNumber]) -> Result<PadicNumber> {
        if y.len() != self.order + 1 {
            return Err(Error::LengthMismatch { expected: self.order + 1, found: y.len() });
        }
        let prime = x.prime();
        if let Some(bad) = y.iter().find(|v| v.prime() != prime) {
            return Err(Error::PrimeMismatch(prime.get(), bad.prime().get()));
        }
        let coeff_precision = std::iter::once(x)
            .chain(y)
            .map(|v| v.absolute_precision().max(v.relative_precision()))
            .max()
            .unwrap_or(1)
            .max(1)
            + 2;
        let mut acc: Option<PadicNumber> = None;
        for (alpha, q) in &self.terms {
            let mut t = q.eval_padic(x, coeff_precision);
            for (k, &e) in alpha.as_slice().iter().enumerate() {
                if e > 0 {
                    t = &t * &y[k].pow(e);
                }
            }
            acc = Some(match acc {
                None => t,
                Some(a) => &a + &t,
            });
        }
        Ok(acc.unwrap_or_else(|| PadicNumber::zero(prime, coeff_precision)))
    }

    /// JSON term list in decreasing antilex order.
    pub fn term_records(&self) -> Vec<TermRecord> {
        self.terms()
            .map(|(a, q)| TermRecord { alpha: a.as_slice().to_vec(), coeff: q.to_string() })
            .collect()
    }
}

impl fmt::Display for DifferentialPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::format_into(self, f)
    }
}

impl std::str::FromStr for DifferentialPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `Yk -> sum_j C(k, j) f^(k-j)(X) Yj` for `k = 0..=order`.
fn leibniz_images(prime: Prime, order: usize) -> Vec<DifferentialPolynomial> {
    let f = f_poly(prime);
    let derivs: Vec<RationalPolynomial> =
        (0..=order).map(|i| RationalPolynomial::from(&poly_derivative(&f, i))).collect();
    (0..=order)
        .map(|k| {
            let mut binom = 1i64;
            let mut img = DifferentialPolynomial::zero(order);
            for j in 0..=k {
                let c = derivs[k - j].scale(&rational(binom));
                img = img.add(&DifferentialPolynomial::y(j, order).scale(&c));
                binom = binom * (k - j) as i64 / (j + 1) as i64;
            }
            img
        })
        .collect()
}

/// `Q(X, Y) = P(X + p, f Y0, f' Y0 + f Y1, ...)` with `f = f_poly(p)`.
pub fn shift_transform(p: &DifferentialPolynomial, prime: Prime) -> DifferentialPolynomial {
    let images = leibniz_images(prime, p.order());
    p.substitute(&rational(prime.get() as i64), &images)
        .expect("one image per indeterminate")
}

fn y_bearing_leading_term(p: &DifferentialPolynomial) -> Result<(&ExponentVector, &RationalPolynomial)> {
    let (alpha, q) = p.leading_term()?;
    if alpha.is_constant() {
        return Err(Error::PureXLeadingTerm);
    }
    Ok((alpha, q))
}

/// Whether `LT(Q) = q(X+p) f(X)^|a| Y^a` for `(a, q) = LT(P)`.
pub fn lt_identity_check(p: &DifferentialPolynomial, prime: Prime) -> Result<bool> {
    let (alpha, q) = y_bearing_leading_term(p)?;
    let f = RationalPolynomial::from(&f_poly(prime));
    let expected = q.shift(&rational(prime.get() as i64)).mul(&f.pow(alpha.total_degree()));
    let transformed = shift_transform(p, prime);
    let (beta, r) = transformed.leading_term()?;
    Ok(beta == alpha && *r == expected)
}

/// `R(X) = q(X+p) / q(X) * f(X)^|a|`.
pub fn compute_r(p: &DifferentialPolynomial, prime: Prime) -> Result<RationalFunction> {
    let (alpha, q) = y_bearing_leading_term(p)?;
    let f = RationalPolynomial::from(&f_poly(prime));
    let num = q.shift(&rational(prime.get() as i64)).mul(&f.pow(alpha.total_degree()));
    Ok(RationalFunction::new(num, q.clone()).expect("leading coefficient is nonzero"))
}

/// Rational `R` with `Q = R * P`, read off the leading terms and verified on
/// every term.
pub fn exact_divide(q: &DifferentialPolynomial, p: &DifferentialPolynomial) -> Result<RationalFunction> {
    let (pa, pc) = p.leading_term()?;
    if q.is_zero() {
        return Ok(RationalFunction::polynomial(RationalPolynomial::zero()));
    }
    let (qa, qc) = q.leading_term()?;
    if qa != pa {
        return Err(Error::NotDivisible("leading exponents differ".into()));
    }
    let r = RationalFunction::new(qc.clone(), pc.clone()).expect("nonzero");
    if q.term_count() != p.term_count() {
        return Err(Error::NotDivisible("term supports differ".into()));
    }
    for (alpha, pq) in p.terms() {
        let Some(qq) = q.coefficient(alpha) else {
            return Err(Error::NotDivisible("term supports differ".into()));
        };
        // qq == num/den * pq
        if qq.mul(r.denominator()) != pq.mul(r.numerator()) {
            return Err(Error::NotDivisible(format!("coefficient of {:?} is not R times", alpha.as_slice())));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn rp(c: &[i64]) -> RationalPolynomial {
        RationalPolynomial::from_i64(c)
    }

    fn dp(s: &str) -> DifferentialPolynomial {
        parse(s).unwrap()
    }

    #[test]
    fn antilex_examples() {
        assert_eq!(antilex_compare(&[1, 0], &[0, 1]).unwrap(), Ordering::Less);
        assert_eq!(antilex_compare(&[5, 0], &[0, 1]).unwrap(), Ordering::Less);
        assert_eq!(antilex_compare(&[2, 1], &[7, 0]).unwrap(), Ordering::Greater);
        assert_eq!(antilex_compare(&[3, 4], &[3, 4]).unwrap(), Ordering::Equal);
        assert!(matches!(antilex_compare(&[1], &[1, 0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn leading_term_examples() {
        let p = dp("X*Y0^2*Y1 + Y0^7");
        let (a, q) = p.leading_term().unwrap();
        assert_eq!(a.as_slice(), &[2, 1]);
        assert_eq!(q, &rp(&[0, 1]));
        let p = dp("Y2 + Y1^9 + Y0^9");
        assert_eq!(p.leading_term().unwrap().0.as_slice(), &[0, 0, 1]);
        assert_eq!(DifferentialPolynomial::zero(2).leading_term(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn shift_transform_examples() {
        let q = shift_transform(&dp("Y0"), prime(3));
        assert_eq!(q.to_string(), "(-X^2-3*X-2)*Y0");
        let q = shift_transform(&dp("X"), prime(5));
        assert_eq!(q, dp("X + 5"));
        let q = shift_transform(&dp("Y1"), prime(2));
        assert_eq!(q, dp("Y0 + (X+1)*Y1"));
    }

    #[test]
    fn binomials_appear_in_the_second_derivative() {
        // Y2 -> f'' Y0 + 2 f' Y1 + f Y2, p = 3, f = -X^2-3X-2
        let q = shift_transform(&dp("Y2"), prime(3));
        assert_eq!(q, dp("-2*Y0 + (-4*X-6)*Y1 + (-X^2-3*X-2)*Y2"));
    }

    #[test]
    fn compute_r_examples() {
        let r = compute_r(&dp("Y0*Y1"), prime(2)).unwrap();
        assert_eq!(r, RationalFunction::polynomial(rp(&[1, 2, 1])));
        let r = compute_r(&dp("X*Y0"), prime(3)).unwrap();
        let f = RationalPolynomial::from(&f_poly(prime(3)));
        let expected = RationalFunction::new(rp(&[3, 1]).mul(&f), rp(&[0, 1])).unwrap();
        assert_eq!(r, expected);
        assert_eq!(compute_r(&dp("X^2 + 1"), prime(3)), Err(Error::PureXLeadingTerm));
    }

    #[test]
    fn r_has_positive_degree_for_constant_q() {
        for p in [2, 3, 5, 7] {
            for s in ["Y0", "3*Y1^2", "Y0*Y2"] {
                let r = compute_r(&dp(s), prime(p)).unwrap();
                assert!(r.is_polynomial());
                assert!(r.degree().unwrap() >= 1);
            }
        }
    }

    #[test]
    fn exact_divide_examples() {
        let p = dp("(X^2+1)*Y0^3");
        let c = dp("7");
        for pr in [2, 3, 5] {
            let q = shift_transform(&c.mul(&p), prime(pr));
            let r = exact_divide(&q, &p).unwrap();
            let expected = compute_r(&p, prime(pr)).unwrap();
            let seven = RationalFunction::polynomial(rp(&[7]));
            assert_eq!(r, expected.mul(&seven));
        }
        let p = dp("X*Y1 + Y0^3 - 2");
        assert_eq!(exact_divide(&p, &p).unwrap(), RationalFunction::polynomial(rp(&[1])));
        assert!(matches!(exact_divide(&dp("X*Y1 + Y0"), &dp("X*Y1 + Y0^2")), Err(Error::NotDivisible(_))));
        assert!(matches!(exact_divide(&dp("X*Y1 + 2*Y0"), &dp("X*Y1 + Y0")), Err(Error::NotDivisible(_))));
    }

    #[test]
    fn exact_divide_on_a_multi_term_instance() {
        // Q = R*P with R = (X+1)^2/X and P sharing the X denominator
        let p = dp("X*Y1 + X^2*Y0");
        let q = dp("(X^2+2*X+1)*Y1 + (X^3+2*X^2+X)*Y0");
        let r = exact_divide(&q, &p).unwrap();
        assert_eq!(r, RationalFunction::new(rp(&[1, 2, 1]), rp(&[0, 1])).unwrap());
    }

    #[test]
    fn partial_evaluate_examples() {
        let two = rational(2);
        assert_eq!(dp("X*Y0 + Y1").partial_evaluate(&two, true), dp("Y1"));
        assert!(dp("Y0^3").partial_evaluate(&two, true).is_zero());
        assert_eq!(dp("X*Y0 + Y1").partial_evaluate(&two, false), dp("2*Y0 + Y1"));
    }

    #[test]
    fn root_chain_step() {
        // P(x0+p, 0, Z) = 0 for a root x0 of f; then Q at X = x0 vanishes
        // identically and the same P survives at x0 + 2p only when it vanishes there.
        for pr in [3u64, 5, 7] {
            let p = pr as i64;
            let f = RationalPolynomial::from(&f_poly(prime(pr)));
            for x0 in (1 - p)..0 {
                assert!(f.eval(&rational(x0)).is_zero());
                let s = format!("(X-{})*Y1^2 + Y0*Y2 + (X+1)*Y0^2", x0 + p);
                let big = dp(&s);
                assert!(big.partial_evaluate(&rational(x0 + p), true).is_zero());
                let q = shift_transform(&big, prime(pr));
                assert!(q.partial_evaluate(&rational(x0), false).is_zero());
                // at a non-root the substitution does not collapse
                assert!(!q.partial_evaluate(&rational(x0 + p), false).is_zero());
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let p5 = prime(5);
        let x = PadicNumber::from_integer(15, p5, 20);
        let one = PadicNumber::from_integer(1, p5, 20);
        let v = dp("Y1 - 1").evaluate(&x, &[x.clone(), one.clone()]).unwrap();
        assert!(v.is_zero());
        let g = crate::GammaEvaluator::new(p5, 20).unwrap().gamma(&x).unwrap();
        assert!(dp("Y0").with_order(0).evaluate(&x, &[g]).unwrap().is_unit());
        let other = PadicNumber::from_integer(1, prime(7), 20);
        assert!(matches!(dp("Y1").evaluate(&x, &[one.clone(), other]), Err(Error::PrimeMismatch(5, 7))));
        assert!(matches!(dp("Y1").evaluate(&x, &[one]), Err(Error::LengthMismatch { .. })));
    }

    fn random_poly(rng: &mut ChaCha8Rng, order: usize, terms: usize, y_bearing: bool) -> DifferentialPolynomial {
        let mut p = DifferentialPolynomial::zero(order);
        while p.term_count() < terms {
            let alpha: Vec<u32> = (0..=order).map(|_| rng.gen_range(0..=3)).collect();
            if y_bearing && alpha.iter().all(|&a| a == 0) {
                continue;
            }
            let deg = rng.gen_range(0..=3);
            let coeffs: Vec<BigRational> = (0..=deg)
                .map(|_| BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into()))
                .collect();
            let q = RationalPolynomial::new(coeffs);
            if q.is_zero() {
                continue;
            }
            p = p.add(&DifferentialPolynomial::monomial(q, ExponentVector::new(alpha)));
        }
        p
    }

    #[test]
    fn lt_identity_on_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pr in [2, 3, 5] {
            for _ in 0..40 {
                let (order, terms) = (rng.gen_range(0..=3), rng.gen_range(1..=3));
                let p = random_poly(&mut rng, order, terms, true);
                assert!(lt_identity_check(&p, prime(pr)).unwrap(), "{p}");
            }
        }
        assert_eq!(lt_identity_check(&dp("X + Y0"), prime(3)), Err(Error::PureXLeadingTerm));
    }

    #[test]
    fn single_terms_divide_their_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for pr in [2, 3, 5, 7] {
            for _ in 0..10 {
                let order = rng.gen_range(0..=2);
                let p = random_poly(&mut rng, order, 1, true);
                let q = shift_transform(&p, prime(pr));
                // single terms expand into several Leibniz terms unless only Y0 appears
                let only_y0 = p.leading_term().unwrap().0.highest_index() == Some(0);
                if only_y0 {
                    assert_eq!(exact_divide(&q, &p).unwrap(), compute_r(&p, prime(pr)).unwrap());
                } else {
                    assert!(exact_divide(&q, &p).is_err());
                }
            }
        }
    }

    #[test]
    fn homomorphism_on_random_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for pr in [2, 3, 5] {
            for _ in 0..15 {
                let (order, ta, tb) = (rng.gen_range(0..=2), rng.gen_range(1..=3), rng.gen_range(1..=3));
                let a = random_poly(&mut rng, order, ta, false);
                let b = random_poly(&mut rng, order, tb, false);
                let lhs = shift_transform(&a.mul(&b), prime(pr));
                let rhs = shift_transform(&a, prime(pr)).mul(&shift_transform(&b, prime(pr)));
                assert_eq!(lhs, rhs);
                let sum = shift_transform(&a.add(&b), prime(pr));
                assert_eq!(sum, shift_transform(&a, prime(pr)).add(&shift_transform(&b, prime(pr))));
            }
        }
    }

    #[test]
    fn evaluate_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p5 = prime(5);
        for _ in 0..30 {
            let a = random_poly(&mut rng, 1, 2, false);
            let r = DifferentialPolynomial::from_x_polynomial(rp(&[rng.gen_range(-5..5), 1, 2]), 1);
            let x = PadicNumber::from_integer(rng.gen_range(1..10_000i64), p5, 20);
            let y: Vec<_> =
                (0..2).map(|_| PadicNumber::from_integer(rng.gen_range(1..10_000i64), p5, 20)).collect();
            let lhs = r.mul(&a).evaluate(&x, &y).unwrap();
            let rhs = &r.evaluate(&x, &y).unwrap() * &a.evaluate(&x, &y).unwrap();
            assert!(lhs.agrees_with(&rhs));
        }
    }

    #[test]
    fn term_records_json() {
        let p = dp("(X^2+1)*Y0^2*Y1 + 3*Y0^3");
        let json = serde_json::to_string(&p.term_records()).unwrap();
        assert_eq!(json, r#"[{"alpha":[2,1],"coeff":"X^2+1"},{"alpha":[3,0],"coeff":"3"}]"#);
    }

    fn exps() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0u32..6, 4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn antilex_is_a_total_order(a in exps(), b in exps(), c in exps()) {
            let ab = antilex_compare(&a, &b).unwrap();
            prop_assert_eq!(ab.reverse(), antilex_compare(&b, &a).unwrap());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
            if ab != Ordering::Greater && antilex_compare(&b, &c).unwrap() != Ordering::Greater {
                prop_assert_ne!(antilex_compare(&a, &c).unwrap(), Ordering::Greater);
            }
            let (va, vb, vc) = (ExponentVector::new(a), ExponentVector::new(b), ExponentVector::new(c));
            prop_assert_eq!(va.add(&vc).cmp(&vb.add(&vc)), ab);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn leading_terms_multiply(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_poly(&mut rng, 2, 3, false);
            let b = random_poly(&mut rng, 2, 3, false);
            let (la, qa) = a.leading_term().unwrap();
            let (lb, qb) = b.leading_term().unwrap();
            let prod = a.mul(&b);
            let (lp, qp) = prod.leading_term().unwrap();
            prop_assert_eq!(lp, &la.add(lb));
            prop_assert_eq!(qp, &qa.mul(qb));
        }

        #[test]
        fn parse_format_round_trip(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (order, terms) = (rng.gen_range(0..=3), rng.gen_range(1..=4));
            let p = random_poly(&mut rng, order, terms, false);
            let text = p.to_string();
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &p, "{}", text);
            prop_assert_eq!(back.to_string(), text);
        }
    }

    #[test]
    fn parse_format_round_trip_500() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..500 {
            let (order, terms) = (rng.gen_range(0..=3), rng.gen_range(0..=4));
            let p = random_poly(&mut rng, order, terms, false);
            let text = p.to_string();
            assert_eq!(parse(&text).unwrap(), p, "{text}");
        }
    }
}

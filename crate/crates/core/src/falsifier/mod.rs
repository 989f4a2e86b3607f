//! Bounded search for differential polynomials annihilating a function on
//! `pZ_p`, at finite precision.

mod linalg;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{DifferenceScheme, PadicFunction, DEFAULT_GUARD};
use crate::diffpoly::{DifferentialPolynomial, ExponentVector, RationalPolynomial, TermRecord};
use crate::error::{Error, Result};
use crate::gamma::GammaEvaluator;
use crate::padic::{PadicNumber, Prime};

pub use linalg::{padic_row_reduce, RowReduction};

pub const DEFAULT_MIN_CERTIFIED: i64 = 10;

/// Order `n`, total `Y`-degree `d`, `X`-degree `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    #[serde(rename = "n")]
    pub order: usize,
    #[serde(rename = "d")]
    pub y_degree: u32,
    #[serde(rename = "e")]
    pub x_degree: u32,
}

impl SearchBounds {
    pub fn new(order: usize, y_degree: u32, x_degree: u32) -> Result<Self> {
        if y_degree == 0 {
            return Err(Error::ConfigRejected("Y-degree bound must be at least 1".into()));
        }
        Ok(SearchBounds { order, y_degree, x_degree })
    }

    /// `(e + 1) * C(n + 1 + d, d)`.
    pub fn column_count(&self) -> usize {
        let vars = self.order as u64 + 1;
        let d = u64::from(self.y_degree);
        let mut c = 1u64;
        for i in 1..=d {
            c = c * (vars + i) / i;
        }
        (u64::from(self.x_degree) + 1) as usize * c as usize
    }
}

/// The unknown multiplying `X^j * Y^alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub x_power: u32,
    pub alpha: ExponentVector,
}

fn exponent_vectors(len: usize, max_total: u32) -> Vec<Vec<u32>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=max_total {
        for mut rest in exponent_vectors(len - 1, max_total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Columns in decreasing antilex order of `alpha`, then increasing `j`.
pub fn enumerate_monomials(bounds: &SearchBounds) -> Vec<Column> {
    let mut alphas: Vec<ExponentVector> = exponent_vectors(bounds.order + 1, bounds.y_degree)
        .into_iter()
        .map(ExponentVector::new)
        .collect();
    alphas.sort_by(|a, b| b.cmp(a));
    alphas
        .into_iter()
        .flat_map(|alpha| (0..=bounds.x_degree).map(move |j| Column { x_power: j, alpha: alpha.clone() }))
        .collect()
}

/// Function whose annihilators are searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Gamma,
    /// `g(x) = x`
    Identity,
    /// `g(x) = 1 / (x - 1)`
    Reciprocal,
}

impl Subject {
    pub fn name(self) -> &'static str {
        match self {
            Subject::Gamma => "gamma",
            Subject::Identity => "identity",
            Subject::Reciprocal => "reciprocal",
        }
    }

    pub fn is_control(self) -> bool {
        self != Subject::Gamma
    }

    fn evaluator(self, prime: Prime, precision: i64) -> Result<Box<dyn PadicFunction>> {
        Ok(match self {
            Subject::Gamma => Box::new(GammaEvaluator::new(prime, precision)?),
            Subject::Identity => Box::new(|x: &PadicNumber| Ok(x.clone())),
            Subject::Reciprocal => Box::new(move |x: &PadicNumber| {
                x.checked_sub(&PadicNumber::one(prime, precision))?.invert()
            }),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    #[serde(rename = "K")]
    pub precision: i64,
    #[serde(rename = "m")]
    pub step_exponent: u32,
    pub samples: usize,
    pub seed: u64,
    pub guard: i64,
    pub min_certified: i64,
}

impl SearchConfig {
    pub fn new(precision: i64, step_exponent: u32, samples: usize, seed: u64) -> Self {
        SearchConfig {
            precision,
            step_exponent,
            samples,
            seed,
            guard: DEFAULT_GUARD,
            min_certified: DEFAULT_MIN_CERTIFIED,
        }
    }

    pub fn validate(&self, bounds: &SearchBounds) -> Result<()> {
        if self.precision < 2 {
            return Err(Error::ConfigRejected(format!("precision {} is below 2", self.precision)));
        }
        if self.step_exponent == 0 {
            return Err(Error::ConfigRejected("step exponent must be at least 1".into()));
        }
        let budget = self.precision - bounds.order as i64 * i64::from(self.step_exponent) - self.guard;
        if budget < self.min_certified {
            return Err(Error::ConfigRejected(format!(
                "K - n*m - guard = {budget} is below the required {} certified digits",
                self.min_certified
            )));
        }
        let columns = bounds.column_count();
        if self.samples < columns {
            return Err(Error::ConfigRejected(format!(
                "{} samples cannot determine {columns} unknowns",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Sample points `p*u`, `u` a unit, pairwise distinct at precision `K`.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub prime: Prime,
    pub precision: i64,
    pub step_exponent: u32,
    pub seed: u64,
    pub points: Vec<PadicNumber>,
}

impl SampleSet {
    /// The first `count` points of the stream for `seed`.
    pub fn generate(prime: Prime, precision: i64, step_exponent: u32, seed: u64, count: usize) -> Self {
        let points = sample_stream(prime, precision, seed, count);
        SampleSet { prime, precision, step_exponent, seed, points }
    }
}

fn sample_stream(prime: Prime, precision: i64, seed: u64, count: usize) -> Vec<PadicNumber> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = prime.get();
    let digits = (precision - 1).max(1) as usize;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut u: Vec<u64> = Vec::with_capacity(digits);
        u.push(rng.gen_range(1..p));
        u.extend((1..digits).map(|_| rng.gen_range(0..p)));
        if seen.insert(u.clone()) {
            out.push(PadicNumber::from_digits(prime, 1, &u, digits as i64));
        }
    }
    out
}

/// One row per sample: `x^j * prod_k g^(k)(x)^alpha_k` for every column.
/// Jet entries are truncated to their certified digits.
pub fn build_matrix<F: PadicFunction + ?Sized>(
    g: &F,
    bounds: &SearchBounds,
    columns: &[Column],
    points: &[PadicNumber],
    scheme: &DifferenceScheme,
) -> Result<Vec<Vec<PadicNumber>>> {
    points
        .par_iter()
        .map(|x| {
            let jet = scheme.jet(g, x, bounds.order as u32)?;
            let jet: Vec<PadicNumber> = jet.into_iter().map(|d| d.value.truncate(d.certified_digits)).collect();
            let one = PadicNumber::one(x.prime(), scheme.precision);
            Ok(columns
                .iter()
                .map(|c| {
                    let mut v = &one * &x.pow(c.x_power);
                    for (k, &a) in c.alpha.as_slice().iter().enumerate() {
                        if a > 0 {
                            v = &v * &jet[k].pow(a);
                        }
                    }
                    v
                })
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    NoneAtPrecision,
    Found,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnihilatorRecord {
    pub terms: Vec<TermRecord>,
    pub text: String,
    /// Whether every coefficient was recovered as a small rational.
    pub reconstructed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnihilatorReport {
    pub p: u64,
    pub function: String,
    pub bounds: SearchBounds,
    pub config: SearchConfig,
    pub status: Status,
    pub rank: usize,
    pub columns: usize,
    pub certified_digits: i64,
    pub annihilator: Option<AnnihilatorRecord>,
    pub residual_valuations: Vec<i64>,
    #[serde(skip)]
    pub coefficients: Vec<PadicNumber>,
    #[serde(skip)]
    pub polynomial: Option<DifferentialPolynomial>,
}

impl AnnihilatorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Scales so the entry of least valuation (the last one on ties) becomes 1.
fn normalize(v: &[PadicNumber]) -> Result<Vec<PadicNumber>> {
    let mut best: Option<(i64, usize)> = None;
    for (i, x) in v.iter().enumerate() {
        if let Some(val) = x.valuation() {
            if best.is_none_or(|(b, _)| val <= b) {
                best = Some((val, i));
            }
        }
    }
    let (_, i) = best.ok_or(Error::NotInvertible)?;
    let pivot = v[i].clone();
    v.iter().map(|x| x.checked_div(&pivot)).collect()
}

/// `a/b` with `a = b*r mod m` and `|a|, b <= sqrt(m/2)`.
fn rational_reconstruct(r: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::from(1));
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, s1))
}

/// Small rational agreeing with `x` to `digits` absolute digits, or the
/// exact lift of its truncation.
fn reconstruct(x: &PadicNumber, digits: i64) -> (BigRational, bool) {
    if x.is_zero() || x.valuation().is_some_and(|v| v >= digits) {
        return (BigRational::zero(), true);
    }
    let digits = digits.min(x.absolute_precision());
    let m = BigInt::from(x.prime().pow(digits));
    match x.residue(digits) {
        Ok(r) => match rational_reconstruct(&BigInt::from(r), &m) {
            Some(q) => (q, true),
            None => (x.truncate(digits).lift(), false),
        },
        Err(_) => (x.truncate(digits).lift(), false),
    }
}

fn polynomial_from(columns: &[Column], coeffs: &[BigRational], order: usize) -> DifferentialPolynomial {
    let mut p = DifferentialPolynomial::zero(order);
    for (c, q) in columns.iter().zip(coeffs) {
        if q.is_zero() {
            continue;
        }
        let term = DifferentialPolynomial::monomial(
            RationalPolynomial::monomial(q.clone(), c.x_power as usize),
            c.alpha.clone(),
        );
        p = p.add(&term);
    }
    p.with_order(order)
}

/// Searches the `(n, d, e)` slice for an annihilator of `subject` on `pZ_p`.
///
/// With full column rank the report certifies the rank decision. Otherwise
/// the first nullspace vector is normalized and must vanish, to the digits
/// its coefficients are known to, on `2 * columns` further points from the
/// same stream; if not, `UnconfirmedCandidate`.
pub fn search_annihilator(
    prime: Prime,
    subject: Subject,
    bounds: SearchBounds,
    config: SearchConfig,
) -> Result<AnnihilatorReport> {
    config.validate(&bounds)?;
    let g = subject.evaluator(prime, config.precision)?;
    let scheme = DifferenceScheme::new(config.step_exponent, config.precision).with_guard(config.guard);
    let columns = enumerate_monomials(&bounds);
    let held_out = 2 * columns.len();
    let points = sample_stream(prime, config.precision, config.seed, config.samples + held_out);
    let (train, test) = points.split_at(config.samples);

    let matrix = build_matrix(g.as_ref(), &bounds, &columns, train, &scheme)?;
    let reduction = padic_row_reduce(&matrix, config.min_certified)?;

    let mut report = AnnihilatorReport {
        p: prime.get(),
        function: subject.name().to_string(),
        bounds,
        config,
        status: Status::NoneAtPrecision,
        rank: reduction.rank,
        columns: columns.len(),
        certified_digits: reduction.certified_digits,
        annihilator: None,
        residual_valuations: Vec::new(),
        coefficients: Vec::new(),
        polynomial: None,
    };
    let Some(candidate) = reduction.nullspace.first() else {
        return Ok(report);
    };

    let coeffs = normalize(candidate)?;
    // back substitution divides by every pivot, so the vector is usually
    // known to fewer digits than the rank decision
    let threshold = coeffs.iter().map(PadicNumber::absolute_precision).min().unwrap_or(0);
    if threshold < config.min_certified {
        return Err(Error::PrecisionExhausted(format!(
            "annihilator coefficients are known to only {threshold} digits"
        )));
    }
    report.certified_digits = threshold;
    let check = build_matrix(g.as_ref(), &bounds, &columns, test, &scheme)?;
    let residuals: Vec<i64> = check
        .iter()
        .map(|row| {
            let r = row
                .iter()
                .zip(&coeffs)
                .fold(PadicNumber::zero(prime, i64::MAX / 4), |acc, (a, c)| &acc + &(a * c));
            r.valuation().unwrap_or_else(|| r.absolute_precision())
        })
        .collect();
    if let Some(bad) = residuals.iter().find(|&&v| v < threshold) {
        return Err(Error::UnconfirmedCandidate(format!(
            "held-out residual has valuation {bad}, below the {threshold} certified digits"
        )));
    }

    let mut exact = true;
    let rationals: Vec<BigRational> = coeffs
        .iter()
        .map(|c| {
            let (q, ok) = reconstruct(c, threshold);
            exact &= ok;
            q
        })
        .collect();
    let poly = polynomial_from(&columns, &rationals, bounds.order);
    report.status = Status::Found;
    report.annihilator = Some(AnnihilatorRecord { terms: poly.term_records(), text: poly.to_string(), reconstructed: exact });
    report.residual_valuations = residuals;
    report.coefficients = coeffs;
    report.polynomial = Some(poly);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::parse;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn monomial_enumeration_examples() {
        let cols = enumerate_monomials(&SearchBounds::new(0, 1, 0).unwrap());
        let listed: Vec<(u32, Vec<u32>)> = cols.iter().map(|c| (c.x_power, c.alpha.as_slice().to_vec())).collect();
        assert_eq!(listed, vec![(0, vec![0]), (0, vec![1])]);
        assert_eq!(enumerate_monomials(&SearchBounds::new(1, 1, 1).unwrap()).len(), 6);
        let cols = enumerate_monomials(&SearchBounds::new(1, 2, 1).unwrap());
        let alphas: Vec<&[u32]> = cols.iter().step_by(2).map(|c| c.alpha.as_slice()).collect();
        assert_eq!(alphas, vec![&[0, 0][..], &[0, 1], &[0, 2], &[1, 0], &[1, 1], &[2, 0]]);
        assert_eq!(cols[0].x_power, 0);
        assert_eq!(cols[1].x_power, 1);
    }

    #[test]
    fn column_count_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let b = SearchBounds::new(rng.gen_range(0..4), rng.gen_range(1..5), rng.gen_range(0..4)).unwrap();
            // brute force: every vector in [0, d]^(n+1) with small total
            let mut count = 0;
            let d = b.y_degree as usize;
            let total = (d + 1).pow(b.order as u32 + 1);
            for code in 0..total {
                let mut c = code;
                let mut s = 0;
                for _ in 0..=b.order {
                    s += c % (d + 1);
                    c /= d + 1;
                }
                if s <= d {
                    count += 1;
                }
            }
            assert_eq!(b.column_count(), count * (b.x_degree as usize + 1));
            assert_eq!(enumerate_monomials(&b).len(), b.column_count());
        }
        assert!(SearchBounds::new(1, 0, 0).is_err());
    }

    #[test]
    fn samples_lie_in_pzp_and_are_distinct() {
        let s = SampleSet::generate(prime(2), 12, 4, 5, 200);
        assert_eq!(s.points.len(), 200);
        let mut seen = HashSet::new();
        for x in &s.points {
            assert_eq!(x.valuation(), Some(1));
            assert_eq!(x.absolute_precision(), 12);
            assert!(seen.insert(x.residue(12).unwrap()));
        }
        let again = SampleSet::generate(prime(2), 12, 4, 5, 250);
        assert!(s.points.iter().zip(&again.points).all(|(a, b)| a.agrees_with(b)));
    }

    #[test]
    fn rational_reconstruction() {
        let m = BigInt::from(5u32).pow(20);
        for (a, b) in [(1i64, 3i64), (-7, 2), (0, 1), (12345, 678)] {
            let q = BigRational::new(a.into(), b.into());
            let x = PadicNumber::from_bigrational(&q, prime(5), 20);
            let r = BigInt::from(x.residue(20).unwrap());
            assert_eq!(rational_reconstruct(&r, &m), Some(q));
        }
    }

    #[test]
    fn identity_control() {
        let bounds = SearchBounds::new(1, 1, 0).unwrap();
        let config = SearchConfig::new(40, 3, 2 * bounds.column_count(), 1);
        let report = search_annihilator(prime(5), Subject::Identity, bounds, config).unwrap();
        assert_eq!(report.status, Status::Found);
        assert_eq!(report.polynomial.unwrap(), parse("Y1 - 1").unwrap());
        assert!(report.residual_valuations.iter().all(|&v| v >= report.certified_digits));
    }

    #[test]
    fn reciprocal_control() {
        for p in [2, 3, 5] {
            let bounds = SearchBounds::new(1, 2, 0).unwrap();
            let config = SearchConfig::new(60, 4, 2 * bounds.column_count(), 2);
            let report = search_annihilator(prime(p), Subject::Reciprocal, bounds, config).unwrap();
            assert_eq!(report.status, Status::Found);
            assert_eq!(report.polynomial.unwrap(), parse("Y1 + Y0^2").unwrap());
        }
    }

    #[test]
    fn clearing_denominators() {
        // g = 1/(x-1) satisfies (X-1)*Y0 - 1 = 0 with no derivative at all
        let bounds = SearchBounds::new(0, 1, 1).unwrap();
        let config = SearchConfig::new(30, 3, 2 * bounds.column_count(), 3);
        let report = search_annihilator(prime(3), Subject::Reciprocal, bounds, config).unwrap();
        assert_eq!(report.polynomial.unwrap(), parse("(X-1)*Y0 - 1").unwrap());
        let no_x = SearchBounds::new(0, 1, 0).unwrap();
        let config = SearchConfig::new(30, 3, 2 * no_x.column_count(), 3);
        let report = search_annihilator(prime(3), Subject::Reciprocal, no_x, config).unwrap();
        assert_eq!(report.status, Status::NoneAtPrecision);
    }

    #[test]
    fn found_survives_larger_bounds() {
        let small = SearchBounds::new(1, 1, 0).unwrap();
        for big in [SearchBounds::new(1, 2, 0).unwrap(), SearchBounds::new(1, 1, 1).unwrap(), SearchBounds::new(2, 1, 0).unwrap()] {
            assert!(big.column_count() >= small.column_count());
            let config = SearchConfig::new(40, 3, 2 * big.column_count(), 4);
            let report = search_annihilator(prime(3), Subject::Identity, big, config).unwrap();
            assert_eq!(report.status, Status::Found);
            assert!(report.rank < report.columns);
        }
    }

    #[test]
    fn scaling_by_a_unit_keeps_residuals() {
        let bounds = SearchBounds::new(1, 2, 0).unwrap();
        let config = SearchConfig::new(40, 3, 2 * bounds.column_count(), 6);
        let report = search_annihilator(prime(5), Subject::Reciprocal, bounds, config).unwrap();
        let g = Subject::Reciprocal.evaluator(prime(5), 40).unwrap();
        let scheme = DifferenceScheme::new(3, 40);
        let columns = enumerate_monomials(&bounds);
        let points = sample_stream(prime(5), 40, 99, 10);
        let m = build_matrix(g.as_ref(), &bounds, &columns, &points, &scheme).unwrap();
        let unit = PadicNumber::from_integer(7, prime(5), 40);
        for row in &m {
            let r1 = row.iter().zip(&report.coefficients).fold(PadicNumber::zero(prime(5), 1000), |a, (x, c)| &a + &(x * c));
            let r2 = row
                .iter()
                .zip(&report.coefficients)
                .fold(PadicNumber::zero(prime(5), 1000), |a, (x, c)| &a + &(x * &(c * &unit)));
            assert_eq!(r1.valuation(), r2.valuation());
            assert_eq!(r1.absolute_precision(), r2.absolute_precision());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let bounds = SearchBounds::new(1, 2, 0).unwrap();
        let config = SearchConfig::new(50, 3, 2 * bounds.column_count(), 8);
        let a = search_annihilator(prime(3), Subject::Reciprocal, bounds, config).unwrap().to_json();
        let b = search_annihilator(prime(3), Subject::Reciprocal, bounds, config).unwrap().to_json();
        assert_eq!(a, b);
        assert!(a.starts_with("{\n  \"p\": 3,\n  \"function\": \"reciprocal\",\n  \"bounds\""));
    }

    #[test]
    fn build_matrix_shapes() {
        let bounds = SearchBounds::new(1, 1, 0).unwrap();
        let columns = enumerate_monomials(&bounds);
        let g = Subject::Identity.evaluator(prime(7), 30).unwrap();
        let points = sample_stream(prime(7), 30, 1, 5);
        let m = build_matrix(g.as_ref(), &bounds, &columns, &points, &DifferenceScheme::new(3, 30)).unwrap();
        for (row, x) in m.iter().zip(&points) {
            assert!(row[0].agrees_with(&PadicNumber::one(prime(7), 20)));
            assert!(row[1].agrees_with(&PadicNumber::one(prime(7), 20)));
            assert!(row[2].agrees_with(x));
        }
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let bounds = SearchBounds::new(2, 2, 2).unwrap();
        let tight = SearchConfig::new(20, 4, 200, 0);
        assert!(matches!(search_annihilator(prime(3), Subject::Gamma, bounds, tight), Err(Error::ConfigRejected(_))));
        let few = SearchConfig::new(60, 4, 5, 0);
        assert!(matches!(search_annihilator(prime(3), Subject::Gamma, bounds, few), Err(Error::ConfigRejected(_))));
    }
}

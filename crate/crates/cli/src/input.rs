//! Parsing of command-line values and rendering of diagnostics.

use std::io::IsTerminal;

use num_bigint::BigInt;
use num_rational::BigRational;

use morita_core::{Error, PadicNumber, Prime};

/// Reads `x` as an integer, a fraction `a/b`, or (with `valuation` given or a
/// comma present) a little-endian digit list `d0,d1,...` scaled by `p^v`.
///
/// The result is known modulo `p^precision`.
pub fn padic_value(text: &str, valuation: Option<i64>, prime: Prime, precision: i64) -> Result<PadicNumber, String> {
    let text = text.trim();
    if valuation.is_some() || text.contains(',') {
        let v = valuation.unwrap_or(0);
        let digits = text
            .split(',')
            .map(|d| {
                let d: u64 = d.trim().parse().map_err(|_| format!("bad digit '{}'", d.trim()))?;
                if d >= prime.get() {
                    return Err(format!("digit {d} is not below {prime}"));
                }
                Ok(d)
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(PadicNumber::from_digits(prime, v, &digits, precision - v));
    }
    let q = rational(text)?;
    Ok(PadicNumber::from_bigrational(&q, prime, precision))
}

pub fn rational(text: &str) -> Result<BigRational, String> {
    let text = text.trim();
    let bad = || format!("'{text}' is not an integer or fraction");
    match text.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b == BigInt::from(0) {
                return Err("zero denominator".into());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

pub fn rational_list(text: &str) -> Result<Vec<BigRational>, String> {
    text.split(',').map(rational).collect()
}

fn colored() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stderr().is_terminal()
}

pub fn report_error(message: &str) {
    if colored() {
        eprintln!("\x1b[1;31merror\x1b[0m: {message}");
    } else {
        eprintln!("error: {message}");
    }
}

/// Error message, plus the offending input with a caret for syntax errors.
pub fn report_core_error(err: &Error, source: Option<(&str, &str)>) {
    report_error(&err.to_string());
    if let (Error::Syntax { offset, .. }, Some((label, text))) = (err, source) {
        let pad = " ".repeat(label.len() + 2 + text[..(*offset).min(text.len())].chars().count());
        eprintln!("{label}: {text}");
        eprintln!("{pad}^");
    }
}

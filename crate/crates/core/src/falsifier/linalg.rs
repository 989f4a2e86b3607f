//! Gaussian elimination over `Q_p` with full ultrametric pivoting.

use crate::error::{Error, Result};
use crate::padic::PadicNumber;

#[derive(Debug, Clone)]
pub struct RowReduction {
    pub rank: usize,
    /// One vector per non-pivot column, in original column coordinates.
    pub nullspace: Vec<Vec<PadicNumber>>,
    /// Digits the rank decision rests on: the smallest relative precision
    /// of a pivot, capped by the precision of any leftover zero block.
    pub certified_digits: i64,
    pub pivot_valuations: Vec<i64>,
}

/// Row-reduces `matrix`, always pivoting on an entry of minimal valuation in
/// the active block (ties to the smallest row, then column).
///
/// A nonzero entry is an admissible pivot only when it carries at least
/// `min_certified` relative digits; a block with no admissible pivot that is
/// not zero to `min_certified` digits is `PrecisionExhausted`.
pub fn padic_row_reduce(matrix: &[Vec<PadicNumber>], min_certified: i64) -> Result<RowReduction> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if let Some(bad) = matrix.iter().find(|r| r.len() != cols) {
        return Err(Error::LengthMismatch { expected: cols, found: bad.len() });
    }
    if rows == 0 || cols == 0 {
        return Ok(RowReduction { rank: 0, nullspace: Vec::new(), certified_digits: 0, pivot_valuations: Vec::new() });
    }
    let prime = matrix[0][0].prime();
    if let Some(bad) = matrix.iter().flatten().find(|x| x.prime() != prime) {
        return Err(Error::PrimeMismatch(prime.get(), bad.prime().get()));
    }

    let mut a: Vec<Vec<PadicNumber>> = matrix.to_vec();
    let mut perm: Vec<usize> = (0..cols).collect();
    let input_precision = a.iter().flatten().map(PadicNumber::absolute_precision).min().unwrap_or(0);
    let mut certified = input_precision;
    let mut pivot_valuations = Vec::new();

    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best: Option<(i64, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, x) in row.iter().enumerate().skip(rank) {
                if let Some(v) = x.valuation() {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else { break };
        let rel = a[pi][pj].relative_precision();
        if rel < min_certified {
            return Err(Error::PrecisionExhausted(format!(
                "best pivot at step {rank} has valuation {v} and only {rel} certified digits"
            )));
        }
        a.swap(rank, pi);
        for row in a.iter_mut() {
            row.swap(rank, pj);
        }
        perm.swap(rank, pj);
        certified = certified.min(rel);
        pivot_valuations.push(v);

        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = &pivot_row[rank];
        for row in rest.iter_mut() {
            if row[rank].is_zero() {
                continue;
            }
            let factor = row[rank].checked_div(pivot)?;
            for j in rank..cols {
                row[j] = &row[j] - &(&factor * &pivot_row[j]);
            }
        }
        rank += 1;
    }

    if rank < rows && rank < cols {
        let leftover = a[rank..]
            .iter()
            .flat_map(|row| row[rank..].iter())
            .map(PadicNumber::absolute_precision)
            .min()
            .unwrap_or(certified);
        if leftover < min_certified {
            return Err(Error::PrecisionExhausted(format!(
                "remaining block is zero only to {leftover} digits"
            )));
        }
        certified = certified.min(leftover);
    }

    // back substitution in permuted coordinates
    let mut nullspace = Vec::with_capacity(cols - rank);
    for free in rank..cols {
        let mut y: Vec<PadicNumber> = (0..cols)
            .map(|k| if k == free { PadicNumber::one(prime, certified.max(1)) } else { PadicNumber::zero(prime, certified) })
            .collect();
        for i in (0..rank).rev() {
            let mut s = PadicNumber::zero(prime, certified);
            for j in (i + 1)..cols {
                if !y[j].is_zero() {
                    s = &s + &(&a[i][j] * &y[j]);
                }
            }
            y[i] = (-&s).checked_div(&a[i][i])?;
        }
        let mut x = vec![PadicNumber::zero(prime, certified); cols];
        for (k, value) in y.into_iter().enumerate() {
            x[perm[k]] = value;
        }
        nullspace.push(x);
    }

    Ok(RowReduction { rank, nullspace, certified_digits: certified, pivot_valuations })
}

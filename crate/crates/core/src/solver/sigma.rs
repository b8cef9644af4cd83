//! Choice of `σ` and the derived exponent `δ = σ + q − 1 + (2 − 2d)/p`.

use serde::{Deserialize, Serialize};

use crate::forms::LpExponent;

use super::SolverError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaMin {
    pub sigma: i32,
    /// The bound fell below `−q` and was raised to it.
    pub floored: bool,
}

/// `p = num/den` in lowest terms, or `None` for `p = ∞`. Finite exponents are
/// matched to a fraction with denominator at most `10⁶`.
pub fn p_as_fraction(p: LpExponent) -> Option<(i64, i64)> {
    let p = match p {
        LpExponent::Infinity => return None,
        LpExponent::Finite(p) => p,
    };
    for den in 1..=1_000_000i64 {
        let num = (p * den as f64).round();
        if (num - p * den as f64).abs() <= 1e-9 * den as f64 {
            let num = num as i64;
            let g = gcd(num, den);
            return Some((num / g, den / g));
        }
    }
    let den = 1_000_000i64;
    Some(((p * den as f64).round() as i64, den))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    let q = a.div_euclid(b);
    if a.rem_euclid(b) == 0 {
        q
    } else {
        q + 1
    }
}

/// Smallest integer `σ ≥ (2d − 2)/p + 1 − q`, raised to `−q` if needed.
pub fn sigma_min(d: usize, p: LpExponent, q: usize) -> Result<SigmaMin, SolverError> {
    if q < 1 || q > d {
        return Err(SolverError::InvalidDegree { q, max: d });
    }
    let lead = match p_as_fraction(p) {
        None => 0,
        Some((num, den)) => ceil_div((2 * d as i64 - 2) * den, num),
    };
    let bound = lead + 1 - q as i64;
    let floor = -(q as i64);
    Ok(SigmaMin {
        sigma: bound.max(floor) as i32,
        floored: bound < floor,
    })
}

/// `δ` as an exact fraction `(num, den)` with `den > 0`.
pub fn delta_fraction(sigma: i32, q: usize, d: usize, p: LpExponent) -> (i64, i64) {
    let base = sigma as i64 + q as i64 - 1;
    match p_as_fraction(p) {
        None => (base, 1),
        Some((num, den)) => (base * num + (2 - 2 * d as i64) * den, num),
    }
}

pub fn delta(sigma: i32, q: usize, d: usize, p: LpExponent) -> f64 {
    let (a, b) = delta_fraction(sigma, q, d, p);
    a as f64 / b as f64
}

//! Closed-form counting bounds and the Łojasiewicz exponent, in exact integers.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{CspError, Result};

fn big(x: usize) -> BigUint {
    BigUint::from(x)
}

fn pow(base: usize, exp: usize) -> BigUint {
    num_traits::pow(big(base), exp)
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * big(n - i) / big(i + 1);
    }
    acc
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CspError::Precondition(msg.to_string()))
    }
}

/// Upper bound on the number of connected components of the set of critical
/// points of all selections of `r` polynomials of degree at most `d` in `n`
/// variables:
///
/// `(d+1)(2d+1)^(n+r-1) + sum_{s=1}^{r-1} C(r,s) [(r-s)(d+1)+1] [2(r-s)(d+1)+1]^(n+s)`
pub fn bound_b0(n: usize, d: usize, r: usize) -> Result<BigUint> {
    require(n >= 1 && d >= 1 && r >= 1, "bound_b0 needs n, d, r >= 1")?;
    let mut total = big(d + 1) * pow(2 * d + 1, n + r - 1);
    for s in 1..r {
        let a = (r - s) * (d + 1) + 1;
        let b = 2 * (r - s) * (d + 1) + 1;
        total += binomial(r, s) * big(a) * pow(b, n + s);
    }
    Ok(total)
}

/// Component-count bound for `{f_1 = ... = f_s = 0, g_1 != 0, ..., g_l != 0}`
/// with degrees at most `d` in `n` variables.
pub fn bound_n(n: usize, d: usize, l: usize) -> Result<BigUint> {
    require(n >= 1 && d >= 1, "bound_n needs n, d >= 1")?;
    Ok(if l == 0 {
        big(d) * pow(2 * d - 1, n - 1)
    } else {
        big(l * d + 1) * pow(2 * l * d + 1, n)
    })
}

/// `L(n, d, r) = (d+1)(3d)^(n+r-2)`.
pub fn loja_exponent(n: usize, d: usize, r: usize) -> Result<BigUint> {
    require(
        n >= 1 && d >= 1 && r >= 1,
        "loja_exponent needs n, d, r >= 1",
    )?;
    Ok(big(d + 1) * pow(3 * d, n + r - 2))
}

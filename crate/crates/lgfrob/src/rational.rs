//! Exact rationals.
//!
//! Everything numeric in the crate is a [`Q`], an arbitrary precision
//! rational in lowest terms with positive denominator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Formats as `p` or `p/q`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("not a rational: {s:?}"),
    };
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (s, None),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = match den {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

/// Floor of a rational as i64 (desk-scale values only).
pub fn floor_i64(x: &Q) -> i64 {
    let f = x.floor();
    i64::try_from(f.numer()).expect("rational out of i64 range")
}

pub fn ceil_i64(x: &Q) -> i64 {
    let c = x.ceil();
    i64::try_from(c.numer()).expect("rational out of i64 range")
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

//! Exact rational scalars and their canonical text form.
//!
//! Rationals serialize as `"p/q"` (or just `"p"` for integers), no spaces,
//! always in lowest terms with a positive denominator. That canonical form is
//! what every JSON/CSV interface of this crate reads and writes.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat_i64(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses the canonical form `p` or `p/q`. Rejects empty input, a zero
/// denominator and anything with surrounding junk.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let make_err = || Error::Parse(format!("malformed rational {s:?}"));
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = num_s.parse().map_err(|_| make_err())?;
    let denom: BigInt = match den_s {
        Some(d) => d.parse().map_err(|_| make_err())?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical string form: `p` for integers, `p/q` otherwise.
pub fn rational_str(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Total bits in numerator plus denominator; used by the bench reporting to
/// track coefficient growth.
pub fn bit_length(r: &Rational) -> u64 {
    r.numer().abs().bits() + r.denom().bits()
}

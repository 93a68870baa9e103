//! Exact rationals and their text form (`"p/q"`, integers, or finite decimals).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn half() -> Rational {
    rat(1, 2)
}

/// Parses `3`, `-3/4` or `0.51`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `Σ|x|`; integer runs are summed without normalizing.
pub fn abs_sum<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Rational {
    let mut ints = BigInt::zero();
    let mut rest = Rational::zero();
    for x in xs {
        if x.is_integer() {
            ints += x.numer().abs();
        } else {
            rest += x.abs();
        }
    }
    rest + Rational::from_integer(ints)
}

pub fn is_dyadic(x: &Rational) -> bool {
    let d = x.denom();
    d.is_one() || (d & (d - BigInt::one())).is_zero()
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_str {
    use super::{parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

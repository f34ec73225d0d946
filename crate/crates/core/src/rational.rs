//! Exact rational numbers and their `"p/q"` text form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{GameError, Result};

/// Arbitrary-precision rational in canonical reduced form.
pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || GameError::BadRational(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{whole_digits}{frac}");
        let mut numer: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(numer, denom));
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Canonical text form: `"p/q"`, or `"p"` for integers.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy decimal rendering for display columns only.
pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(p), Some(q)) if p.is_finite() && q.is_finite() => p / q,
        _ => {
            // Huge operands: shift both down before dividing.
            let bits = r.numer().bits().max(r.denom().bits());
            let shift = bits.saturating_sub(1000);
            let p = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let q = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            p / q
        }
    }
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Largest rational `u` such that every input is an integer multiple of `u`.
/// Returns one when all inputs are zero.
pub fn common_unit<'a>(values: impl IntoIterator<Item = &'a Rational> + Clone) -> Rational {
    let denom = lcm_of_denominators(values.clone());
    let g = values.into_iter().fold(BigInt::zero(), |acc, r| {
        let scaled = (r * Rational::from_integer(denom.clone())).to_integer();
        acc.gcd(&scaled.abs())
    });
    if g.is_zero() {
        Rational::one()
    } else {
        Rational::new(g, denom)
    }
}

pub mod serde_str {
    //! `#[serde(with = ...)]` helpers rendering rationals as `"p/q"` strings.
    use super::{format, parse, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::super::{format, parse, Rational};
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| parse(t).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

//! The scalar field: arbitrary-precision rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serializer};

use crate::{Error, Result};

/// Exact rational scalar, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p"`, `"-p"` or `"p/q"`; surrounding whitespace is ignored.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational: {text:?}"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

/// `"p"` when the denominator is one, `"p/q"` otherwise.
pub fn render(value: &Rational) -> String {
    value.to_string()
}

/// Serde adapter: rationals travel as strings, integers are also accepted
/// on input.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&render(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        RationalRepr::deserialize(d)?.into_rational().map_err(de::Error::custom)
    }
}

pub mod serde_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&render(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        Vec::<RationalRepr>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_rational().map_err(de::Error::custom))
            .collect()
    }
}

pub mod serde_mat {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for row in rows {
            let row: Vec<String> = row.iter().map(render).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        Vec::<Vec<RationalRepr>>::deserialize(d)?
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|r| r.into_rational().map_err(de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Int(i64),
    Text(String),
}

impl RationalRepr {
    fn into_rational(self) -> Result<Rational> {
        match self {
            RationalRepr::Int(v) => Ok(int(v)),
            RationalRepr::Text(t) => parse(&t),
        }
    }
}

//! Exact rational helpers and their text/JSON encodings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `a`, `-a` or `a/b`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let err = |msg: &str| Error::Parse {
        input: s.to_string(),
        msg: msg.to_string(),
    };
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// `a` for integers, `a/b` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// The maximum of a nonempty iterator of rationals, zero when empty.
pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values
        .into_iter()
        .map(Signed::abs)
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Serde adapter encoding a rational as a `["num", "den"]` string pair.
pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        [q.numer().to_string(), q.denom().to_string()].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let [num, den] = <[String; 2]>::deserialize(d)?;
        let num: BigInt = num.parse().map_err(D::Error::custom)?;
        let den: BigInt = den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational::new(num, den))
    }
}

/// [`pair`] for vectors.
pub mod pair_vec {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::pair")] Rational);

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|q| Wrap(q.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?
            .into_iter()
            .map(|w| w.0)
            .collect())
    }
}

/// Serde adapter for the `a/b` text form.
pub mod text {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

/// [`text`] for optional values.
pub mod text_opt {
    use super::*;

    pub fn serialize<S: Serializer>(
        q: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_rational(&s).map_err(D::Error::custom))
            .transpose()
    }
}

/// [`text`] for vectors.
pub mod text_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_rational(s).map_err(D::Error::custom))
            .collect()
    }
}

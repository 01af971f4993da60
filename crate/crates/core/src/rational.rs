//! Exact integers and rationals, with the `"p/q"` text encoding used at every
//! serialization boundary.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;

use crate::error::{Error, Result};

pub type Integer = BigInt;
pub type Rational = BigRational;

pub fn int(v: i64) -> Integer {
    BigInt::from(v)
}

pub fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"`, `"-p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::malformed(1, 1, format!("not a rational number: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn format_vector(v: &[Rational]) -> String {
    let mut out = String::new();
    for (i, q) in v.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}", format_rational(q));
    }
    out
}

pub fn floor(q: &Rational) -> Integer {
    q.numer().div_floor(q.denom())
}

pub fn ceil(q: &Rational) -> Integer {
    -((-q.numer()).div_floor(q.denom()))
}

/// Nearest integer, halves rounded up.
pub fn round_half_up(q: &Rational) -> Integer {
    floor(&(q + Rational::new(BigInt::one(), BigInt::from(2))))
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Integer {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn to_i64(z: &Integer) -> Option<i64> {
    z.to_i64()
}

pub fn abs_max<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values
        .into_iter()
        .fold(Rational::zero(), |acc, q| if q.abs() > acc { q.abs() } else { acc })
}

/// Serde adapter: rationals travel as strings `"p/q"`; integers (JSON numbers
/// or strings) are accepted on input.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("an integer or a string \"p/q\"")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
            Ok(rat(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
            Err(E::custom(format!(
                "floating point value {v} not accepted; write it as a string \"p/q\""
            )))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
            parse_rational(v).map_err(|_| E::custom(format!("not a rational number: {v:?}")))
        }
    }
}

pub mod serde_rational_vec {
    use super::*;
    use serde::de::SeqAccess;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format_rational(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        struct SeqVisitor;
        impl<'de> Visitor<'de> for SeqVisitor {
            type Value = Vec<Rational>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a list of rationals")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(q) = seq.next_element::<Wrapped>()? {
                    out.push(q.0);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(SeqVisitor)
    }

    struct Wrapped(Rational);

    impl<'de> serde::Deserialize<'de> for Wrapped {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            d.deserialize_any(super::serde_rational::RationalVisitor).map(Wrapped)
        }
    }
}

/// Serde adapter for big integers: JSON numbers when they fit in `i64`,
/// decimal strings otherwise.
pub mod serde_integer {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
        match z.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&z.to_string()),
        }
    }
}

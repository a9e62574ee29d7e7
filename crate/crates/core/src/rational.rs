//! Exact measures and the small amount of parsing/serialization glue around them.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Measures of sets and breakpoints of profiles are kept exact.
pub type Measure = BigRational;

pub fn int(n: i64) -> Measure {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Measure {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^-k` as an exact rational.
pub fn dyadic(k: u32) -> Measure {
    BigRational::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn to_f64(m: &Measure) -> f64 {
    m.to_f64().unwrap_or(f64::NAN)
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Result<Measure> {
    BigRational::from_float(x).ok_or_else(|| Error::invalid(format!("non-finite value {x}")))
}

/// Parses `p/q`, integers, and decimals with an optional exponent (`0.3`, `1e-3`) exactly.
pub fn parse_rational(s: &str) -> Result<Measure> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("not a rational: {s:?}")));
    }
    let digits: BigInt = format!("{whole}{frac}0").parse().expect("digits checked");
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

pub fn format_rational(m: &Measure) -> String {
    if m.is_integer() {
        m.numer().to_string()
    } else {
        format!("{}/{}", m.numer(), m.denom())
    }
}

/// Extent of the ambient interval `(0, L)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extent {
    Finite(Measure),
    Infinite,
}

impl Extent {
    pub fn finite(m: Measure) -> Result<Self> {
        if !m.is_positive() {
            return Err(Error::invalid("ambient length must be positive"));
        }
        Ok(Extent::Finite(m))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extent::Finite(m) => to_f64(m),
            Extent::Infinite => f64::INFINITY,
        }
    }

    pub fn contains_measure(&self, m: &Measure) -> bool {
        match self {
            Extent::Finite(l) => m <= l,
            Extent::Infinite => true,
        }
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if x == f64::INFINITY {
            Ok(Extent::Infinite)
        } else {
            Extent::finite(from_f64(x)?)
        }
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(m) => f.write_str(&format_rational(m)),
            Extent::Infinite => f.write_str("inf"),
        }
    }
}

/// A JSON scalar that may be written either as a number or as a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrStr {
    Num(f64),
    Str(String),
}

impl NumOrStr {
    pub fn to_rational(&self) -> Result<Measure> {
        match self {
            // Shortest round-trip decimal, so `0.3` means 3/10 rather than its binary neighbour.
            NumOrStr::Num(x) if x.is_finite() => parse_rational(&format!("{x:?}")),
            NumOrStr::Num(x) => Err(Error::Parse(format!("non-finite number {x}"))),
            NumOrStr::Str(s) => parse_rational(s),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            NumOrStr::Num(x) => Ok(*x),
            NumOrStr::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                _ => Ok(to_f64(&parse_rational(s)?)),
            },
        }
    }
}

pub mod measure_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Measure, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(m))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Measure, D::Error> {
        NumOrStr::deserialize(d)?.to_rational().map_err(de::Error::custom)
    }
}

/// Serde adapter for a list of rationals.
pub mod measure_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Measure], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Measure>, D::Error> {
        Vec::<NumOrStr>::deserialize(d)?
            .iter()
            .map(|x| x.to_rational().map_err(de::Error::custom))
            .collect()
    }
}

impl Serialize for Extent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Extent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Str(s) if matches!(s.trim().to_ascii_lowercase().as_str(), "inf" | "infinity") => {
                Ok(Extent::Infinite)
            }
            other => Extent::finite(other.to_rational().map_err(de::Error::custom)?).map_err(de::Error::custom),
        }
    }
}

/// Serde adapter for an `f64` that may be `+inf`, written as the string `"inf"`.
pub mod length_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        struct LenVisitor;
        impl Visitor<'_> for LenVisitor {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
                Ok(v)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
                NumOrStr::Str(v.to_string()).to_f64().map_err(E::custom)
            }
        }
        d.deserialize_any(LenVisitor)
    }
}

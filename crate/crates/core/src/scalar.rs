use std::fmt::Debug;

use num::rational::BigRational;
use num::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Measure, NumOrStr};

/// Values carried by step functions: exact rationals or floats.
pub trait Scalar: Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_measure(m: &Measure) -> Self;
    fn to_f64(&self) -> f64;
    fn from_json(v: &NumOrStr) -> Result<Self>;
    fn to_json(&self) -> NumOrStr;

    /// `a <= b`, exact for rationals and with a relative slack of `1e-12` for floats.
    fn le_tol(&self, other: &Self) -> bool;

    /// False for NaN and infinities.
    fn is_finite_value(&self) -> bool;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_measure(m: &Measure) -> Self {
        crate::rational::to_f64(m)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_json(v: &NumOrStr) -> Result<Self> {
        let x = v.to_f64()?;
        if !x.is_finite() {
            return Err(Error::invalid("step function values must be finite"));
        }
        Ok(x)
    }

    fn to_json(&self) -> NumOrStr {
        NumOrStr::Num(*self)
    }

    fn le_tol(&self, other: &Self) -> bool {
        *self <= *other + 1e-12 * self.abs().max(other.abs()).max(1e-300)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    fn from_measure(m: &Measure) -> Self {
        m.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_json(v: &NumOrStr) -> Result<Self> {
        v.to_rational()
    }

    fn to_json(&self) -> NumOrStr {
        NumOrStr::Str(format_rational(self))
    }

    fn le_tol(&self, other: &Self) -> bool {
        self <= other
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

//! Fundamental functions `phi: (0, L) -> (0, inf)`.
//!
//! Both families split `(0, L)` into finitely many pieces on which `phi` and `phi(t)/t` are
//! each monotone (see [`Fundamental::knots`]). Suprema of `phi` or of `phi(t)/t` over an
//! interval therefore land on a knot or an endpoint, which is what makes the majorant and the
//! `m_phi` norm exact rather than sampled.

mod classify;
mod majorant;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use classify::{
    almost_quasiconcave_constant, classify_phi, delta2_constant, delta2_near_zero_constant,
    dilation_condition_value, dilation_sup, not_too_constant_margin, DILATION_STEPS, sigma_threshold, Check,
    PhiClassification, SigmaQuery, ZeroLimit,
};
pub use majorant::{least_quasiconcave_majorant, Majorant};

use crate::error::{Error, Result};
use crate::numeric::Attainment;
use crate::rational::length_serde;

/// Which Marcinkiewicz functional a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// `sup phi(t) f*(t)`
    #[serde(rename = "m")]
    SmallM,
    /// `sup phi(t) f**(t)`
    #[serde(rename = "M")]
    BigM,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::SmallM => "m",
            Space::BigM => "M",
        })
    }
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" | "m_phi" => Ok(Space::SmallM),
            "M" | "M_phi" => Ok(Space::BigM),
            _ => Err(Error::Parse(format!("expected m or M, got {s:?}"))),
        }
    }
}

/// Anything that behaves like a fundamental function on `(0, L)`.
pub trait Fundamental: Send + Sync {
    /// `L`, possibly `+inf`.
    fn length(&self) -> f64;

    /// Value at `t`; callers guarantee `0 < t < L`.
    fn value(&self, t: f64) -> f64;

    /// Interior points splitting `(0, L)` into pieces where both `value` and `value(t)/t`
    /// are monotone.
    fn knots(&self) -> Vec<f64>;

    /// `lim_{t -> 0+} value(t)`.
    fn limit_at_zero(&self) -> f64;

    /// `lim_{t -> L-} value(t)` (the limit at infinity when `L = inf`).
    fn limit_at_end(&self) -> f64;

    /// `lim_{t -> 0+} value(t) / t`.
    fn slope_at_zero(&self) -> f64;

    /// `lim_{t -> L-} value(t) / t`.
    fn slope_at_end(&self) -> f64 {
        let l = self.length();
        if l.is_finite() {
            self.limit_at_end() / l
        } else {
            f64::INFINITY
        }
    }

    /// Exact `sup_{t in (a, b)} value(t)` for `0 <= a < b <= L`, via knots and one-sided limits.
    fn sup_on(&self, a: f64, b: f64) -> (f64, Attainment) {
        let l = self.length();
        let mut best = if a == 0.0 {
            (self.limit_at_zero(), Attainment::ZeroLimit)
        } else {
            (self.value(a), Attainment::At(a))
        };
        for k in self.knots() {
            if k > a && k < b {
                let v = self.value(k);
                if v > best.0 {
                    best = (v, Attainment::At(k));
                }
            }
        }
        let right = if b >= l {
            (self.limit_at_end(), Attainment::EndLimit)
        } else {
            (self.value(b), Attainment::LeftLimit(b))
        };
        if right.0 > best.0 {
            best = right;
        }
        best
    }

    /// Exact `sup_{t in [a, b)} value(t) / t` for `0 < a < b <= L`.
    fn sup_slope_on(&self, a: f64, b: f64) -> (f64, Attainment) {
        let l = self.length();
        let mut best = (self.value(a) / a, Attainment::At(a));
        for k in self.knots() {
            if k > a && k < b {
                let v = self.value(k) / k;
                if v > best.0 {
                    best = (v, Attainment::At(k));
                }
            }
        }
        let right = if b >= l {
            (self.slope_at_end(), Attainment::EndLimit)
        } else {
            (self.value(b) / b, Attainment::LeftLimit(b))
        };
        if right.0 > best.0 {
            best = right;
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `scale * t^alpha * log(2L/t)^beta`
    PowerLog { alpha: f64, beta: f64, scale: f64 },
    /// Piecewise-linear interpolation of `(grid, values)`; constant beyond the last node and
    /// either constant or linear through the origin before the first.
    Tabulated { grid: Vec<f64>, values: Vec<f64>, through_origin: bool },
}

/// A validated fundamental function together with its domain length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPhi", into = "RawPhi")]
pub struct PhiSpec {
    family: Family,
    length: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum RawPhi {
    PowerLog {
        alpha: f64,
        beta: f64,
        #[serde(rename = "L", with = "length_serde")]
        length: f64,
        #[serde(default = "one", skip_serializing_if = "is_unit")]
        scale: f64,
    },
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
        #[serde(rename = "L", with = "length_serde", default = "infinity")]
        length: f64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        through_origin: bool,
    },
}

fn one() -> f64 {
    1.0
}

fn infinity() -> f64 {
    f64::INFINITY
}

fn is_unit(x: &f64) -> bool {
    *x == 1.0
}

impl TryFrom<RawPhi> for PhiSpec {
    type Error = Error;
    fn try_from(raw: RawPhi) -> Result<Self> {
        match raw {
            RawPhi::PowerLog { alpha, beta, length, scale } => {
                PhiSpec::power_log(alpha, beta, length)?.scaled(scale)
            }
            RawPhi::Tabulated { grid, values, length, through_origin } => {
                let phi = PhiSpec::tabulated(grid, values, length)?;
                Ok(if through_origin { phi.through_origin() } else { phi })
            }
        }
    }
}

impl From<PhiSpec> for RawPhi {
    fn from(phi: PhiSpec) -> Self {
        match phi.family {
            Family::PowerLog { alpha, beta, scale } => RawPhi::PowerLog { alpha, beta, length: phi.length, scale },
            Family::Tabulated { grid, values, through_origin } => RawPhi::Tabulated {
                grid,
                values,
                length: phi.length,
                through_origin,
            },
        }
    }
}

impl PhiSpec {
    pub fn power_log(alpha: f64, beta: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::invalid("alpha and beta must be finite"));
        }
        if beta != 0.0 && length.is_infinite() {
            return Err(Error::invalid("a logarithmic factor needs a finite domain length"));
        }
        Ok(PhiSpec {
            family: Family::PowerLog { alpha, beta, scale: 1.0 },
            length,
        })
    }

    /// `t^alpha` on `(0, L)`.
    pub fn power(alpha: f64, length: f64) -> Result<Self> {
        PhiSpec::power_log(alpha, 0.0, length)
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>, length: f64) -> Result<Self> {
        check_length(length)?;
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::invalid("tabulated phi needs equally many (>= 1) nodes and values"));
        }
        if grid[0] <= 0.0 || !grid.windows(2).all(|w| w[0] < w[1]) || !(grid[grid.len() - 1] < length) {
            return Err(Error::invalid("tabulated grid must be strictly increasing inside (0, L)"));
        }
        if !values.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::invalid("tabulated values must be positive and finite"));
        }
        Ok(PhiSpec {
            family: Family::Tabulated { grid, values, through_origin: false },
            length,
        })
    }

    /// Multiplies a power-log function by a positive constant.
    pub fn scaled(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("scale must be positive, got {c}")));
        }
        match &mut self.family {
            Family::PowerLog { scale, .. } => *scale *= c,
            Family::Tabulated { values, .. } => values.iter_mut().for_each(|v| *v *= c),
        }
        Ok(self)
    }

    /// Switches a tabulated function to linear interpolation through the origin before its
    /// first node. No effect on power-log functions.
    pub fn through_origin(mut self) -> Self {
        if let Family::Tabulated { through_origin, .. } = &mut self.family {
            *through_origin = true;
        }
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Parses the compact CLI form `power_log:alpha,beta,L` (optionally `,scale`).
    pub fn parse_short(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected family:args, got {s:?}")))?;
        if name != "power_log" {
            return Err(Error::Parse(format!("unknown short phi family {name:?}; use JSON for tabulated")));
        }
        let nums = args
            .split(',')
            .map(|a| crate::rational::NumOrStr::Str(a.to_string()).to_f64())
            .collect::<Result<Vec<f64>>>()?;
        match nums.as_slice() {
            [a, b, l] => PhiSpec::power_log(*a, *b, *l),
            [a, b, l, c] => PhiSpec::power_log(*a, *b, *l)?.scaled(*c),
            _ => Err(Error::Parse(format!("power_log expects alpha,beta,L[,scale], got {args:?}"))),
        }
    }

    /// `phi(t)` with the domain checked.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < self.length) {
            return Err(Error::domain(format!("t = {t} is outside (0, {})", self.length)));
        }
        Ok(self.value(t))
    }

    /// `lim_{t -> 0+} phi(a t) / phi(t)`.
    pub fn ratio_limit_at_zero(&self, a: f64) -> f64 {
        match &self.family {
            Family::PowerLog { alpha, .. } => a.powf(*alpha),
            Family::Tabulated { through_origin, .. } => {
                if *through_origin {
                    a
                } else {
                    1.0
                }
            }
        }
    }

    /// `lim_{t -> inf} phi(a t) / phi(t)`; only meaningful when `L = inf`.
    pub fn ratio_limit_at_infinity(&self, a: f64) -> f64 {
        match &self.family {
            Family::PowerLog { alpha, .. } => a.powf(*alpha),
            Family::Tabulated { .. } => 1.0,
        }
    }

    /// `lim_{t -> 0+} t / phi(t)`.
    pub fn t_over_phi_at_zero(&self) -> f64 {
        let s = self.slope_at_zero();
        if s == 0.0 {
            f64::INFINITY
        } else {
            1.0 / s
        }
    }
}

fn check_length(length: f64) -> Result<()> {
    if !(length > 0.0) || length.is_nan() {
        return Err(Error::invalid(format!("domain length must be positive, got {length}")));
    }
    Ok(())
}

impl Fundamental for PhiSpec {
    fn length(&self) -> f64 {
        self.length
    }

    fn value(&self, t: f64) -> f64 {
        match &self.family {
            Family::PowerLog { alpha, beta, scale } => {
                let mut v = scale * t.powf(*alpha);
                if *beta != 0.0 {
                    v *= (2.0 * self.length / t).ln().powf(*beta);
                }
                v
            }
            Family::Tabulated { grid, values, through_origin } => {
                let n = grid.len();
                if t <= grid[0] {
                    return if *through_origin { values[0] * t / grid[0] } else { values[0] };
                }
                if t >= grid[n - 1] {
                    return values[n - 1];
                }
                let i = grid.partition_point(|&g| g <= t);
                let (g0, g1, v0, v1) = (grid[i - 1], grid[i], values[i - 1], values[i]);
                v0 + (v1 - v0) * (t - g0) / (g1 - g0)
            }
        }
    }

    fn knots(&self) -> Vec<f64> {
        match &self.family {
            Family::PowerLog { alpha, beta, .. } => {
                if *beta == 0.0 {
                    return Vec::new();
                }
                let mut out = Vec::new();
                // d/dt log phi = (alpha u - beta) / (t u), u = log(2L/t); same for phi/t with alpha - 1
                for a in [*alpha, alpha - 1.0] {
                    if a != 0.0 {
                        let u = beta / a;
                        if u > std::f64::consts::LN_2 {
                            let t = 2.0 * self.length * (-u).exp();
                            if t > 0.0 && t < self.length {
                                out.push(t);
                            }
                        }
                    }
                }
                out.sort_by(f64::total_cmp);
                out.dedup();
                out
            }
            Family::Tabulated { grid, .. } => grid.clone(),
        }
    }

    fn limit_at_zero(&self) -> f64 {
        match &self.family {
            Family::PowerLog { alpha, beta, scale } => {
                if *alpha > 0.0 {
                    0.0
                } else if *alpha < 0.0 {
                    f64::INFINITY
                } else if *beta < 0.0 {
                    0.0
                } else if *beta == 0.0 {
                    *scale
                } else {
                    f64::INFINITY
                }
            }
            Family::Tabulated { values, through_origin, .. } => {
                if *through_origin {
                    0.0
                } else {
                    values[0]
                }
            }
        }
    }

    fn limit_at_end(&self) -> f64 {
        match &self.family {
            Family::PowerLog { alpha, beta, scale } => {
                if self.length.is_finite() {
                    scale * self.length.powf(*alpha) * std::f64::consts::LN_2.powf(*beta)
                } else if *alpha > 0.0 {
                    f64::INFINITY
                } else if *alpha == 0.0 {
                    *scale
                } else {
                    0.0
                }
            }
            Family::Tabulated { values, .. } => values[values.len() - 1],
        }
    }

    fn slope_at_zero(&self) -> f64 {
        match &self.family {
            Family::PowerLog { alpha, beta, scale } => {
                if *alpha < 1.0 {
                    f64::INFINITY
                } else if *alpha > 1.0 {
                    0.0
                } else if *beta > 0.0 {
                    f64::INFINITY
                } else if *beta == 0.0 {
                    *scale
                } else {
                    0.0
                }
            }
            Family::Tabulated { grid, values, through_origin } => {
                if *through_origin {
                    values[0] / grid[0]
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn slope_at_end(&self) -> f64 {
        if self.length.is_finite() {
            return self.limit_at_end() / self.length;
        }
        match &self.family {
            Family::PowerLog { alpha, scale, .. } => {
                if *alpha < 1.0 {
                    0.0
                } else if *alpha == 1.0 {
                    *scale
                } else {
                    f64::INFINITY
                }
            }
            Family::Tabulated { .. } => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let sqrt = PhiSpec::power(0.5, 1.0).unwrap();
        assert_eq!(sqrt.eval(0.25).unwrap(), 0.5);
        let id = PhiSpec::power(1.0, 1.0).unwrap();
        assert_eq!(id.eval(0.3).unwrap(), 0.3);
        // exponential-integrability target in the plane: (log 2|Omega|/t)^(-1/2)
        let omega = 3.0;
        let trud = PhiSpec::power_log(0.0, -0.5, omega).unwrap();
        let t = 0.7;
        assert!((trud.eval(t).unwrap() - (2.0 * omega / t).ln().powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_endpoints() {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        assert!(matches!(phi.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(phi.eval(1.0), Err(Error::Domain(_))));
        assert!(matches!(phi.eval(-1.0), Err(Error::Domain(_))));
        let inf = PhiSpec::power(0.5, f64::INFINITY).unwrap();
        assert!(inf.eval(1e6).is_ok());
    }

    #[test]
    fn log_factor_needs_finite_length() {
        assert!(PhiSpec::power_log(0.5, 1.0, f64::INFINITY).is_err());
        assert!(PhiSpec::power_log(0.5, 0.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn tabulated_interpolates() {
        let phi = PhiSpec::tabulated(vec![0.1, 0.5], vec![1.0, 3.0], 1.0).unwrap();
        assert_eq!(phi.eval(0.05).unwrap(), 1.0);
        assert!((phi.eval(0.3).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(phi.eval(0.9).unwrap(), 3.0);
        let lin = phi.clone().through_origin();
        assert!((lin.eval(0.05).unwrap() - 0.5).abs() < 1e-15);
        assert!(PhiSpec::tabulated(vec![0.5, 0.1], vec![1.0, 1.0], 1.0).is_err());
        assert!(PhiSpec::tabulated(vec![0.5], vec![0.0], 1.0).is_err());
        assert!(PhiSpec::tabulated(vec![1.0], vec![1.0], 1.0).is_err());
    }

    #[test]
    fn knots_are_turning_points() {
        // t^(1/2) log(2/t): phi increases until log(2/t) = 2
        let phi = PhiSpec::power_log(0.5, 1.0, 1.0).unwrap();
        let knots = phi.knots();
        let t_star = 2.0 * (-2.0f64).exp();
        assert!(knots.iter().any(|k| (k - t_star).abs() < 1e-15));
        for k in knots {
            let h = 1e-6 * k;
            let d = (phi.value(k + h) - phi.value(k - h)) / (2.0 * h);
            let ds = (phi.value(k + h) / (k + h) - phi.value(k - h) / (k - h)) / (2.0 * h);
            assert!(d.abs() < 1e-3 || ds.abs() < 1e-3 * phi.value(k) / k);
        }
    }

    #[test]
    fn json_forms() {
        let phi: PhiSpec = serde_json::from_str(r#"{"family":"power_log","alpha":0.5,"beta":0,"L":1}"#).unwrap();
        assert_eq!(phi, PhiSpec::power(0.5, 1.0).unwrap());
        let phi: PhiSpec = serde_json::from_str(r#"{"family":"power_log","alpha":2,"beta":0,"L":"inf"}"#).unwrap();
        assert_eq!(phi.length(), f64::INFINITY);
        let json = serde_json::to_string(&phi).unwrap();
        assert_eq!(json, r#"{"family":"power_log","alpha":2.0,"beta":0.0,"L":"inf"}"#);
        let tab: PhiSpec = serde_json::from_str(r#"{"family":"tabulated","grid":[0.1,0.2],"values":[1,2]}"#).unwrap();
        assert_eq!(tab.length(), f64::INFINITY);
        assert!(serde_json::from_str::<PhiSpec>(r#"{"family":"tabulated","grid":[0.2,0.1],"values":[1,2]}"#).is_err());
    }

    #[test]
    fn short_form() {
        assert_eq!(PhiSpec::parse_short("power_log:0.5,0,1").unwrap(), PhiSpec::power(0.5, 1.0).unwrap());
        assert_eq!(PhiSpec::parse_short("power_log:2,0,inf").unwrap().length(), f64::INFINITY);
        assert!(PhiSpec::parse_short("power_log:1,2").is_err());
        assert!(PhiSpec::parse_short("tabulated:1").is_err());
    }

    #[test]
    fn limits_match_values_close_to_the_ends() {
        let cases = [
            PhiSpec::power_log(0.5, 1.0, 1.0).unwrap(),
            PhiSpec::power_log(1.0, -1.0, 2.0).unwrap(),
            PhiSpec::power_log(0.0, -0.5, 1.0).unwrap(),
            PhiSpec::power(1.0, f64::INFINITY).unwrap(),
        ];
        for phi in &cases {
            let l = phi.length();
            if l.is_finite() {
                let near = phi.value(l * (1.0 - 1e-12));
                assert!((near - phi.limit_at_end()).abs() < 1e-6 * near.max(1.0), "{phi:?}");
            }
            let tiny = phi.value(1e-300);
            let lim = phi.limit_at_zero();
            assert!(lim.is_infinite() || (tiny - lim).abs() < 0.05, "{phi:?}");
        }
    }
}

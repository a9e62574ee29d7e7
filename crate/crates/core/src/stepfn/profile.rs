use num::{Signed, Zero};
use serde::{Serialize, Serializer};

use super::{Piece, StepFunction};
use crate::error::{Error, Result};
use crate::rational::{format_rational, from_f64, to_f64, Extent, Measure, NumOrStr};
use crate::scalar::Scalar;

/// `f*` as `v_k` on `[t_{k-1}, t_k)` with `v_1 > v_2 > ... > v_K > 0` and zero beyond `t_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecreasingProfile<V> {
    breaks: Vec<Measure>,
    values: Vec<V>,
}

impl<V: Scalar> DecreasingProfile<V> {
    pub fn of(f: &StepFunction<V>) -> Self {
        let mut pairs: Vec<(V, &Measure)> = f
            .pieces()
            .iter()
            .filter(|p| !p.value.is_zero())
            .map(|p| (p.value.abs(), &p.measure))
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
        let mut breaks = vec![Measure::zero()];
        let mut values: Vec<V> = Vec::new();
        for (v, m) in pairs {
            let end = breaks.last().unwrap() + m;
            if values.last() == Some(&v) {
                *breaks.last_mut().unwrap() = end;
            } else {
                values.push(v);
                breaks.push(end);
            }
        }
        DecreasingProfile { breaks, values }
    }

    /// `0 = t_0 < t_1 < ... < t_K`.
    pub fn breaks(&self) -> &[Measure] {
        &self.breaks
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> &Measure {
        self.breaks.last().unwrap()
    }

    /// `f*(0+)`, the essential supremum of `|f|`.
    pub fn sup(&self) -> V {
        self.values.first().cloned().unwrap_or_else(V::zero)
    }

    /// `sum v_k (t_k - t_{k-1})`.
    pub fn area(&self) -> V {
        self.values
            .iter()
            .enumerate()
            .fold(V::zero(), |acc, (k, v)| acc + v.clone() * V::from_measure(&(&self.breaks[k + 1] - &self.breaks[k])))
    }

    /// Right-continuous `f*(t)`.
    pub fn eval(&self, t: &Measure) -> Result<V> {
        if !t.is_positive() {
            return Err(Error::domain("rearrangements are evaluated at t > 0"));
        }
        let k = self.breaks[1..].partition_point(|b| b <= t);
        Ok(self.values.get(k).cloned().unwrap_or_else(V::zero))
    }

    /// `f*(t-)`.
    pub fn left_limit(&self, t: &Measure) -> Result<V> {
        if !t.is_positive() {
            return Err(Error::domain("rearrangements are evaluated at t > 0"));
        }
        let k = self.breaks[1..].partition_point(|b| b < t);
        Ok(self.values.get(k).cloned().unwrap_or_else(V::zero))
    }

    pub fn eval_f64(&self, t: f64) -> Result<f64> {
        self.eval(&point(t)?).map(|v| v.to_f64())
    }

    pub fn left_limit_f64(&self, t: f64) -> Result<f64> {
        self.left_limit(&point(t)?).map(|v| v.to_f64())
    }

    /// The profile as an unpositioned step function on `(0, L)`.
    pub fn to_step_function(&self, length: Extent) -> Result<StepFunction<V>> {
        let pieces = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| Piece::new(v.clone(), &self.breaks[k + 1] - &self.breaks[k]))
            .collect();
        StepFunction::new(pieces, length)
    }

    pub fn scale(&self, lambda: &V) -> Self {
        if lambda.is_zero() {
            return DecreasingProfile {
                breaks: vec![Measure::zero()],
                values: Vec::new(),
            };
        }
        let l = lambda.abs();
        DecreasingProfile {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v.clone() * l.clone()).collect(),
        }
    }
}

fn point(t: f64) -> Result<Measure> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t = {t} must be positive and finite")));
    }
    from_f64(t)
}

/// `f**(t) = (C_k + v_k (t - t_{k-1})) / t` on piece `k`, `C_k` being the area of `f*` over
/// `(0, t_{k-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalProfile<V> {
    profile: DecreasingProfile<V>,
    cumulative: Vec<V>,
}

impl<V: Scalar> MaximalProfile<V> {
    pub fn from_profile(profile: DecreasingProfile<V>) -> Self {
        let mut cumulative = Vec::with_capacity(profile.len() + 1);
        let mut acc = V::zero();
        cumulative.push(acc.clone());
        for (k, v) in profile.values.iter().enumerate() {
            acc = acc + v.clone() * V::from_measure(&(&profile.breaks[k + 1] - &profile.breaks[k]));
            cumulative.push(acc.clone());
        }
        MaximalProfile { profile, cumulative }
    }

    pub fn profile(&self) -> &DecreasingProfile<V> {
        &self.profile
    }

    /// `C_1, ..., C_K, C_{K+1}`; the last entry is the total area.
    pub fn cumulative(&self) -> &[V] {
        &self.cumulative
    }

    /// `int_0^t f*`.
    pub fn integral_to(&self, t: &Measure) -> Result<V> {
        if !t.is_positive() {
            return Err(Error::domain("rearrangements are evaluated at t > 0"));
        }
        let breaks = &self.profile.breaks;
        let k = breaks[1..].partition_point(|b| b <= t);
        if k == self.profile.len() {
            return Ok(self.cumulative[k].clone());
        }
        let dt = V::from_measure(&(t - &breaks[k]));
        Ok(self.cumulative[k].clone() + self.profile.values[k].clone() * dt)
    }

    pub fn eval(&self, t: &Measure) -> Result<V> {
        Ok(self.integral_to(t)? / V::from_measure(t))
    }

    pub fn eval_f64(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("t = {t} must be positive")));
        }
        let breaks = &self.profile.breaks;
        let k = breaks[1..].partition_point(|b| to_f64(b) <= t);
        if k == self.profile.len() {
            return Ok(self.cumulative[k].to_f64() / t);
        }
        let c = self.cumulative[k].to_f64() + self.profile.values[k].to_f64() * (t - to_f64(&breaks[k]));
        Ok(c / t)
    }
}

#[derive(Serialize)]
struct RawProfile {
    breaks: Vec<String>,
    values: Vec<NumOrStr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cumulative: Option<Vec<NumOrStr>>,
}

impl<V: Scalar> Serialize for DecreasingProfile<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawProfile {
            breaks: self.breaks.iter().map(format_rational).collect(),
            values: self.values.iter().map(Scalar::to_json).collect(),
            cumulative: None,
        }
        .serialize(s)
    }
}

impl<V: Scalar> Serialize for MaximalProfile<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawProfile {
            breaks: self.profile.breaks.iter().map(format_rational).collect(),
            values: self.profile.values.iter().map(Scalar::to_json).collect(),
            cumulative: Some(self.cumulative.iter().map(Scalar::to_json).collect()),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::stepfn::Interval;
    use num::BigRational;

    fn unit() -> Extent {
        Extent::Finite(int(1))
    }

    #[test]
    fn indicator_profile() {
        let f = StepFunction::from_pairs(vec![(1.0, ratio(3, 10))], unit()).unwrap();
        let p = f.rearrangement();
        assert_eq!(p.eval_f64(0.1).unwrap(), 1.0);
        assert_eq!(p.eval(&ratio(3, 10)).unwrap(), 0.0);
        assert_eq!(p.left_limit(&ratio(3, 10)).unwrap(), 1.0);
        assert_eq!(p.eval_f64(0.9).unwrap(), 0.0);
        let m = f.maximal_rearrangement();
        assert_eq!(m.eval(&ratio(6, 10)).unwrap(), 0.5);
        assert!(p.eval(&int(0)).is_err());
    }

    #[test]
    fn ties_merge_and_signs_drop() {
        let f = StepFunction::from_pairs(
            vec![(int(-2), ratio(1, 4)), (int(2), ratio(1, 8)), (int(0), ratio(1, 8)), (int(5), ratio(1, 8))],
            unit(),
        )
        .unwrap();
        let p = f.rearrangement();
        assert_eq!(p.values(), &[int(5), int(2)]);
        assert_eq!(p.breaks(), &[int(0), ratio(1, 8), ratio(1, 2)]);
        assert_eq!(p.area(), f.l1_norm());
    }

    #[test]
    fn maximal_is_exact() {
        let f: StepFunction<BigRational> =
            StepFunction::from_pairs(vec![(int(3), ratio(1, 5)), (int(1), ratio(2, 5))], unit()).unwrap();
        let m = f.maximal_rearrangement();
        assert_eq!(m.eval(&ratio(1, 10)).unwrap(), int(3));
        // (3/5 + 1 * 1/10) / (3/10)
        assert_eq!(m.eval(&ratio(3, 10)).unwrap(), ratio(7, 3));
        assert_eq!(m.eval(&int(1)).unwrap(), ratio(1, 1));
        assert_eq!(m.cumulative(), &[int(0), ratio(3, 5), int(1)]);
        assert!((m.eval_f64(0.3).unwrap() - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_function() {
        let f = StepFunction::indicator(int(4), Interval::new(int(0), int(1)).unwrap(), unit()).unwrap();
        let m = f.maximal_rearrangement();
        for t in [ratio(1, 7), ratio(1, 2), ratio(99, 100)] {
            assert_eq!(m.eval(&t).unwrap(), int(4));
        }
    }

    #[test]
    fn idempotent_and_homogeneous() {
        let f = StepFunction::from_pairs(vec![(int(1), ratio(1, 3)), (int(-4), ratio(1, 6)), (int(2), ratio(1, 3))], unit())
            .unwrap();
        let p = f.rearrangement();
        assert_eq!(p.to_step_function(unit()).unwrap().rearrangement(), p);
        let lam = ratio(-3, 2);
        assert_eq!(f.scale(&lam).rearrangement(), p.scale(&lam));
    }
}

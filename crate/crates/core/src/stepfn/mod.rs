//! Piecewise-constant functions on `(0, L)` with exact rational measures.

mod atoms;
mod inequalities;
mod profile;

use num::{Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub use atoms::{Atomized, MAX_ORACLE_ATOMS};
pub use inequalities::{
    verify_disjoint_lower_bound, verify_rearrangement_inequalities, InequalityCheck, InequalityKind,
    InequalityReport,
};
pub use profile::{DecreasingProfile, MaximalProfile};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Extent, Measure, NumOrStr};
use crate::scalar::Scalar;

/// A half-open interval `[start, end)` of the ambient line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub start: Measure,
    pub end: Measure,
}

impl Interval {
    pub fn new(start: Measure, end: Measure) -> Result<Self> {
        if start.is_negative() || end <= start {
            return Err(Error::invalid(format!(
                "interval [{}, {}) must satisfy 0 <= start < end",
                format_rational(&start),
                format_rational(&end)
            )));
        }
        Ok(Interval { start, end })
    }

    pub fn length(&self) -> Measure {
        &self.end - &self.start
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Serialized as `["start", "end"]`.
impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq([format_rational(&self.start), format_rational(&self.end)])
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[NumOrStr; 2]>::deserialize(d)?;
        let start = a.to_rational().map_err(de::Error::custom)?;
        let end = b.to_rational().map_err(de::Error::custom)?;
        Interval::new(start, end).map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece<V> {
    pub value: V,
    pub measure: Measure,
    pub at: Option<Interval>,
}

impl<V> Piece<V> {
    pub fn new(value: V, measure: Measure) -> Self {
        Piece { value, measure, at: None }
    }

    pub fn positioned(value: V, at: Interval) -> Self {
        Piece {
            value,
            measure: at.length(),
            at: Some(at),
        }
    }
}

/// Finitely many `(value, measure)` pieces, optionally laid out as disjoint intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<V> {
    pieces: Vec<Piece<V>>,
    length: Extent,
}

impl<V: Scalar> StepFunction<V> {
    pub fn new(pieces: Vec<Piece<V>>, length: Extent) -> Result<Self> {
        let mut total = Measure::zero();
        let positioned = pieces.iter().filter(|p| p.at.is_some()).count();
        if positioned != 0 && positioned != pieces.len() {
            return Err(Error::invalid("either every piece or no piece carries a position"));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !p.measure.is_positive() {
                return Err(Error::invalid(format!("piece {i} has non-positive measure")));
            }
            if !p.value.is_finite_value() {
                return Err(Error::invalid(format!("piece {i} has a non-finite value")));
            }
            if let Some(at) = &p.at {
                if at.length() != p.measure {
                    return Err(Error::invalid(format!("piece {i}: measure disagrees with its interval")));
                }
                if !length.contains_measure(&at.end) {
                    return Err(Error::invalid(format!("piece {i} extends beyond L = {length}")));
                }
            }
            total += &p.measure;
        }
        if !length.contains_measure(&total) {
            return Err(Error::invalid(format!(
                "total measure {} exceeds L = {length}",
                format_rational(&total)
            )));
        }
        if positioned > 0 {
            let mut spans: Vec<(&Interval, usize)> =
                pieces.iter().enumerate().map(|(i, p)| (p.at.as_ref().unwrap(), i)).collect();
            spans.sort_by(|a, b| a.0.start.cmp(&b.0.start));
            for w in spans.windows(2) {
                if w[0].0.overlaps(w[1].0) {
                    return Err(Error::invalid(format!("pieces {} and {} overlap", w[0].1, w[1].1)));
                }
            }
        }
        Ok(StepFunction { pieces, length })
    }

    /// Unpositioned pieces from `(value, measure)` pairs.
    pub fn from_pairs(pairs: Vec<(V, Measure)>, length: Extent) -> Result<Self> {
        StepFunction::new(pairs.into_iter().map(|(v, m)| Piece::new(v, m)).collect(), length)
    }

    /// `c` on `[start, end)`.
    pub fn indicator(value: V, at: Interval, length: Extent) -> Result<Self> {
        StepFunction::new(vec![Piece::positioned(value, at)], length)
    }

    /// Consecutive positioned pieces `[0, m_1), [m_1, m_1 + m_2), ...`.
    pub fn laid_out(pairs: Vec<(V, Measure)>, length: Extent) -> Result<Self> {
        let mut at = Measure::zero();
        let mut pieces = Vec::with_capacity(pairs.len());
        for (v, m) in pairs {
            let end = &at + &m;
            pieces.push(Piece::positioned(v, Interval::new(at, end.clone())?));
            at = end;
        }
        StepFunction::new(pieces, length)
    }

    pub fn pieces(&self) -> &[Piece<V>] {
        &self.pieces
    }

    pub fn length(&self) -> &Extent {
        &self.length
    }

    pub fn is_positioned(&self) -> bool {
        !self.pieces.is_empty() && self.pieces[0].at.is_some()
    }

    pub fn total_measure(&self) -> Measure {
        self.pieces.iter().map(|p| &p.measure).sum()
    }

    /// `sum |value| * measure`.
    pub fn l1_norm(&self) -> V {
        self.pieces
            .iter()
            .fold(V::zero(), |acc, p| acc + p.value.abs() * V::from_measure(&p.measure))
    }

    pub fn scale(&self, lambda: &V) -> Self {
        StepFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    value: p.value.clone() * lambda.clone(),
                    measure: p.measure.clone(),
                    at: p.at.clone(),
                })
                .collect(),
            length: self.length.clone(),
        }
    }

    /// Value at a point for positioned functions; zero off the support.
    pub fn value_at(&self, x: &Measure) -> Result<V> {
        if !self.is_positioned() && !self.pieces.is_empty() {
            return Err(Error::precondition("point evaluation needs positioned pieces"));
        }
        Ok(self
            .pieces
            .iter()
            .find(|p| {
                let at = p.at.as_ref().unwrap();
                at.start <= *x && *x < at.end
            })
            .map(|p| p.value.clone())
            .unwrap_or_else(V::zero))
    }

    /// Pointwise sum of two positioned functions on the same `(0, L)`.
    pub fn add(&self, other: &StepFunction<V>) -> Result<Self> {
        if self.length != other.length {
            return Err(Error::precondition("summands live on different intervals"));
        }
        for f in [self, other] {
            if !f.pieces.is_empty() && !f.is_positioned() {
                return Err(Error::precondition("pointwise sums need positioned pieces"));
            }
        }
        let spans = |f: &StepFunction<V>| {
            let mut v: Vec<(Interval, V)> =
                f.pieces.iter().map(|p| (p.at.clone().unwrap(), p.value.clone())).collect();
            v.sort_by(|a, b| a.0.start.cmp(&b.0.start));
            v
        };
        let parts = [spans(self), spans(other)];
        let mut cuts: Vec<Measure> = parts
            .iter()
            .flatten()
            .flat_map(|(iv, _)| [iv.start.clone(), iv.end.clone()])
            .collect();
        cuts.sort();
        cuts.dedup();
        let mut cursor = [0usize; 2];
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mut value = V::zero();
            let mut covered = false;
            for (side, spans) in parts.iter().enumerate() {
                while cursor[side] < spans.len() && spans[cursor[side]].0.end <= *a {
                    cursor[side] += 1;
                }
                if let Some((iv, v)) = spans.get(cursor[side]) {
                    if iv.start <= *a && *b <= iv.end {
                        value = value + v.clone();
                        covered = true;
                    }
                }
            }
            if covered {
                pieces.push(Piece::positioned(value, Interval::new(a.clone(), b.clone())?));
            }
        }
        StepFunction::new(pieces, self.length.clone())
    }

    pub fn rearrangement(&self) -> DecreasingProfile<V> {
        DecreasingProfile::of(self)
    }

    pub fn maximal_rearrangement(&self) -> MaximalProfile<V> {
        MaximalProfile::from_profile(self.rearrangement())
    }

    pub fn to_f64(&self) -> StepFunction<f64> {
        StepFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    value: p.value.to_f64(),
                    measure: p.measure.clone(),
                    at: p.at.clone(),
                })
                .collect(),
            length: self.length.clone(),
        }
    }
}

/// Concatenates functions with pairwise disjoint positioned supports.
pub fn disjoint_sum<V: Scalar>(fs: &[StepFunction<V>]) -> Result<StepFunction<V>> {
    let Some(first) = fs.first() else {
        return Err(Error::invalid("disjoint_sum needs at least one function"));
    };
    let mut spans: Vec<(&Interval, usize)> = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        if f.length != first.length {
            return Err(Error::precondition(format!("function {i} lives on a different interval")));
        }
        if !f.pieces.is_empty() && !f.is_positioned() {
            return Err(Error::precondition(format!("function {i} has no positions")));
        }
        spans.extend(f.pieces.iter().map(|p| (p.at.as_ref().unwrap(), i)));
    }
    spans.sort_by(|a, b| a.0.start.cmp(&b.0.start));
    // the span reaching furthest so far, with its owner
    let mut reach: Option<(&Interval, usize)> = None;
    for &(iv, owner) in &spans {
        if let Some((prev, prev_owner)) = reach {
            if prev.overlaps(iv) {
                return Err(Error::Overlap {
                    first: prev_owner.min(owner),
                    second: prev_owner.max(owner),
                });
            }
        }
        if reach.is_none_or(|(prev, _)| iv.end > prev.end) {
            reach = Some((iv, owner));
        }
    }
    let pieces = fs.iter().flat_map(|f| f.pieces.iter().cloned()).collect();
    StepFunction::new(pieces, first.length.clone())
}

#[derive(Serialize, Deserialize)]
struct RawPiece {
    value: NumOrStr,
    #[serde(with = "crate::rational::measure_serde")]
    measure: Measure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    at: Option<[NumOrStr; 2]>,
}

#[derive(Serialize, Deserialize)]
struct RawStep {
    pieces: Vec<RawPiece>,
    #[serde(rename = "L")]
    length: Extent,
}

impl<V: Scalar> Serialize for StepFunction<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawStep {
            pieces: self
                .pieces
                .iter()
                .map(|p| RawPiece {
                    value: p.value.to_json(),
                    measure: p.measure.clone(),
                    at: p.at.as_ref().map(|iv| {
                        [NumOrStr::Str(format_rational(&iv.start)), NumOrStr::Str(format_rational(&iv.end))]
                    }),
                })
                .collect(),
            length: self.length.clone(),
        };
        raw.serialize(s)
    }
}

impl<'de, V: Scalar> Deserialize<'de> for StepFunction<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawStep::deserialize(d)?;
        let convert = || -> Result<Self> {
            let mut pieces = Vec::with_capacity(raw.pieces.len());
            for p in raw.pieces {
                let value = V::from_json(&p.value)?;
                let at = match p.at {
                    Some([a, b]) => Some(Interval::new(a.to_rational()?, b.to_rational()?)?),
                    None => None,
                };
                pieces.push(Piece { value, measure: p.measure, at });
            }
            StepFunction::new(pieces, raw.length)
        };
        convert().map_err(de::Error::custom)
    }
}

//! Grid-plus-golden-section suprema over open intervals.
//!
//! Every supremum over a continuum in this crate funnels through [`sup_open`]. The interval is
//! split at caller-supplied knots, each piece is sampled (geometrically when it spans several
//! octaves), and the three best samples seed golden-section refinement down to `tol_rel`.
//! Open endpoints are never evaluated; callers pass their one-sided limits explicitly.

use serde::{Deserialize, Serialize};

use crate::policy::NumericPolicy;

/// Octaves used to approach an open endpoint at `0` or `+inf`.
pub const APPROACH_OCTAVES: i32 = 60;

const MAX_GOLDEN_STEPS: usize = 200;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Where a supremum is attained, or the one-sided limit that realises it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t", rename_all = "snake_case")]
pub enum Attainment {
    At(f64),
    LeftLimit(f64),
    ZeroLimit,
    EndLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub at: Attainment,
}

impl Extremum {
    pub fn new(value: f64, at: Attainment) -> Self {
        Extremum { value, at }
    }

    fn neg_infinity() -> Self {
        Extremum::new(f64::NEG_INFINITY, Attainment::ZeroLimit)
    }

    fn offer(&mut self, value: f64, at: Attainment) {
        // NaN never compares greater, so it is never recorded
        if value > self.value {
            *self = Extremum::new(value, at);
        }
    }
}

/// `n` sample points covering `[a, b]` inclusive.
pub fn sample_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    debug_assert!(a <= b);
    if n < 2 || a == b {
        return vec![a];
    }
    let geometric = a > 0.0 && b / a > 4.0;
    let mut pts: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            if geometric {
                (a.ln() + s * (b.ln() - a.ln())).exp()
            } else {
                a + s * (b - a)
            }
        })
        .collect();
    pts[0] = a;
    pts[n - 1] = b;
    pts
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let score = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = score(c);
    let mut fd = score(d);
    for _ in 0..MAX_GOLDEN_STEPS {
        if (b - a) <= tol * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = score(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Refined supremum of `f` over the closed interval `[a, b]` (both evaluable).
pub fn sup_closed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, policy: &NumericPolicy) -> Extremum {
    let pts = sample_points(a, b, policy.grid_points_per_piece);
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
    let mut best = Extremum::neg_infinity();
    for (&x, &v) in pts.iter().zip(&vals) {
        best.offer(v, Attainment::At(x));
    }
    let mut order: Vec<usize> = (0..pts.len()).filter(|&i| !vals[i].is_nan()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    for &i in order.iter().take(3) {
        let lo = pts[i.saturating_sub(1)];
        let hi = pts[(i + 1).min(pts.len() - 1)];
        if hi > lo {
            let (x, v) = golden_max(f, lo, hi, policy.tol_rel);
            best.offer(v, Attainment::At(x));
        }
    }
    best
}

/// Supremum of `f` over the open interval `(lo, hi)`, `0 <= lo < hi <= inf`.
///
/// `knots` split the interval into pieces sampled separately. `lim_lo` / `lim_hi` are the
/// one-sided limits at the endpoints when known; they participate in the supremum and are
/// reported as [`Attainment::ZeroLimit`] (when `lo == 0`), [`Attainment::LeftLimit`] or
/// [`Attainment::EndLimit`].
pub fn sup_open<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    knots: &[f64],
    lim_lo: Option<f64>,
    lim_hi: Option<f64>,
    policy: &NumericPolicy,
) -> Extremum {
    debug_assert!(lo < hi);
    let mut cuts: Vec<f64> = knots.iter().copied().filter(|&k| k > lo && k < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut best = Extremum::neg_infinity();
    if let Some(v) = lim_lo {
        let at = if lo == 0.0 { Attainment::ZeroLimit } else { Attainment::At(lo) };
        best.offer(v, at);
    }
    if let Some(v) = lim_hi {
        let at = if hi.is_infinite() { Attainment::EndLimit } else { Attainment::LeftLimit(hi) };
        best.offer(v, at);
    }

    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(lo);
    bounds.extend(cuts);
    bounds.push(hi);
    let last = bounds.len() - 2;
    for (i, w) in bounds.windows(2).enumerate() {
        let (mut a, mut b) = (w[0], w[1]);
        if i == 0 {
            a = approach_from_right(a, b);
        }
        if i == last {
            b = approach_from_left(a, b);
        }
        if a > b {
            continue;
        }
        let e = sup_closed(f, a, b, policy);
        best.offer(e.value, e.at);
    }
    best
}

pub fn inf_open<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    knots: &[f64],
    lim_lo: Option<f64>,
    lim_hi: Option<f64>,
    policy: &NumericPolicy,
) -> Extremum {
    let neg = |x: f64| -f(x);
    let e = sup_open(&neg, lo, hi, knots, lim_lo.map(|v| -v), lim_hi.map(|v| -v), policy);
    Extremum::new(-e.value, e.at)
}

/// Closest evaluable point to an open left endpoint `a` on the way to `b`.
pub fn approach_from_right(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        let b = if b.is_finite() { b } else { 1.0 };
        b * 2f64.powi(-APPROACH_OCTAVES)
    } else {
        let b = if b.is_finite() { b } else { 2.0 * a };
        a + (b - a) * 2f64.powi(-40)
    }
}

/// Closest evaluable point to an open right endpoint `b` coming from `a`.
pub fn approach_from_left(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        a.max(1.0) * 2f64.powi(APPROACH_OCTAVES)
    } else {
        b - (b - a) * 2f64.powi(-40)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let f = |x: f64| -(x - 0.3).powi(2);
        let e = sup_closed(&f, 0.0, 1.0, &NumericPolicy::default());
        assert!(e.value.abs() < 1e-15);
        match e.at {
            Attainment::At(x) => assert!((x - 0.3).abs() < 1e-7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn open_interval_reports_limits() {
        // increasing on (0, 1): sup only as a left limit at 1
        let f = |x: f64| x;
        let e = sup_open(&f, 0.0, 1.0, &[], Some(0.0), Some(1.0), &NumericPolicy::default());
        assert_eq!(e.value, 1.0);
        assert_eq!(e.at, Attainment::LeftLimit(1.0));
        let e = inf_open(&f, 0.0, 1.0, &[], Some(0.0), Some(1.0), &NumericPolicy::default());
        assert_eq!(e.value, 0.0);
        assert_eq!(e.at, Attainment::ZeroLimit);
    }

    #[test]
    fn geometric_samples_span_octaves() {
        let pts = sample_points(1e-6, 1.0, 7);
        assert_eq!(pts[0], 1e-6);
        assert_eq!(pts[6], 1.0);
        assert!((pts[3] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn knots_split_pieces() {
        // narrow bump only visible if the knot at 0.5 is used as a piece boundary
        let f = |x: f64| if (x - 0.5).abs() < 1e-12 { 2.0 } else { 1.0 - (x - 0.5).abs() };
        let e = sup_open(&f, 0.0, 1.0, &[0.5], None, None, &NumericPolicy::default());
        assert!(e.value >= 1.0 - 1e-9);
    }
}

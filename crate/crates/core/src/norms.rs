//! `||f||_{m_phi} = sup phi f*` and `||f||_{M_phi} = sup phi f**` for step functions.
//!
//! On piece `k` of the profile `f*` is the constant `v_k`, so the `m` supremum is `v_k` times
//! the supremum of `phi` over the piece, which the knot structure makes exact. For the `M`
//! norm `phi f** = v_k phi + D_k phi / t` with `D_k >= 0`; where `phi` and `phi/t` move the
//! same way the sub-piece maximum is at an end, elsewhere it is refined numerically.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numeric::{approach_from_left, sup_closed, sup_open, Attainment, Extremum};
use crate::phi::{almost_quasiconcave_constant, delta2_constant, Fundamental, Majorant, PhiSpec, Space};
use crate::policy::NumericPolicy;
use crate::rational::to_f64;
use crate::scalar::Scalar;
use crate::stepfn::StepFunction;

/// Relative slack reported for suprema taken exactly at knots and endpoints.
pub const EXACT_TOLERANCE: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactPiece,
    RefinedSup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub attaining_t: Attainment,
    pub method: NormMethod,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl NormResult {
    fn zero() -> Self {
        NormResult {
            value: 0.0,
            attaining_t: Attainment::ZeroLimit,
            method: NormMethod::ExactPiece,
            tolerance: EXACT_TOLERANCE,
            warning: None,
        }
    }

    fn offer(&mut self, value: f64, at: Attainment) {
        if value > self.value {
            self.value = value;
            self.attaining_t = at;
        }
    }

    fn flag_infinite(mut self) -> Self {
        if !self.value.is_finite() {
            self.warning = Some("phi is unbounded against a nonvanishing rearrangement".into());
        }
        self
    }
}

/// Breakpoints of `f*` as floats, clipped to `L`.
fn float_breaks<V: Scalar>(f: &StepFunction<V>, length: f64) -> (Vec<f64>, Vec<f64>) {
    let p = f.rearrangement();
    let breaks = p.breaks().iter().map(|b| to_f64(b).min(length)).collect();
    let values = p.values().iter().map(Scalar::to_f64).collect();
    (breaks, values)
}

pub fn norm_m_phi<V: Scalar, F: Fundamental + ?Sized>(f: &StepFunction<V>, phi: &F) -> NormResult {
    let l = phi.length();
    let (breaks, values) = float_breaks(f, l);
    let mut out = NormResult::zero();
    for (k, v) in values.iter().enumerate() {
        let (a, b) = (breaks[k], breaks[k + 1]);
        if a >= b {
            continue;
        }
        let (s, at) = phi.sup_on(a, b);
        out.offer(v * s, at);
    }
    out.flag_infinite()
}

/// `phi f**` on one profile piece `[a, b)`: `v phi(t) + d phi(t) / t`.
struct PieceObjective<'a, F: ?Sized> {
    phi: &'a F,
    v: f64,
    d: f64,
}

impl<F: Fundamental + ?Sized> PieceObjective<'_, F> {
    fn at(&self, t: f64) -> f64 {
        let p = self.phi.value(t);
        self.v * p + self.d * p / t
    }

    fn at_end(&self) -> f64 {
        self.v * self.phi.limit_at_end() + self.d * self.phi.slope_at_end()
    }
}

pub fn norm_big_m_phi<V: Scalar, F: Fundamental + ?Sized>(
    f: &StepFunction<V>,
    phi: &F,
    policy: &NumericPolicy,
) -> NormResult {
    let l = phi.length();
    let profile = f.maximal_rearrangement();
    let (breaks, values) = float_breaks(f, l);
    let cumulative: Vec<f64> = profile.cumulative().iter().map(Scalar::to_f64).collect();
    let knots = phi.knots();
    let mut out = NormResult::zero();
    let mut refined = false;
    for (k, &v) in values.iter().enumerate() {
        let (a, b) = (breaks[k], breaks[k + 1]);
        if a >= b {
            continue;
        }
        if k == 0 {
            // f** = v_1 on the first piece
            let (s, at) = phi.sup_on(a, b);
            out.offer(v * s, at);
            continue;
        }
        let obj = PieceObjective {
            phi,
            v,
            d: (cumulative[k] - v * a).max(0.0),
        };
        let mut cuts = vec![a];
        cuts.extend(knots.iter().copied().filter(|&c| c > a && c < b));
        cuts.push(b);
        for w in cuts.windows(2) {
            let (c, d) = (w[0], w[1]);
            let open_end = d >= l;
            let (lo_phi, lo_slope) = (phi.value(c), phi.value(c) / c);
            let (hi_phi, hi_slope) = if open_end {
                (phi.limit_at_end(), phi.slope_at_end())
            } else {
                (phi.value(d), phi.value(d) / d)
            };
            out.offer(obj.at(c), Attainment::At(c));
            let hi = if open_end { obj.at_end() } else { obj.at(d) };
            out.offer(hi, if open_end { Attainment::EndLimit } else { Attainment::LeftLimit(d) });
            if (hi_phi >= lo_phi) != (hi_slope >= lo_slope) {
                refined = true;
                let top = if open_end { approach_from_left(c, d) } else { d };
                let g = |t: f64| obj.at(t);
                let e = sup_closed(&g, c, top, policy);
                out.offer(e.value, e.at);
            }
        }
    }
    let support = *breaks.last().unwrap();
    let total = *cumulative.last().unwrap();
    if total > 0.0 && support < l {
        let (s, at) = phi.sup_slope_on(support, l);
        out.offer(total * s, at);
    }
    if refined {
        out.method = NormMethod::RefinedSup;
        out.tolerance = policy.tol_rel;
    }
    out.flag_infinite()
}

/// `sup phi(t) f**(t)` over `(lo, hi]`, with `lo >= 0` and `hi < L`.
pub fn sup_weighted_maximal_on<V: Scalar, F: Fundamental + ?Sized>(
    f: &StepFunction<V>,
    phi: &F,
    lo: f64,
    hi: f64,
    policy: &NumericPolicy,
) -> Extremum {
    let profile = f.maximal_rearrangement();
    let g = |t: f64| phi.value(t) * profile.eval_f64(t).unwrap_or(0.0);
    let mut knots: Vec<f64> = profile.profile().breaks().iter().map(to_f64).collect();
    knots.extend(phi.knots());
    let lim_lo = (lo == 0.0).then(|| phi.limit_at_zero() * profile.profile().sup().to_f64());
    let mut e = sup_open(&g, lo, hi, &knots, lim_lo, Some(g(hi)), policy);
    if e.at == Attainment::LeftLimit(hi) {
        e.at = Attainment::At(hi);
    }
    e
}

/// Norm in either space.
pub fn norm<V: Scalar, F: Fundamental + ?Sized>(
    f: &StepFunction<V>,
    phi: &F,
    space: Space,
    policy: &NumericPolicy,
) -> NormResult {
    match space {
        Space::SmallM => norm_m_phi(f, phi),
        Space::BigM => norm_big_m_phi(f, phi, policy),
    }
}

/// `M_phi` norm of `phi` itself, with a warning when `phi` is not admissible.
pub fn norm_big_m_phi_checked<V: Scalar>(f: &StepFunction<V>, phi: &PhiSpec, policy: &NumericPolicy) -> NormResult {
    let mut r = norm_big_m_phi(f, phi, policy);
    if let Err(e) = Majorant::new(phi) {
        r.warning.get_or_insert_with(|| e.to_string());
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantIdentityReport {
    pub m_phi: f64,
    pub m_majorant: f64,
    pub big_m_phi: f64,
    pub big_m_majorant: f64,
    /// `C_phi`, when `phi` is almost quasiconcave.
    pub c_phi: Option<f64>,
    /// `||f||_{M_phi} = ||f||_{M_phi~}` within the tolerance.
    pub big_m_equal: bool,
    /// `C_phi ||f||_{m_phi~} <= ||f||_{m_phi} <= ||f||_{m_phi~}`; absent when `C_phi` is.
    pub m_sandwich: Option<bool>,
    pub tolerance: f64,
}

impl MajorantIdentityReport {
    pub fn pass(&self) -> bool {
        self.big_m_equal && self.m_sandwich.unwrap_or(true)
    }
}

/// Compares the four norms `m`/`M` against `phi`/`phi~`.
///
/// `tolerance` is the relative slack for both relations.
pub fn verify_majorant_identities<V: Scalar>(
    f: &StepFunction<V>,
    phi: &PhiSpec,
    tolerance: f64,
    policy: &NumericPolicy,
) -> Result<MajorantIdentityReport> {
    let maj = Majorant::new(phi)?;
    let m_phi = norm_m_phi(f, phi).value;
    let m_majorant = norm_m_phi(f, &maj).value;
    let big_m_phi = norm_big_m_phi(f, phi, policy).value;
    let big_m_majorant = norm_big_m_phi(f, &maj, policy).value;
    let c_phi = almost_quasiconcave_constant(phi, policy);
    let big_m_equal = (big_m_phi - big_m_majorant).abs() <= tolerance * big_m_majorant.abs();
    let m_sandwich = c_phi.map(|c| c * m_majorant <= m_phi * (1.0 + tolerance) && m_phi <= m_majorant * (1.0 + tolerance));
    Ok(MajorantIdentityReport {
        m_phi,
        m_majorant,
        big_m_phi,
        big_m_majorant,
        c_phi,
        big_m_equal,
        m_sandwich,
        tolerance,
    })
}

/// Quasi-triangle constants of the two functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasinormConstant {
    pub space: Space,
    /// `1` for `M`; the doubling constant of `phi` for `m` (infinite outside the doubling class).
    pub value: f64,
    /// `2 / C_phi` for almost quasiconcave `phi` in the `m` case.
    pub via_majorant: Option<f64>,
}

pub fn quasinorm_constant_y(phi: &PhiSpec, space: Space, policy: &NumericPolicy) -> QuasinormConstant {
    match space {
        Space::BigM => QuasinormConstant {
            space,
            value: 1.0,
            via_majorant: None,
        },
        Space::SmallM => QuasinormConstant {
            space,
            value: delta2_constant(phi, policy),
            via_majorant: almost_quasiconcave_constant(phi, policy).map(|c| 2.0 / c),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_f64, int, ratio, Extent};
    use crate::stepfn::Interval;

    fn unit() -> Extent {
        Extent::Finite(int(1))
    }

    fn p() -> NumericPolicy {
        NumericPolicy::default()
    }

    #[test]
    fn indicator_m_norm_is_phi_of_measure() {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        let f = StepFunction::from_pairs(vec![(1.0, ratio(9, 100))], unit()).unwrap();
        let r = norm_m_phi(&f, &phi);
        assert!((r.value - 0.3).abs() < 1e-15);
        assert_eq!(r.attaining_t, Attainment::LeftLimit(0.09));
        assert_eq!(r.method, NormMethod::ExactPiece);
    }

    #[test]
    fn normalised_indicator_has_unit_norms() {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        let r = 0.0625;
        let f = StepFunction::from_pairs(vec![(1.0 / phi.value(r), from_f64(r).unwrap())], unit()).unwrap();
        assert!((norm_m_phi(&f, &phi).value - 1.0).abs() < 1e-15);
        assert!((norm_big_m_phi(&f, &phi, &p()).value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_phi_gives_l1() {
        let phi = PhiSpec::power(1.0, 1.0).unwrap();
        let f = StepFunction::from_pairs(vec![(3.0, ratio(1, 5)), (-1.0, ratio(1, 4)), (0.5, ratio(1, 10))], unit()).unwrap();
        let r = norm_big_m_phi(&f, &phi, &p());
        assert!((r.value - f.l1_norm()).abs() < 1e-14);
    }

    #[test]
    fn constant_phi_gives_sup() {
        let phi = PhiSpec::power(0.0, 1.0).unwrap();
        let f = StepFunction::from_pairs(vec![(3.0, ratio(1, 5)), (7.0, ratio(1, 4))], unit()).unwrap();
        assert_eq!(norm_m_phi(&f, &phi).value, 7.0);
        assert!((norm_big_m_phi(&f, &phi, &p()).value - 7.0).abs() < 1e-15);
    }

    #[test]
    fn big_m_matches_dense_grid() {
        let phi = PhiSpec::power_log(0.5, 1.0, 1.0).unwrap();
        let f = StepFunction::from_pairs(vec![(3.0, ratio(1, 50)), (1.0, ratio(1, 5)), (0.25, ratio(1, 2))], unit()).unwrap();
        let r = norm_big_m_phi(&f, &phi, &p());
        let m = f.maximal_rearrangement();
        let n = 200_000;
        let grid = (1..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                phi.value(t) * m.eval_f64(t).unwrap()
            })
            .fold(0.0, f64::max);
        assert!(r.value >= grid * (1.0 - 1e-12));
        assert!(r.value <= grid * (1.0 + 1e-6));
    }

    #[test]
    fn infinite_length_tail() {
        let phi = PhiSpec::power(0.5, f64::INFINITY).unwrap();
        let f = StepFunction::indicator(1.0, Interval::new(int(0), int(4)).unwrap(), Extent::Infinite).unwrap();
        assert!((norm_big_m_phi(&f, &phi, &p()).value - 2.0).abs() < 1e-15);
        let bad = PhiSpec::power(2.0, f64::INFINITY).unwrap();
        let r = norm_big_m_phi_checked(&f, &bad, &p());
        assert!(r.value.is_infinite());
        assert!(r.warning.is_some());
    }

    #[test]
    fn identities_for_square() {
        let phi = PhiSpec::power(2.0, 1.0).unwrap();
        let f = StepFunction::from_pairs(vec![(2.0, ratio(1, 3)), (1.0, ratio(1, 3))], unit()).unwrap();
        let rep = verify_majorant_identities(&f, &phi, 1e-9, &p()).unwrap();
        assert!(rep.big_m_equal);
        assert_eq!(rep.m_sandwich, None);
        assert!(rep.pass());
    }

    #[test]
    fn quasinorm_constants() {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        assert_eq!(quasinorm_constant_y(&phi, Space::BigM, &p()).value, 1.0);
        let m = quasinorm_constant_y(&phi, Space::SmallM, &p());
        assert!((m.value - 2f64.sqrt()).abs() < 1e-9);
        assert!((m.via_majorant.unwrap() - 2.0).abs() < 1e-12);
    }
}

//! Numerical classification of a fundamental function and the derived constants used by the
//! norm and noncompactness modules.
//!
//! Behaviour at `0+` and at `L-` always comes from the family asymptotics on [`PhiSpec`];
//! sampling only ever covers the interior.

use serde::{Deserialize, Serialize};

use super::{Fundamental, Majorant, PhiSpec, Space};
use crate::error::{Error, Result};
use crate::numeric::{approach_from_left, approach_from_right, inf_open, sample_points, sup_open};
use crate::policy::NumericPolicy;

/// Outcome of a property check run at two resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Yes,
    No,
    /// The two resolutions disagreed.
    Inconclusive,
}

impl Check {
    fn from_pair(coarse: bool, fine: bool) -> Self {
        match (coarse, fine) {
            (true, true) => Check::Yes,
            (false, false) => Check::No,
            _ => Check::Inconclusive,
        }
    }

    fn and(self, other: Check) -> Check {
        match (self, other) {
            (Check::No, _) | (_, Check::No) => Check::No,
            (Check::Yes, Check::Yes) => Check::Yes,
            _ => Check::Inconclusive,
        }
    }

    pub fn holds(self) -> bool {
        self == Check::Yes
    }
}

/// `lim_{t -> 0+} t / phi(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ZeroLimit {
    Zero,
    PositiveFinite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiClassification {
    pub is_nondecreasing: Check,
    pub is_quasiconcave: Check,
    pub is_admissible: bool,
    /// `sup phi(2t)/phi(t)` over `(0, L/2)`; may be infinite.
    pub delta2_constant: f64,
    /// The same supremum restricted to a small neighbourhood of zero.
    pub delta2_near_zero_constant: f64,
    /// `inf phi / phi~`, present when admissible and positive.
    pub almost_quasiconcave_constant: Option<f64>,
    pub limit_t_over_phi: ZeroLimit,
}

fn le_tol(a: f64, b: f64, tol: f64) -> bool {
    if a <= b {
        return true;
    }
    a.is_finite() && b.is_finite() && a - b <= tol * a.abs().max(b.abs())
}

/// Samples `g` along `(0, L)` piece by piece, bracketed by its one-sided limits, and checks
/// the sequence is monotone in the requested direction.
#[allow(clippy::too_many_arguments)]
fn monotone_on_domain<G: Fn(f64) -> f64>(
    g: &G,
    length: f64,
    knots: &[f64],
    lim_lo: f64,
    lim_hi: f64,
    increasing: bool,
    grid: usize,
    tol: f64,
) -> bool {
    let mut bounds = vec![0.0];
    bounds.extend(knots.iter().copied().filter(|&k| k > 0.0 && k < length));
    bounds.push(length);
    let mut seq = vec![lim_lo];
    let last = bounds.len() - 2;
    for (i, w) in bounds.windows(2).enumerate() {
        let mut a = w[0];
        let mut b = w[1];
        if i == 0 {
            a = approach_from_right(a, b);
        }
        if i == last {
            b = approach_from_left(a, b);
        }
        seq.extend(sample_points(a, b, grid).into_iter().map(g));
    }
    seq.push(lim_hi);
    seq.windows(2).all(|w| {
        if increasing {
            le_tol(w[0], w[1], tol)
        } else {
            le_tol(w[1], w[0], tol)
        }
    })
}

fn nondecreasing(phi: &PhiSpec, grid: usize, tol: f64) -> bool {
    let v = |t: f64| phi.value(t);
    monotone_on_domain(&v, phi.length(), &phi.knots(), phi.limit_at_zero(), phi.limit_at_end(), true, grid, tol)
}

fn slope_nonincreasing(phi: &PhiSpec, grid: usize, tol: f64) -> bool {
    let v = |t: f64| phi.value(t) / t;
    monotone_on_domain(&v, phi.length(), &phi.knots(), phi.slope_at_zero(), phi.slope_at_end(), false, grid, tol)
}

/// Knots of `phi` together with their images under `t -> t / a`, clipped to `(0, hi)`.
fn scaled_knots(phi: &PhiSpec, a: f64, hi: f64) -> Vec<f64> {
    let k = phi.knots();
    let mut out: Vec<f64> = k.iter().copied().chain(k.iter().map(|x| x / a)).filter(|&x| x > 0.0 && x < hi).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `lim_{t -> hi-} phi(a t) / phi(t)` where `hi = L / a`.
fn dilation_ratio_at_end(phi: &PhiSpec, a: f64) -> f64 {
    let l = phi.length();
    if l.is_finite() {
        phi.limit_at_end() / phi.value(l / a)
    } else {
        phi.ratio_limit_at_infinity(a)
    }
}

/// `sup_{0 < t < L/2} phi(2t) / phi(t)`.
pub fn delta2_constant(phi: &PhiSpec, policy: &NumericPolicy) -> f64 {
    let hi = phi.length() / 2.0;
    let ratio = |t: f64| phi.value(2.0 * t) / phi.value(t);
    let knots = scaled_knots(phi, 2.0, hi);
    sup_open(
        &ratio,
        0.0,
        hi,
        &knots,
        Some(phi.ratio_limit_at_zero(2.0)),
        Some(dilation_ratio_at_end(phi, 2.0)),
        policy,
    )
    .value
}

/// `sup phi(2t)/phi(t)` over `(0, t0)` with `t0 = min(L/2, 1) * 2^-16`.
pub fn delta2_near_zero_constant(phi: &PhiSpec, policy: &NumericPolicy) -> f64 {
    let hi = (phi.length() / 2.0).min(1.0) * 2f64.powi(-16);
    let ratio = |t: f64| phi.value(2.0 * t) / phi.value(t);
    let knots = scaled_knots(phi, 2.0, hi);
    sup_open(&ratio, 0.0, hi, &knots, Some(phi.ratio_limit_at_zero(2.0)), Some(ratio(hi)), policy).value
}

/// `C_phi = inf_{(0,L)} phi / phi~` when `phi` is admissible and the infimum is positive.
pub fn almost_quasiconcave_constant(phi: &PhiSpec, policy: &NumericPolicy) -> Option<f64> {
    let maj = Majorant::new(phi).ok()?;
    let ratio = |t: f64| phi.value(t) / maj.value(t);
    let l = phi.length();
    let end_phi = phi.limit_at_end();
    let end_maj = maj.limit_at_end();
    let lim_hi = if end_phi.is_finite() && end_maj.is_finite() && end_maj > 0.0 {
        Some(end_phi / end_maj)
    } else {
        None
    };
    let e = inf_open(&ratio, 0.0, l, &phi.knots(), Some(maj.base_ratio_at_zero()), lim_hi, policy);
    let c = e.value.min(1.0);
    (c > 0.0 && c.is_finite()).then_some(c)
}

pub fn classify_phi(phi: &PhiSpec, policy: &NumericPolicy) -> Result<PhiClassification> {
    policy.validate()?;
    let g = policy.grid_points_per_piece;
    let tol = policy.tol_rel;
    let is_nondecreasing = Check::from_pair(nondecreasing(phi, g, tol), nondecreasing(phi, 2 * g, tol));
    let slope = Check::from_pair(slope_nonincreasing(phi, g, tol), slope_nonincreasing(phi, 2 * g, tol));
    let s0 = phi.slope_at_zero();
    let limit_t_over_phi = if s0.is_infinite() {
        ZeroLimit::Zero
    } else if s0 > 0.0 {
        ZeroLimit::PositiveFinite(1.0 / s0)
    } else {
        ZeroLimit::Infinite
    };
    Ok(PhiClassification {
        is_nondecreasing,
        is_quasiconcave: is_nondecreasing.and(slope),
        is_admissible: Majorant::new(phi).is_ok(),
        delta2_constant: delta2_constant(phi, policy),
        delta2_near_zero_constant: delta2_near_zero_constant(phi, policy),
        almost_quasiconcave_constant: almost_quasiconcave_constant(phi, policy),
        limit_t_over_phi,
    })
}

/// `inf_{0 < t < L/a} phi(a t) / phi(t)` for `a > 1`.
pub fn not_too_constant_margin(phi: &PhiSpec, a: f64, policy: &NumericPolicy) -> Result<f64> {
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::invalid(format!("dilation factor must exceed 1, got {a}")));
    }
    let hi = phi.length() / a;
    let ratio = |t: f64| phi.value(a * t) / phi.value(t);
    let knots = scaled_knots(phi, a, hi);
    let e = inf_open(
        &ratio,
        0.0,
        hi,
        &knots,
        Some(phi.ratio_limit_at_zero(a)),
        Some(dilation_ratio_at_end(phi, a)),
        policy,
    );
    Ok(e.value)
}

/// `sup_{0 < t < L} phi(t) / phi(theta t)` for `0 < theta < 1`.
pub fn dilation_sup(phi: &PhiSpec, theta: f64, policy: &NumericPolicy) -> f64 {
    let a = 1.0 / theta;
    let l = phi.length();
    let ratio = |t: f64| phi.value(t) / phi.value(theta * t);
    let mut knots: Vec<f64> = phi.knots().into_iter().flat_map(|k| [k, k * a]).filter(|&k| k < l).collect();
    knots.sort_by(f64::total_cmp);
    let lim_hi = if l.is_finite() {
        phi.limit_at_end() / phi.value(theta * l)
    } else {
        phi.ratio_limit_at_infinity(a)
    };
    sup_open(&ratio, 0.0, l, &knots, Some(phi.ratio_limit_at_zero(a)), Some(lim_hi), policy).value
}

/// Number of dilations `theta_j = 1 - 2^-j` tried by [`dilation_condition_value`].
pub const DILATION_STEPS: i32 = 40;

/// `inf_theta sup_t phi(t) / phi(theta t)` over `theta_j = 1 - 2^-j`, `j = 1..=40`.
pub fn dilation_condition_value(phi: &PhiSpec, policy: &NumericPolicy) -> f64 {
    let mut best = f64::INFINITY;
    for j in 1..=DILATION_STEPS {
        let theta = 1.0 - 2f64.powi(-j);
        best = best.min(dilation_sup(phi, theta, policy));
        if best <= 1.0 {
            break;
        }
    }
    best
}

/// Inputs to the witness-size threshold of the general lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaQuery {
    pub space: Space,
    pub eps: f64,
    pub tau: f64,
    pub s_measure: f64,
    pub centers: u64,
    pub norm_t: f64,
    pub r: f64,
    /// `C_phi`; required for the `m` space.
    pub c_phi: Option<f64>,
}

/// Witness coefficients must reach this size for the distance argument to close.
///
/// * `m`: `2 (|T| + r) / (C_phi^2 eps phi~(eps tau mu(S) / k))`
/// * `M`: `(|T| + r) / (eps phi~(tau mu(S) / k))`
///
/// multiplied by `1 + tol_rel`.
pub fn sigma_threshold(phi: &PhiSpec, q: &SigmaQuery, policy: &NumericPolicy) -> Result<f64> {
    if !(q.eps > 0.0 && q.eps < 1.0) {
        return Err(Error::precondition(format!("eps must lie in (0, 1), got {}", q.eps)));
    }
    if !(q.tau > 0.0 && q.s_measure > 0.0 && q.centers >= 1) {
        return Err(Error::precondition("tau, mu(S) and the center count must be positive"));
    }
    if !(q.r >= 0.0 && q.r < q.norm_t) {
        return Err(Error::precondition(format!("need 0 <= r < |T|, got r = {}, |T| = {}", q.r, q.norm_t)));
    }
    let maj = Majorant::new(phi)?;
    let at = |t: f64| if t < phi.length() { maj.value(t) } else { maj.limit_at_end() };
    let base = q.tau * q.s_measure / q.centers as f64;
    let sigma = match q.space {
        Space::SmallM => {
            let c = q
                .c_phi
                .filter(|c| *c > 0.0)
                .ok_or_else(|| Error::precondition("the m space needs a positive almost-quasiconcavity constant"))?;
            2.0 * (q.norm_t + q.r) / (c * c * q.eps * at(q.eps * base))
        }
        Space::BigM => (q.norm_t + q.r) / (q.eps * at(base)),
    };
    Ok(sigma * (1.0 + policy.tol_rel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> NumericPolicy {
        NumericPolicy::default()
    }

    #[test]
    fn sqrt_is_quasiconcave() {
        let c = classify_phi(&PhiSpec::power(0.5, 1.0).unwrap(), &policy()).unwrap();
        assert_eq!(c.is_nondecreasing, Check::Yes);
        assert_eq!(c.is_quasiconcave, Check::Yes);
        assert!(c.is_admissible);
        assert!((c.delta2_constant - 2f64.sqrt()).abs() < 1e-9);
        assert!((c.almost_quasiconcave_constant.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(c.limit_t_over_phi, ZeroLimit::Zero);
    }

    #[test]
    fn identity_has_positive_limit() {
        let c = classify_phi(&PhiSpec::power(1.0, 1.0).unwrap(), &policy()).unwrap();
        assert_eq!(c.limit_t_over_phi, ZeroLimit::PositiveFinite(1.0));
        assert_eq!(c.is_quasiconcave, Check::Yes);
    }

    #[test]
    fn square_is_not_quasiconcave() {
        let c = classify_phi(&PhiSpec::power(2.0, 1.0).unwrap(), &policy()).unwrap();
        assert_eq!(c.is_nondecreasing, Check::Yes);
        assert_eq!(c.is_quasiconcave, Check::No);
        assert!(c.is_admissible);
        assert_eq!(c.almost_quasiconcave_constant, None);
        assert_eq!(c.limit_t_over_phi, ZeroLimit::Infinite);
        assert!((c.delta2_constant - 4.0).abs() < 1e-9);
    }

    #[test]
    fn bump_is_almost_quasiconcave() {
        let phi = PhiSpec::power_log(0.5, 1.0, 1.0).unwrap();
        let c = classify_phi(&phi, &policy()).unwrap();
        assert_eq!(c.is_nondecreasing, Check::No);
        let cphi = c.almost_quasiconcave_constant.unwrap();
        // the infimum sits at L-: log 2 against the peak value 2^(1/2) * 2 / e
        let peak_t = 2.0 * (-2.0f64).exp();
        let expected = std::f64::consts::LN_2 / phi.value(peak_t);
        assert!((cphi - expected).abs() < 1e-12, "{cphi} vs {expected}");
    }

    #[test]
    fn margin_and_dilation_for_powers() {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        let m = not_too_constant_margin(&phi, 4.0, &policy()).unwrap();
        assert!((m - 2.0).abs() < 1e-9);
        assert!(not_too_constant_margin(&phi, 1.0, &policy()).is_err());
        let d = dilation_condition_value(&phi, &policy());
        assert!((1.0..1.0 + 1e-9).contains(&d));
        // constant phi never grows
        let flat = PhiSpec::power(0.0, 1.0).unwrap();
        assert!((not_too_constant_margin(&flat, 8.0, &policy()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_threshold_formulas() {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        let mut q = SigmaQuery {
            space: Space::BigM,
            eps: 0.5,
            tau: 0.25,
            s_measure: 1.0,
            centers: 4,
            norm_t: 2.0,
            r: 1.0,
            c_phi: Some(1.0),
        };
        let p = policy();
        let s = sigma_threshold(&phi, &q, &p).unwrap();
        let expect = 3.0 / (0.5 * (0.25f64 / 4.0).sqrt()) * (1.0 + p.tol_rel);
        assert!((s - expect).abs() < 1e-12 * expect);
        q.space = Space::SmallM;
        let s = sigma_threshold(&phi, &q, &p).unwrap();
        let expect = 6.0 / (0.5 * (0.5f64 * 0.25 / 4.0).sqrt()) * (1.0 + p.tol_rel);
        assert!((s - expect).abs() < 1e-12 * expect);
        q.c_phi = None;
        assert!(sigma_threshold(&phi, &q, &p).is_err());
        q.space = Space::BigM;
        q.r = 2.0;
        assert!(sigma_threshold(&phi, &q, &p).is_err());
    }
}

//! Lower bound from equimeasurable extremals with small disjoint supports, and the parameter
//! choices its contradiction argument runs on.

use serde::{Deserialize, Serialize};

use super::{NamedCheck, TraceRow, Verdict};
use crate::error::{Error, Result};
use crate::norms::norm;
use crate::phi::{
    delta2_constant, dilation_condition_value, dilation_sup, not_too_constant_margin, Fundamental, Majorant, PhiSpec,
    Space, DILATION_STEPS,
};
use crate::policy::NumericPolicy;
use crate::rational::to_f64;
use crate::stepfn::{disjoint_sum, Piece, StepFunction};
use crate::Error as CrateError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltCertificate {
    pub lambda: f64,
    pub norm_t: f64,
    /// Cap on the support measure of each member.
    pub a: f64,
    pub space: Space,
    pub phi: PhiSpec,
    /// The images `T f_j`, positioned.
    pub members: Vec<StepFunction<f64>>,
}

/// Dilation factors `2^{4j}`, `j = 1..=10`, at which the growth of `phi` is sampled.
const GROWTH_SAMPLES: i32 = 10;

/// Margins `inf phi(a t) / phi(t)` at `a = 16, 256, ...`; growth means strictly increasing with
/// at least a doubling overall.
fn growth_margins(phi: &PhiSpec, policy: &NumericPolicy) -> Result<Vec<f64>> {
    (1..=GROWTH_SAMPLES)
        .map(|j| not_too_constant_margin(phi, 2f64.powi(4 * j), policy))
        .collect()
}

fn grows(margins: &[f64]) -> bool {
    margins.windows(2).all(|w| w[1] > w[0]) && margins.last().unwrap_or(&0.0) >= &(2.0 * margins[0])
}

/// Drops zero-valued pieces, so that overlap checks see supports only.
fn support_part(f: &StepFunction<f64>) -> Result<StepFunction<f64>> {
    let pieces: Vec<Piece<f64>> = f.pieces().iter().filter(|p| p.value != 0.0).cloned().collect();
    StepFunction::new(pieces, f.length().clone())
}

/// Index pair of the first two members whose supports meet, if any.
pub(crate) fn support_overlap(members: &[StepFunction<f64>]) -> Result<Option<(usize, usize)>> {
    let parts = members.iter().map(support_part).collect::<Result<Vec<_>>>()?;
    for (i, f) in parts.iter().enumerate() {
        if !f.pieces().is_empty() && !f.is_positioned() {
            return Err(Error::precondition(format!("member {i} has no positions")));
        }
    }
    match disjoint_sum(&parts) {
        Ok(_) => Ok(None),
        Err(CrateError::Overlap { first, second }) => Ok(Some((first, second))),
        Err(e) => Err(e),
    }
}

/// PASS certifies `alpha(T) >= lambda` for the attested family.
pub fn alt_certificate_check(cert: &AltCertificate, policy: &NumericPolicy) -> Result<Verdict> {
    policy.validate()?;
    let mut v = Verdict::new(cert.lambda);
    let tol = policy.tol_rel;
    if !v.require(cert.lambda > 0.0 && cert.lambda < cert.norm_t, "lambda_range", None, || {
        format!("need 0 < lambda < |T|, got lambda = {}, |T| = {}", cert.lambda, cert.norm_t)
    }) || !v.require(cert.members.len() >= 2, "family_size", None, || {
        format!("need at least two members, got {}", cert.members.len())
    }) {
        return Ok(v);
    }

    let margins = growth_margins(&cert.phi, policy)?;
    let mut growth = TraceRow::new("growth");
    for (j, m) in margins.iter().enumerate() {
        growth.set(&format!("a=2^{}", 4 * (j + 1)), *m);
    }
    v.trace.push(growth);
    if !v.require(grows(&margins), "not_too_constant", None, || {
        format!("phi(at)/phi(t) does not grow with a: margins {margins:?}")
    }) {
        return Ok(v);
    }
    match cert.space {
        Space::SmallM => {
            let d2 = delta2_constant(&cert.phi, policy);
            let dil = dilation_condition_value(&cert.phi, policy);
            v.trace.push(TraceRow::new("phi").with("delta2", d2).with("dilation", dil));
            if !v.require(d2.is_finite(), "delta2", None, || "phi is not in Delta_2".to_string())
                || !v.require(dil <= 1.0 + tol, "dilation", None, || {
                    format!("inf_theta sup phi(t)/phi(theta t) = {dil} exceeds 1")
                })
            {
                return Ok(v);
            }
        }
        Space::BigM => {
            if !v.require(Majorant::new(&cert.phi).is_ok(), "admissible", None, || {
                "phi is not admissible".to_string()
            }) {
                return Ok(v);
            }
        }
    }

    if let Some((i, j)) = support_overlap(&cert.members)? {
        v.fail("disjoint_supports", Some(j), format!("supports of members {i} and {j} meet"));
        return Ok(v);
    }
    let profiles: Vec<_> = cert.members.iter().map(|f| f.rearrangement()).collect();
    for (j, p) in profiles.iter().enumerate() {
        let support = to_f64(p.support());
        if !v.require(support <= cert.a, "small_support", Some(j), || {
            format!("member {j} has support measure {support} > a = {}", cert.a)
        }) {
            return Ok(v);
        }
    }
    for (j, p) in profiles.iter().enumerate().skip(1) {
        if !v.require(*p == profiles[0], "equimeasurable", Some(j), || {
            format!("member {j} is not equimeasurable with member 0")
        }) {
            return Ok(v);
        }
    }
    let mut norms = TraceRow::new("extremality");
    for (j, f) in cert.members.iter().enumerate() {
        let y = norm(f, &cert.phi, cert.space, policy).value;
        norms.set(&format!("member_{j}"), y);
        if !v.require(y >= cert.lambda * (1.0 - tol), "extremality", Some(j), || {
            format!("|T f_{j}|_Y = {y} < lambda = {}", cert.lambda)
        }) {
            break;
        }
    }
    v.trace.push(norms);
    Ok(v)
}

/// Which branch of the argument applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AltCase {
    /// `m`, or `M` on an infinite interval.
    C1,
    /// `M`, finite `L`, and `phi~(t)/t` keeps strictly increasing as `t -> 0`.
    C2,
    /// `M`, finite `L`, and `phi~` is linear on some `(0, alpha0)`.
    C3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltWitnessParams {
    pub space: Space,
    pub case: AltCase,
    pub norm_t: f64,
    pub lambda: f64,
    pub m_centers: u64,
    pub r: f64,
    pub eps: f64,
    pub theta: f64,
    /// Quasinorm constant of `Y`: the doubling constant for `m`, 1 for `M`.
    pub c: f64,
    /// Witnesses per center, `N`.
    pub n: u64,
    pub gamma: f64,
    /// Support cap.
    pub a: f64,
    /// Family size `m N`.
    pub big_m: u64,
    /// `2 C |T| / eps`.
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
}

/// Largest `N` tried.
const MAX_N: u64 = 1 << 40;

/// Dyadic steps scanned for `alpha0` and `beta0`.
const SCAN_STEPS: i32 = 60;

/// Relative tolerance for deciding that `phi~(t)/t` equals its limit at zero.
const LINEAR_TOL: f64 = 1e-12;

fn slope(maj: &Majorant, t: f64) -> f64 {
    maj.value(t) / t
}

/// `alpha0` with `phi~` linear on `(0, alpha0)`, if the dyadic scan finds one.
fn linear_start(maj: &Majorant) -> Option<f64> {
    let s0 = maj.slope_at_zero();
    if !s0.is_finite() {
        return None;
    }
    let l = maj.length();
    (1..=SCAN_STEPS)
        .map(|i| l * 2f64.powi(-i))
        .find(|&t| (slope(maj, t) - s0).abs() <= LINEAR_TOL * s0)
}

fn detect_case(space: Space, maj: &Majorant) -> (AltCase, Option<f64>) {
    if space == Space::SmallM || maj.length().is_infinite() {
        return (AltCase::C1, None);
    }
    match linear_start(maj) {
        Some(alpha0) => (AltCase::C3, Some(alpha0)),
        None => (AltCase::C2, None),
    }
}

fn theta_for(phi: &PhiSpec, space: Space, r: f64, eps: f64, policy: &NumericPolicy) -> Result<f64> {
    if space == Space::BigM {
        return Ok(0.0);
    }
    (1..=DILATION_STEPS)
        .map(|j| 1.0 - 2f64.powi(-j))
        .find(|&th| dilation_sup(phi, th, policy) <= 1.0 + eps / r)
        .ok_or_else(|| {
            Error::NoConvergence(format!(
                "no theta = 1 - 2^-j, j <= {DILATION_STEPS}, brings sup phi(t)/phi(theta t) below 1 + eps/r"
            ))
        })
}

/// Smallest `N` (by doubling and bisection) with `inf phi(N(1-theta) t)/phi(t) > threshold`.
fn smallest_n(phi: &PhiSpec, theta: f64, threshold: f64, policy: &NumericPolicy) -> Result<u64> {
    let scale = 1.0 - theta;
    let lo_n = ((1.0 / scale).floor() as u64 + 1).max(2);
    let ok = |n: u64| -> Result<bool> { Ok(not_too_constant_margin(phi, n as f64 * scale, policy)? > threshold) };
    if ok(lo_n)? {
        return Ok(lo_n);
    }
    let mut bad = lo_n;
    let mut good = lo_n * 2;
    while !ok(good)? {
        if good >= MAX_N {
            return Err(Error::NoConvergence(format!(
                "phi(N(1-theta)t)/phi(t) stays below {threshold} up to N = 2^40"
            )));
        }
        bad = good;
        good *= 2;
    }
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if ok(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Chooses `r`, `eps`, `theta`, `N`, `a` and `M = m N` as in the contradiction argument:
/// `r = 0.7 lambda`, `eps = 0.1 lambda`, and the rest from the displayed requirements.
pub fn alt_witness_params(
    phi: &PhiSpec,
    space: Space,
    norm_t: f64,
    lambda: f64,
    m_centers: u64,
    policy: &NumericPolicy,
) -> Result<AltWitnessParams> {
    policy.validate()?;
    if !(lambda > 0.0 && lambda <= norm_t && norm_t.is_finite()) {
        return Err(Error::precondition(format!("need 0 < lambda <= |T|, got {lambda}, {norm_t}")));
    }
    if m_centers == 0 {
        return Err(Error::precondition("need at least one center"));
    }
    let maj = Majorant::new(phi)?;
    let r = 0.7 * lambda;
    let eps = 0.1 * lambda;
    let c = match space {
        Space::SmallM => {
            let d2 = delta2_constant(phi, policy);
            if !d2.is_finite() {
                return Err(Error::NotAdmissible("phi is not in Delta_2".into()));
            }
            d2
        }
        Space::BigM => 1.0,
    };
    let theta = theta_for(phi, space, r, eps, policy)?;
    let threshold = 2.0 * c * norm_t / eps;
    let (case, alpha0) = detect_case(space, &maj);
    let l = phi.length();
    let mut params = AltWitnessParams {
        space,
        case,
        norm_t,
        lambda,
        m_centers,
        r,
        eps,
        theta,
        c,
        n: 0,
        gamma: 1.0,
        a: 0.0,
        big_m: 0,
        threshold,
        margin: None,
        alpha0,
        beta0: None,
    };
    match case {
        AltCase::C3 => {
            let alpha0 = alpha0.expect("C3 carries alpha0");
            let by_alpha = (l / alpha0).floor() as u64 + 1;
            let by_norm = (2.0 * norm_t / eps).floor() as u64 + 1;
            params.n = by_alpha.max(by_norm).max(2);
        }
        AltCase::C1 | AltCase::C2 => {
            let n = smallest_n(phi, theta, threshold, policy).map_err(|e| match e {
                Error::NoConvergence(msg) => Error::NoConvergence(format!("case {case:?}: {msg}")),
                other => other,
            })?;
            params.n = n;
            params.margin = Some(not_too_constant_margin(phi, n as f64 * (1.0 - theta), policy)?);
        }
    }
    if case == AltCase::C2 {
        let alpha = l / params.n as f64;
        let target = slope(&maj, alpha);
        let i = (1..=SCAN_STEPS)
            .find(|&i| slope(&maj, alpha * 2f64.powi(-i)) > target * (1.0 + LINEAR_TOL))
            .ok_or_else(|| {
                Error::NoConvergence(format!("case C2: phi~(t)/t does not rise below t = {alpha} within 2^-60"))
            })?;
        params.gamma = 2f64.powi(i);
        params.beta0 = Some(alpha * 2f64.powi(-i));
    }
    let n = params.n as f64;
    params.a = l.min(1.0) / (params.gamma * n * n * (1.0 - theta));
    params.big_m = m_centers
        .checked_mul(params.n)
        .ok_or_else(|| Error::TooLarge("m N overflows".into()))?;
    Ok(params)
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Re-evaluates every requirement the parameters were chosen to meet.
pub fn verify_alt_witness_params(
    phi: &PhiSpec,
    p: &AltWitnessParams,
    policy: &NumericPolicy,
) -> Result<Vec<NamedCheck>> {
    let maj = Majorant::new(phi)?;
    let l = phi.length();
    let n = p.n as f64;
    let mut checks = Vec::new();

    checks.push(NamedCheck::new(
        "ordering",
        p.r > 0.0 && p.eps > 0.0 && p.r + 2.0 * p.eps < p.lambda && p.lambda <= p.norm_t,
        format!("r = {}, eps = {}, lambda = {}, |T| = {}", p.r, p.eps, p.lambda, p.norm_t),
    ));

    let c = match p.space {
        Space::SmallM => delta2_constant(phi, policy),
        Space::BigM => 1.0,
    };
    checks.push(NamedCheck::new("quasinorm_constant", rel_eq(c, p.c), format!("C = {c}")));

    match p.space {
        Space::SmallM => {
            let d = dilation_sup(phi, p.theta, policy);
            checks.push(NamedCheck::new(
                "dilation",
                p.theta > 0.0 && p.theta < 1.0 && d <= 1.0 + p.eps / p.r,
                format!("sup phi(t)/phi(theta t) = {d} vs 1 + eps/r = {}", 1.0 + p.eps / p.r),
            ));
        }
        Space::BigM => checks.push(NamedCheck::new("dilation", p.theta == 0.0, format!("theta = {}", p.theta))),
    }

    let (case, _) = detect_case(p.space, &maj);
    checks.push(NamedCheck::new("case", case == p.case, format!("detected {case:?}, recorded {:?}", p.case)));

    let threshold = 2.0 * c * p.norm_t / p.eps;
    match p.case {
        AltCase::C1 | AltCase::C2 => {
            let scale = n * (1.0 - p.theta);
            let margin = if scale > 1.0 {
                not_too_constant_margin(phi, scale, policy)?
            } else {
                f64::NAN
            };
            checks.push(NamedCheck::new(
                "not_too_constant",
                margin > threshold,
                format!("inf phi(N(1-theta)t)/phi(t) = {margin} vs 2C|T|/eps = {threshold}"),
            ));
        }
        AltCase::C3 => {
            let alpha0 = p.alpha0.unwrap_or(f64::NAN);
            let s = slope(&maj, alpha0);
            let linear = (1..=8).all(|i| rel_eq(slope(&maj, alpha0 * 2f64.powi(-i)), s));
            checks.push(NamedCheck::new(
                "linear_near_zero",
                alpha0 > 0.0 && alpha0 < l && linear,
                format!("phi~(t)/t constant on (0, {alpha0})"),
            ));
            checks.push(NamedCheck::new(
                "identity_case_n",
                p.n >= 2 && l / n < alpha0 && n > 2.0 * p.norm_t / p.eps,
                format!("N = {}, L/N = {}, 2|T|/eps = {}", p.n, l / n, 2.0 * p.norm_t / p.eps),
            ));
        }
    }

    match p.case {
        AltCase::C2 => {
            let beta0 = p.beta0.unwrap_or(f64::NAN);
            let alpha = l / n;
            checks.push(NamedCheck::new(
                "jump",
                beta0 > 0.0 && beta0 < alpha && slope(&maj, beta0) > slope(&maj, alpha),
                format!("phi~(b)/b = {} vs phi~(L/N)/(L/N) = {}", slope(&maj, beta0), slope(&maj, alpha)),
            ));
            checks.push(NamedCheck::new(
                "gamma",
                p.gamma > 1.0 && rel_eq(beta0, l / (p.gamma * n)),
                format!("gamma = {}, beta0 = {beta0}", p.gamma),
            ));
        }
        _ => checks.push(NamedCheck::new("gamma", p.gamma == 1.0, format!("gamma = {}", p.gamma))),
    }

    let cap = l.min(1.0);
    let expected = cap / (p.gamma * n * n * (1.0 - p.theta));
    checks.push(NamedCheck::new(
        "a_small_enough",
        rel_eq(p.a, expected) && p.a <= cap / (n * (1.0 - p.theta)) && p.a > 0.0 && p.a < l,
        format!("a = {}, expected {expected}", p.a),
    ));
    checks.push(NamedCheck::new(
        "family_size",
        p.big_m == p.m_centers * p.n,
        format!("M = {}, m N = {}", p.big_m, p.m_centers * p.n),
    ));
    Ok(checks)
}

//! Lower bounds for the ball measure of noncompactness, as checkable certificates.

mod alt;
mod general;
mod linf;
mod packing;
mod shrinking;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use alt::{
    alt_certificate_check, alt_witness_params, verify_alt_witness_params, AltCase, AltCertificate, AltWitnessParams,
};
pub use general::{
    verify_general_lower_certificate, Disjointness, GeneralLowerCertificate, IndicatorPacking, WitnessGenerator,
    WitnessGroup, WitnessSet,
};
pub use linf::{ell_for_centers, linf_lower_certificate, LinfCertificate, PairAttestation};
pub use packing::{
    build_packing, unit_ball_volume, verify_packing, BallSize, Cube, Packing, PackingReport, MAX_MATERIALIZED_CENTERS,
};
pub use shrinking::{shrinking_driver, ShrinkingEntry};

use crate::error::{Error, Result};
use crate::norms::{norm, quasinorm_constant_y};
use crate::phi::{PhiSpec, Space};
use crate::policy::NumericPolicy;
use crate::scalar::Scalar;
use crate::stepfn::StepFunction;

/// A single named yes/no check with a human-readable account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl NamedCheck {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        NamedCheck {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCondition {
    pub condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub detail: String,
}

/// Per-step margins; keys are sorted so the serialized form is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub label: String,
    pub values: BTreeMap<String, f64>,
}

impl TraceRow {
    pub fn new(label: impl Into<String>) -> Self {
        TraceRow {
            label: label.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }
}

/// Outcome of a certificate check: PASS certifies the lower bound `bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: Outcome,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_condition: Option<FailedCondition>,
    pub trace: Vec<TraceRow>,
}

impl Verdict {
    pub fn new(bound: f64) -> Self {
        Verdict {
            verdict: Outcome::Pass,
            bound,
            failed_condition: None,
            trace: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.verdict == Outcome::Pass
    }

    /// Records a failure; only the first one is kept.
    pub fn fail(&mut self, condition: &str, index: Option<usize>, detail: impl Into<String>) {
        if self.failed_condition.is_none() {
            self.verdict = Outcome::Fail;
            self.failed_condition = Some(FailedCondition {
                condition: condition.to_string(),
                index,
                detail: detail.into(),
            });
        }
    }

    /// Fails with `condition` unless `ok`.
    pub fn require(&mut self, ok: bool, condition: &str, index: Option<usize>, detail: impl FnOnce() -> String) -> bool {
        if !ok {
            self.fail(condition, index, detail());
        }
        ok
    }

    pub fn failed_name(&self) -> Option<&str> {
        self.failed_condition.as_ref().map(|f| f.condition.as_str())
    }
}

/// `C_Y (|T| + r)`: a center with larger norm is farther than `r` from the image of the unit
/// ball.
pub fn distance_exclusion_bound(norm_t: f64, r: f64, c_y: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::precondition(format!("r must be positive, got {r}")));
    }
    if !(c_y >= 1.0) || !(norm_t >= 0.0) {
        return Err(Error::precondition("need C_Y >= 1 and |T| >= 0"));
    }
    Ok(c_y * (norm_t + r))
}

/// `C_Y^{-1} |g| - |Tf|`, the lower estimate for `|g - Tf|` from the quasi-triangle inequality.
pub fn distance_lower_estimate(g_norm: f64, tf_norm: f64, c_y: f64) -> f64 {
    g_norm / c_y - tf_norm
}

/// `min_{i<j} |p_i - p_j|_Y / (2 C_Y)`: arbitrarily large families this well separated cannot
/// be covered by finitely many balls of smaller radius.
pub fn separation_lower_bound<V: Scalar>(
    points: &[StepFunction<V>],
    phi: &PhiSpec,
    space: Space,
    policy: &NumericPolicy,
) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::precondition("separation needs at least two points"));
    }
    let c = quasinorm_constant_y(phi, space, policy).value;
    let minus = V::zero() - V::one();
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i].add(&points[j].scale(&minus))?;
            best = best.min(norm(&d, phi, space, policy).value);
        }
    }
    Ok(best / (2.0 * c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exclusion_bound() {
        assert_eq!(distance_exclusion_bound(1.0, 0.5, 1.0).unwrap(), 1.5);
        assert_eq!(distance_exclusion_bound(1.0, 0.5, 2.0).unwrap(), 3.0);
        assert!(distance_exclusion_bound(1.0, 0.0, 1.0).is_err());
        assert!(distance_exclusion_bound(1.0, 0.5, 0.5).is_err());
        let bound = distance_exclusion_bound(1.0, 0.5, 2.0).unwrap();
        assert!(distance_lower_estimate(bound + 1e-3, 1.0, 2.0) > 0.5);
    }

    #[test]
    fn verdict_keeps_first_failure() {
        let mut v = Verdict::new(1.0);
        v.require(true, "a", None, || unreachable!());
        v.fail("b", Some(2), "x");
        v.fail("c", None, "y");
        assert_eq!(v.failed_name(), Some("b"));
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with(r#"{"verdict":"FAIL","bound":1.0,"failed_condition":{"condition":"b","index":2"#));
    }
}

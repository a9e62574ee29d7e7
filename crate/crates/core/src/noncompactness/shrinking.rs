//! Lower bound for an embedding from extremals supported in shrinking balls.

use serde::{Deserialize, Serialize};

use super::{TraceRow, Verdict};

/// One extremal: attested X-norm, computed Y-norm and the radius of its supporting ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkingEntry {
    pub x_norm: f64,
    pub y_norm: f64,
    pub radius: f64,
}

const X_NORM_SLACK: f64 = 1e-12;

/// PASS when every entry is a unit vector of X, the radii strictly decrease, and every Y-norm
/// reaches `alpha0`; this certifies `alpha(I) >= alpha0`. With `embedding_norm` given, the trace
/// also records how close `alpha0` comes to it.
pub fn shrinking_driver(entries: &[ShrinkingEntry], alpha0: f64, embedding_norm: Option<f64>) -> Verdict {
    let mut v = Verdict::new(alpha0);
    if !v.require(entries.len() >= 2, "sequence_length", None, || {
        format!("need at least two extremals, got {}", entries.len())
    }) {
        return v;
    }
    for (i, e) in entries.iter().enumerate() {
        v.trace.push(
            TraceRow::new(format!("j={i}"))
                .with("radius", e.radius)
                .with("y_norm", e.y_norm)
                .with("margin", e.y_norm - alpha0),
        );
    }
    for (i, e) in entries.iter().enumerate() {
        let ok = v.require((e.x_norm - 1.0).abs() <= X_NORM_SLACK, "unit_norm", Some(i), || {
            format!("|f_{i}|_X = {} != 1", e.x_norm)
        }) && v.require(e.radius > 0.0 && e.radius.is_finite(), "radius_positive", Some(i), || {
            format!("radius r_{i} = {} is not positive", e.radius)
        }) && (i == 0
            || v.require(e.radius < entries[i - 1].radius, "radii_decreasing", Some(i), || {
                format!("r_{i} = {} does not drop below r_{} = {}", e.radius, i - 1, entries[i - 1].radius)
            }))
            && v.require(e.y_norm >= alpha0, "y_norm_bound", Some(i), || {
                format!("|f_{i}|_Y = {} < alpha0 = {alpha0}", e.y_norm)
            });
        if !ok {
            return v;
        }
    }
    if let Some(norm) = embedding_norm {
        v.trace
            .push(TraceRow::new("conclusion").with("alpha0", alpha0).with("embedding_norm", norm).with("ratio", alpha0 / norm));
    }
    v
}

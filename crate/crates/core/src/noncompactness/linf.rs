//! Lower bound for embeddings into bounded functions via a pigeonhole on center subsets.

use serde::{Deserialize, Serialize};

use super::alt::support_overlap;
use super::{TraceRow, Verdict};
use crate::error::Result;
use crate::stepfn::StepFunction;

/// Attested `|f_i - f_j|_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAttestation {
    pub i: usize,
    pub j: usize,
    pub x_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinfCertificate {
    pub r: f64,
    pub members: Vec<StepFunction<f64>>,
    pub pair_attestations: Vec<PairAttestation>,
    /// When given, the family must be large enough to defeat this many centers minus one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<u32>,
}

/// `2^m`: more members than there are nonempty subsets of `m - 1` centers.
pub fn ell_for_centers(m: u32) -> u64 {
    1u64 << m
}

fn sup_norm(f: &StepFunction<f64>) -> f64 {
    f.pieces().iter().map(|p| p.value.abs()).fold(0.0, f64::max)
}

/// PASS certifies `alpha(I) >= r`.
pub fn linf_lower_certificate(cert: &LinfCertificate) -> Result<Verdict> {
    let mut v = Verdict::new(cert.r);
    let ell = cert.members.len();
    if !v.require(cert.r > 0.0, "r_positive", None, || format!("r = {} must be positive", cert.r))
        || !v.require(ell >= 2, "family_size", None, || format!("need at least two members, got {ell}"))
    {
        return Ok(v);
    }
    if let Some(m) = cert.centers {
        let need = ell_for_centers(m);
        if !v.require(ell as u64 >= need, "family_size", None, || {
            format!("{ell} members cannot defeat {} centers; need {need}", m.saturating_sub(1))
        }) {
            return Ok(v);
        }
    }
    if let Some((i, j)) = support_overlap(&cert.members)? {
        v.fail("disjoint_supports", Some(j), format!("supports of members {i} and {j} meet"));
        return Ok(v);
    }

    let mut attested = vec![vec![None; ell]; ell];
    for (k, a) in cert.pair_attestations.iter().enumerate() {
        if !v.require(a.i < ell && a.j < ell && a.i != a.j, "pair_index", Some(k), || {
            format!("attestation {k} names pair ({}, {})", a.i, a.j)
        }) {
            return Ok(v);
        }
        attested[a.i.min(a.j)][a.i.max(a.j)] = Some(a.x_distance);
    }
    let mut worst_pair: f64 = 0.0;
    for (i, row) in attested.iter().enumerate() {
        for (j, &d) in row.iter().enumerate().skip(i + 1) {
            if !v.require(d.is_some_and(|d| d <= 1.0), "pair_distance", Some(j), || match d {
                Some(d) => format!("|f_{i} - f_{j}|_X = {d} > 1"),
                None => format!("pair ({i}, {j}) is not attested"),
            }) {
                return Ok(v);
            }
            worst_pair = worst_pair.max(d.unwrap_or(0.0));
        }
    }

    let mut row = TraceRow::new("members").with("ell", ell as f64).with("max_pair_distance", worst_pair);
    let mut min_sup = f64::INFINITY;
    for (i, f) in cert.members.iter().enumerate() {
        let s = sup_norm(f);
        min_sup = min_sup.min(s);
        if !v.require(s > cert.r, "sup_norm", Some(i), || format!("|f_{i}|_inf = {s} is not above r = {}", cert.r)) {
            break;
        }
    }
    row.set("min_sup_norm", min_sup);
    v.trace.push(row);
    Ok(v)
}

use serde::Serialize;

use super::{disjoint_sum, StepFunction};
use crate::error::{Error, Result};
use crate::rational::{int, Measure};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `(f+g)**(t) <= f**(t) + g**(t)`
    MaximalSubadditive,
    /// `(f+g)*(s+t) <= f*(s) + g*(t)`
    RearrangementSubadditive,
    /// `(sum f_j)*(N t) >= min_j f_j*(t)` for disjointly supported `f_j`
    DisjointLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub kind: InequalityKind,
    pub s: Option<f64>,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Checks the two subadditivity inequalities at every sample point; the `f*` inequality pairs
/// `s = t_i` with `t = t_{i+1}` cyclically. If `f` and `g` have disjoint positioned supports the
/// disjoint lower bound with `N = 2` is checked as well.
pub fn verify_rearrangement_inequalities<V: Scalar>(
    f: &StepFunction<V>,
    g: &StepFunction<V>,
    sample_ts: &[Measure],
) -> Result<InequalityReport> {
    let sum = f.add(g)?;
    let (fs, gs, hs) = (f.rearrangement(), g.rearrangement(), sum.rearrangement());
    let (fm, gm, hm) = (
        f.maximal_rearrangement(),
        g.maximal_rearrangement(),
        sum.maximal_rearrangement(),
    );
    let mut checks = Vec::with_capacity(2 * sample_ts.len());
    for (i, t) in sample_ts.iter().enumerate() {
        let lhs = hm.eval(t)?;
        let rhs = fm.eval(t)? + gm.eval(t)?;
        checks.push(InequalityCheck {
            kind: InequalityKind::MaximalSubadditive,
            s: None,
            t: crate::rational::to_f64(t),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            pass: lhs.le_tol(&rhs),
        });
        let s = t;
        let u = &sample_ts[(i + 1) % sample_ts.len()];
        let lhs = hs.eval(&(s + u))?;
        let rhs = fs.eval(s)? + gs.eval(u)?;
        checks.push(InequalityCheck {
            kind: InequalityKind::RearrangementSubadditive,
            s: Some(crate::rational::to_f64(s)),
            t: crate::rational::to_f64(u),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            pass: lhs.le_tol(&rhs),
        });
    }
    match disjoint_sum(&[f.clone(), g.clone()]) {
        Ok(_) => checks.extend(verify_disjoint_lower_bound(&[f.clone(), g.clone()], sample_ts)?.checks),
        Err(Error::Overlap { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(InequalityReport { checks })
}

/// `(sum f_j)*(N t) >= min_j f_j*(t)` for `N = fs.len()` disjointly supported functions.
pub fn verify_disjoint_lower_bound<V: Scalar>(fs: &[StepFunction<V>], sample_ts: &[Measure]) -> Result<InequalityReport> {
    let sum = disjoint_sum(fs)?;
    let n = int(fs.len() as i64);
    let total = sum.rearrangement();
    let parts: Vec<_> = fs.iter().map(StepFunction::rearrangement).collect();
    let mut checks = Vec::with_capacity(sample_ts.len());
    for t in sample_ts {
        let lhs = total.eval(&(&n * t))?;
        let mut rhs: Option<V> = None;
        for p in &parts {
            let v = p.eval(t)?;
            rhs = Some(match rhs {
                Some(r) => r.min_of(v),
                None => v,
            });
        }
        let rhs = rhs.expect("at least one function");
        checks.push(InequalityCheck {
            kind: InequalityKind::DisjointLowerBound,
            s: None,
            t: crate::rational::to_f64(t),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            pass: rhs.le_tol(&lhs),
        });
    }
    Ok(InequalityReport { checks })
}

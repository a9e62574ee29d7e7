//! Disjointly supported families whose norms add up far faster than the norm of their sum.
//!
//! Each member is a normalised indicator `chi_{E_k} / phi(r_k)` with `|E_k| = r_k` and the radii
//! decay geometrically, so every member has norm one while the sum stays bounded.

use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{norm, sup_weighted_maximal_on};
use crate::numeric::Attainment;
use crate::phi::{classify_phi, Check, Fundamental, Majorant, PhiSpec, Space, ZeroLimit};
use crate::policy::NumericPolicy;
use crate::rational::{format_rational, from_f64, int, ratio, to_f64, Extent, Measure};
use crate::stepfn::{disjoint_sum, Interval, StepFunction};

/// Exponents reported by default.
pub const DEFAULT_GAMMAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Halvings allowed per radius while searching for the ratio condition of the `M` family.
pub const MAX_HALVINGS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleFamily {
    pub space: Space,
    /// `r_1 > r_2 > ... > r_m`
    pub radii: Vec<Measure>,
    pub members: Vec<StepFunction<f64>>,
    pub sum: StepFunction<f64>,
}

impl CounterexampleFamily {
    fn build(space: Space, phi: &PhiSpec, radii: Vec<Measure>) -> Result<Self> {
        let length = Extent::from_f64(phi.length())?;
        let mut start = Measure::zero();
        let mut members = Vec::with_capacity(radii.len());
        for r in &radii {
            let end = &start + r;
            let height = 1.0 / phi.value(to_f64(r));
            members.push(StepFunction::indicator(height, Interval::new(start, end.clone())?, length.clone())?);
            start = end;
        }
        let sum = disjoint_sum(&members)?;
        Ok(CounterexampleFamily {
            space,
            radii,
            members,
            sum,
        })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// `a_k = r_{k+1} + ... + r_m` for `k = 0..=m`.
    pub fn tails(&self) -> Vec<Measure> {
        let mut out = vec![Measure::zero(); self.radii.len() + 1];
        for k in (0..self.radii.len()).rev() {
            out[k] = &out[k + 1] + &self.radii[k];
        }
        out
    }

    /// `phi(a_{j-1}) / phi(r_j)` for each `j`; bounded by the doubling constant.
    pub fn tail_ratios(&self, phi: &PhiSpec) -> Vec<f64> {
        let tails = self.tails();
        let l = phi.length();
        self.radii
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let a = to_f64(&tails[j]);
                let top = if a < l { phi.value(a) } else { phi.limit_at_end() };
                top / phi.value(to_f64(r))
            })
            .collect()
    }

    /// `sup phi f**` over `(a_j, a_{j-1}]` for `j = 1..m-1`, then over `(0, a_{m-1}]`.
    pub fn maximal_piece_sups(&self, phi: &PhiSpec, policy: &NumericPolicy) -> Vec<(f64, Attainment)> {
        let tails: Vec<f64> = self.tails().iter().map(to_f64).collect();
        let m = self.radii.len();
        let hi_of = |x: f64| x.min(phi.length() * (1.0 - f64::EPSILON));
        let mut out: Vec<(f64, Attainment)> = (1..m)
            .map(|j| {
                let e = sup_weighted_maximal_on(&self.sum, phi, tails[j], hi_of(tails[j - 1]), policy);
                (e.value, e.at)
            })
            .collect();
        if m > 0 {
            let e = sup_weighted_maximal_on(&self.sum, phi, 0.0, hi_of(tails[m - 1]), policy);
            out.push((e.value, e.at));
        }
        out
    }

    /// Structural conditions of the construction; returns human-readable violations.
    pub fn violations(&self, phi: &PhiSpec) -> Vec<String> {
        let mut out = Vec::new();
        let two = int(2);
        for (k, w) in self.radii.windows(2).enumerate() {
            if &w[1] * &two > w[0] {
                out.push(format!("r_{} > r_{} / 2", k + 2, k + 1));
            }
            if self.space == Space::BigM {
                let (a, b) = (to_f64(&w[0]), to_f64(&w[1]));
                if b / phi.value(b) > a / (2.0 * phi.value(a)) {
                    out.push(format!("r_{0}/phi(r_{0}) > r_{1}/(2 phi(r_{1}))", k + 2, k + 1));
                }
            }
        }
        if let Some(r1) = self.radii.first() {
            let total: Measure = self.radii.iter().sum();
            if total > r1 * &two {
                out.push(format!("total measure {} exceeds 2 r_1", format_rational(&total)));
            }
        }
        out
    }
}

fn require_nondecreasing(phi: &PhiSpec, policy: &NumericPolicy) -> Result<()> {
    match classify_phi(phi, policy)?.is_nondecreasing {
        Check::Yes => Ok(()),
        Check::No => Err(Error::precondition("phi is not nondecreasing")),
        Check::Inconclusive => Err(Error::precondition("monotonicity of phi is inconclusive")),
    }
}

/// Family for `m_phi`: `r_1 = min(t0, L) / 2`, `r_k = r_1 2^{-(k-1)}`.
pub fn gen_counterexample_m(phi: &PhiSpec, m: usize, t0: f64, policy: &NumericPolicy) -> Result<CounterexampleFamily> {
    if m == 0 {
        return Err(Error::invalid("the family needs at least one member"));
    }
    if !(t0 > 0.0) {
        return Err(Error::invalid(format!("threshold t0 must be positive, got {t0}")));
    }
    let cap = t0.min(phi.length());
    if cap.is_infinite() {
        return Err(Error::invalid("need a finite threshold when L is infinite"));
    }
    require_nondecreasing(phi, policy)?;
    let half = ratio(1, 2);
    let r1 = from_f64(cap)? * &half;
    let radii = (0..m)
        .scan(r1, |r, _| {
            let cur = r.clone();
            *r = &*r * &half;
            Some(cur)
        })
        .collect();
    CounterexampleFamily::build(Space::SmallM, phi, radii)
}

/// Family for `M_phi`: radii halved until `r_{k+1}/phi(r_{k+1}) <= r_k / (2 phi(r_k))`.
pub fn gen_counterexample_big_m(phi: &PhiSpec, m: usize, policy: &NumericPolicy) -> Result<CounterexampleFamily> {
    if m == 0 {
        return Err(Error::invalid("the family needs at least one member"));
    }
    let class = classify_phi(phi, policy)?;
    match class.limit_t_over_phi {
        ZeroLimit::Zero => {}
        ZeroLimit::PositiveFinite(c) => {
            return Err(Error::precondition(format!(
                "lim t/phi(t) at 0 is positive and finite ({c}); M_phi is equivalent to L1 and disjointly additive"
            )))
        }
        ZeroLimit::Infinite => return Err(Error::precondition("lim t/phi(t) at 0 is infinite")),
    }
    if class.is_quasiconcave != Check::Yes {
        return Err(Error::precondition("phi is not quasiconcave"));
    }
    let half = ratio(1, 2);
    let mut radii = vec![from_f64(phi.length().min(1.0))? * &half];
    for k in 1..m {
        let prev = &radii[k - 1];
        let pf = to_f64(prev);
        let target = pf / (2.0 * phi.value(pf));
        let mut r = prev * &half;
        let mut halvings = 0;
        while to_f64(&r) / phi.value(to_f64(&r)) > target {
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::NoConvergence(format!("radius {} not found in {MAX_HALVINGS} halvings", k + 1)));
            }
            r = &r * &half;
        }
        radii.push(r);
    }
    CounterexampleFamily::build(Space::BigM, phi, radii)
}

pub fn gen_counterexample(
    space: Space,
    phi: &PhiSpec,
    m: usize,
    t0: f64,
    policy: &NumericPolicy,
) -> Result<CounterexampleFamily> {
    match space {
        Space::SmallM => gen_counterexample_m(phi, m, t0, policy),
        Space::BigM => gen_counterexample_big_m(phi, m, policy),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub m: usize,
    pub gamma: f64,
    pub member_norms: Vec<f64>,
    pub sum_norm: f64,
    /// `sum ||f_k||^gamma / ||sum f_k||^gamma`
    pub defect: f64,
}

pub fn superadditivity_defect(
    fam: &CounterexampleFamily,
    phi: &PhiSpec,
    gamma: f64,
    policy: &NumericPolicy,
) -> Result<DefectReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    let member_norms: Vec<f64> = fam.members.iter().map(|f| norm(f, phi, fam.space, policy).value).collect();
    let sum_norm = norm(&fam.sum, phi, fam.space, policy).value;
    let num: f64 = member_norms.iter().map(|n| n.powf(gamma)).sum();
    Ok(DefectReport {
        m: fam.len(),
        gamma,
        member_norms,
        sum_norm,
        defect: num / sum_norm.powf(gamma),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1EquivalenceReport {
    /// `min ||f||_{M_phi} / ||f||_1` over the samples.
    pub kappa1: f64,
    /// `max ||f||_{M_phi} / ||f||_1` over the samples.
    pub kappa2: f64,
    /// `lim_{t -> L} phi~(t)/t`, a lower bound for every ratio.
    pub kappa1_bound: f64,
    /// `lim_{t -> 0} phi~(t)/t`, an upper bound for every ratio.
    pub kappa2_bound: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Empirical equivalence constants between `M_phi` and `L1` when `t/phi(t)` has a positive
/// finite limit at zero.
pub fn l1_equivalence_check(
    phi: &PhiSpec,
    samples: &[StepFunction<f64>],
    policy: &NumericPolicy,
) -> Result<L1EquivalenceReport> {
    let c = phi.t_over_phi_at_zero();
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::precondition(format!(
            "lim t/phi(t) at 0 must be positive and finite, got {c}"
        )));
    }
    let maj = Majorant::new(phi)?;
    let (lo, hi) = (maj.slope_at_end(), maj.slope_at_zero());
    let mut kappa1 = f64::INFINITY;
    let mut kappa2: f64 = 0.0;
    let mut used = 0;
    for f in samples {
        let l1 = f.l1_norm();
        if l1 == 0.0 {
            continue;
        }
        let ratio = norm(f, phi, Space::BigM, policy).value / l1;
        kappa1 = kappa1.min(ratio);
        kappa2 = kappa2.max(ratio);
        used += 1;
    }
    let slack = 1.0 + policy.tol_rel;
    let pass = used == 0 || (kappa1 * slack >= lo && kappa2 <= hi * slack);
    Ok(L1EquivalenceReport {
        kappa1,
        kappa2,
        kappa1_bound: lo,
        kappa2_bound: hi,
        samples: used,
        pass,
    })
}

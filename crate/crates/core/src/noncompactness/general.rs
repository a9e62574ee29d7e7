//! Checker for the general lower bound driven by large, well-spread witnesses.
//!
//! The X side (unit norms, disjointness of the sets `E_i`) is attested data. Witnesses come in
//! groups of identical records so that families with millions of members stay cheap to check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_packing, verify_packing, BallSize, Cube, Packing, TraceRow, Verdict};
use crate::error::{Error, Result};
use crate::phi::{almost_quasiconcave_constant, sigma_threshold, Fundamental, Majorant, PhiSpec, SigmaQuery, Space};
use crate::policy::NumericPolicy;
use crate::rational::{dyadic, to_f64};
use crate::stepfn::Interval;

/// `count` witnesses sharing the same attested data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessGroup {
    pub count: u64,
    /// Attested `|f_i|_X`.
    pub x_norm: f64,
    /// `mu(E_i)`.
    pub measure: f64,
    /// `essinf_{E_i} |T f_i|` for `m`, the average of `|T f_i|` over `E_i` for `M`.
    pub s: f64,
}

/// Evidence that the sets `E_i` are pairwise disjoint subsets of `S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Disjointness {
    /// One ball per subcube of a dyadic packing of `S`.
    Packing(Packing),
    /// Explicit intervals in `[0, mu(S))`, one per witness in group order.
    Intervals(Vec<Interval>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSet {
    pub groups: Vec<WitnessGroup>,
    pub disjointness: Disjointness,
}

impl WitnessSet {
    pub fn len(&self) -> u64 {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_measure(&self) -> f64 {
        self.groups.iter().map(|g| g.count as f64 * g.measure).sum()
    }
}

/// Produces witnesses for a requested size `sigma` and slack `eps`.
pub trait WitnessGenerator: Sync {
    fn generate(&self, sigma: f64, eps: f64) -> Result<WitnessSet>;

    /// Generators that are not safe to call concurrently return true.
    fn serial(&self) -> bool {
        false
    }
}

/// Normalized ball indicators `chi_{E_j} / phi(|E_j|)` on a dyadic packing of a cube, for the
/// identity operator. The ball ratio `2^-j` shrinks until the height reaches `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorPacking {
    pub cube: Cube,
    pub phi: PhiSpec,
    /// Attested `|chi_E / phi(|E|)|_X`.
    #[serde(default = "one")]
    pub x_norm: f64,
    /// Balls must stay below this measure.
    #[serde(default)]
    pub t0: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// Deepest ball ratio `2^-j` tried by [`IndicatorPacking`].
const MAX_RATIO_BITS: u32 = 60;

impl IndicatorPacking {
    pub fn new(cube: Cube, phi: PhiSpec) -> Self {
        IndicatorPacking {
            cube,
            phi,
            x_norm: 1.0,
            t0: None,
        }
    }

    /// Packing with ball ratio `2^-bits`, and the indicator height on its balls.
    pub fn at_ratio_bits(&self, bits: u32) -> Result<(Packing, f64)> {
        let p = build_packing(&self.cube, &BallSize::Ratio(dyadic(bits)))?;
        let height = 1.0 / self.phi.eval(p.t1)?;
        Ok((p, height))
    }

    pub fn witnesses(&self, packing: Packing, height: f64) -> WitnessSet {
        WitnessSet {
            groups: vec![WitnessGroup {
                count: packing.count,
                x_norm: self.x_norm,
                measure: packing.t1,
                s: height,
            }],
            disjointness: Disjointness::Packing(packing),
        }
    }
}

impl WitnessGenerator for IndicatorPacking {
    fn generate(&self, sigma: f64, _eps: f64) -> Result<WitnessSet> {
        let n = self.cube.dimension();
        let b0 = self.cube.ball_volume();
        for bits in 1..=MAX_RATIO_BITS {
            if n * bits > super::packing::MAX_LEVEL_BITS {
                break;
            }
            let t1 = b0 * 2f64.powi(-(bits as i32));
            if 1.0 / self.phi.eval(t1)? >= sigma && self.t0.is_none_or(|t0| t1 < t0) {
                let (p, height) = self.at_ratio_bits(bits)?;
                return Ok(self.witnesses(p, height));
            }
        }
        Err(Error::NoConvergence(format!(
            "no ball ratio down to 2^-{MAX_RATIO_BITS} gives indicator height {sigma}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralLowerCertificate {
    pub space: Space,
    pub phi: PhiSpec,
    pub tau: f64,
    pub s_measure: f64,
    /// Required for `m`: `phi(t)/t` is nonincreasing on `(0, t0)` and every `mu(E_i) < t0`.
    #[serde(default)]
    pub t0: Option<f64>,
    pub r: f64,
    pub norm_t: f64,
    /// Seed for the randomized center assignments of the pigeonhole step.
    #[serde(default)]
    pub pigeonhole_seed: u64,
}

/// Random assignments tried per `(eps, k)` on top of the round-robin one.
const RANDOM_SPLITS: usize = 4;

/// Relative slack on float comparisons between attested and derived quantities.
fn slack(policy: &NumericPolicy) -> f64 {
    policy.tol_rel.max(1e-12)
}

fn check_hypotheses(cert: &GeneralLowerCertificate, policy: &NumericPolicy, v: &mut Verdict) -> Option<f64> {
    let ok = v.require(cert.r > 0.0 && cert.r < cert.norm_t, "r_range", None, || {
        format!("need 0 < r < |T|, got r = {}, |T| = {}", cert.r, cert.norm_t)
    }) && v.require(cert.tau > 0.0 && cert.tau <= 1.0, "tau_range", None, || {
        format!("tau = {} is outside (0, 1]", cert.tau)
    }) && v.require(cert.s_measure > 0.0 && cert.s_measure.is_finite(), "s_measure", None, || {
        format!("mu(S) = {} must be positive and finite", cert.s_measure)
    });
    if !ok {
        return None;
    }
    match cert.space {
        Space::SmallM => {
            let c = almost_quasiconcave_constant(&cert.phi, policy);
            if !v.require(c.is_some(), "almost_quasiconcave", None, || {
                "phi is not almost quasiconcave".to_string()
            }) {
                return None;
            }
            let Some(t0) = cert.t0 else {
                v.fail("t0", None, "the m space needs t0");
                return None;
            };
            if !v.require(t0 > 0.0 && t0 < cert.phi.length(), "t0", None, || {
                format!("t0 = {t0} must lie in (0, L)")
            }) {
                return None;
            }
            let bad = slope_increase(&cert.phi, t0, policy);
            if !v.require(bad.is_none(), "phi_over_t_nonincreasing", None, || {
                format!("phi(t)/t increases near t = {:e}", bad.unwrap_or(0.0))
            }) {
                return None;
            }
            c
        }
        Space::BigM => {
            let ok = Majorant::new(&cert.phi).is_ok();
            v.require(ok, "admissible", None, || "phi is not admissible".to_string())
                .then_some(1.0)
        }
    }
}

/// First sampled point of `(0, t0)` at which `phi(t)/t` increases, on a geometric grid.
fn slope_increase(phi: &PhiSpec, t0: f64, policy: &NumericPolicy) -> Option<f64> {
    let n = 4 * policy.grid_points_per_piece;
    let decades = 40.0;
    let ts: Vec<f64> = (0..=n)
        .map(|i| t0 * 2f64.powf(-decades * (n - i) as f64 / n as f64))
        .filter(|&t| t < t0)
        .collect();
    let ratio = |t: f64| phi.value(t) / t;
    ts.windows(2)
        .find(|w| ratio(w[1]) > ratio(w[0]) * (1.0 + slack(policy)))
        .map(|w| w[1])
}

/// Result of one `(eps, k)` cell of the sweep.
struct Cell {
    row: TraceRow,
    failure: Option<(String, Option<usize>, String)>,
}

impl Cell {
    fn fail(row: TraceRow, name: &str, index: Option<usize>, detail: String) -> Self {
        Cell {
            row,
            failure: Some((name.to_string(), index, detail)),
        }
    }
}

/// Per-class witness counts, one class per center, for a deterministic or random assignment.
fn split_counts(groups: &[WitnessGroup], k: usize, rng: Option<&mut ChaCha8Rng>) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity(groups.len());
    match rng {
        None => {
            // round-robin over global indices
            let mut offset = 0u64;
            for g in groups {
                let k64 = k as u64;
                let start = offset % k64;
                let counts = (0..k64)
                    .map(|j| {
                        let first = (j + k64 - start) % k64;
                        if first < g.count {
                            (g.count - first - 1) / k64 + 1
                        } else {
                            0
                        }
                    })
                    .collect();
                out.push(counts);
                offset += g.count;
            }
        }
        Some(rng) => {
            for g in groups {
                let weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-9).collect();
                let total: f64 = weights.iter().sum();
                let mut counts: Vec<u64> = weights
                    .iter()
                    .map(|w| ((g.count as f64) * w / total).floor() as u64)
                    .collect();
                let mut placed: u64 = counts.iter().sum();
                while placed > g.count {
                    let j = counts.iter().position(|&c| c > 0).expect("positive count");
                    counts[j] -= 1;
                    placed -= 1;
                }
                while placed < g.count {
                    counts[rng.gen_range(0..k)] += 1;
                    placed += 1;
                }
                out.push(counts);
            }
        }
    }
    out
}

struct Pigeonhole {
    mass: f64,
    min_s: f64,
}

/// The heaviest class of an assignment, with the smallest `s_i` it contains.
fn heaviest_class(groups: &[WitnessGroup], counts: &[Vec<u64>], k: usize) -> Pigeonhole {
    let mass = |j: usize| -> f64 { groups.iter().zip(counts).map(|(g, c)| c[j] as f64 * g.measure).sum() };
    let j = (0..k)
        .max_by(|&a, &b| mass(a).total_cmp(&mass(b)).then(b.cmp(&a)))
        .unwrap_or(0);
    let min_s = groups
        .iter()
        .zip(counts)
        .filter(|(_, c)| c[j] > 0)
        .map(|(g, _)| g.s)
        .fold(f64::INFINITY, f64::min);
    Pigeonhole { mass: mass(j), min_s }
}

fn mix_seed(seed: u64, eps: f64, k: usize) -> u64 {
    seed ^ eps.to_bits().rotate_left(17) ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[allow(clippy::too_many_arguments)]
fn check_cell<G: WitnessGenerator + ?Sized>(
    cert: &GeneralLowerCertificate,
    gen: &G,
    maj: &Majorant,
    c_phi: f64,
    eps: f64,
    k: usize,
    policy: &NumericPolicy,
) -> Cell {
    let mut row = TraceRow::new(format!("eps={eps},k={k}"));
    let tol = slack(policy);
    let q = SigmaQuery {
        space: cert.space,
        eps,
        tau: cert.tau,
        s_measure: cert.s_measure,
        centers: k as u64,
        norm_t: cert.norm_t,
        r: cert.r,
        c_phi: Some(c_phi),
    };
    let sigma = match sigma_threshold(&cert.phi, &q, policy) {
        Ok(s) => s,
        Err(e) => return Cell::fail(row, "sigma", None, e.to_string()),
    };
    row.set("sigma", sigma);
    let set = match gen.generate(sigma, eps) {
        Ok(s) => s,
        Err(e) => return Cell::fail(row, "generator", None, e.to_string()),
    };
    row.set("witnesses", set.len() as f64);
    if set.is_empty() {
        return Cell::fail(row, "generator", None, "no witnesses".into());
    }

    let mut offset = 0usize;
    let starts: Vec<usize> = set
        .groups
        .iter()
        .map(|g| {
            let s = offset;
            offset = offset.saturating_add(g.count as usize);
            s
        })
        .collect();

    for (g, &i) in set.groups.iter().zip(&starts) {
        if !(g.measure > 0.0 && g.measure.is_finite()) {
            return Cell::fail(row, "positive_measure", Some(i), format!("mu(E_{i}) = {}", g.measure));
        }
        if cert.space == Space::SmallM {
            let t0 = cert.t0.unwrap_or(f64::INFINITY);
            if g.measure >= t0 {
                return Cell::fail(row, "below_t0", Some(i), format!("mu(E_{i}) = {} >= t0 = {t0}", g.measure));
            }
        }
    }

    if let Some(detail) = disjointness_failure(&set, cert.s_measure) {
        return Cell::fail(row, "disjoint", None, detail);
    }

    for (g, &i) in set.groups.iter().zip(&starts) {
        if (g.x_norm - 1.0).abs() > tol {
            return Cell::fail(row, "unit_norm", Some(i), format!("|f_{i}|_X = {} != 1", g.x_norm));
        }
    }

    let total = set.total_measure();
    let needed = cert.tau * cert.s_measure;
    row.set("total_measure", total);
    row.set("tau_mu_s", needed);
    if total < needed * (1.0 - tol) {
        return Cell::fail(
            row,
            "large_measure",
            None,
            format!("sum mu(E_i) = {total} < tau mu(S) = {needed}"),
        );
    }

    let mut min_s = f64::INFINITY;
    let mut min_norm = f64::INFINITY;
    for (g, &i) in set.groups.iter().zip(&starts) {
        min_s = min_s.min(g.s);
        if g.s < sigma {
            return Cell::fail(row, "lower_bound_sigma", Some(i), format!("s_{i} = {} < sigma = {sigma}", g.s));
        }
        let lhs = g.s * cert.phi.value(g.measure);
        min_norm = min_norm.min(lhs);
        if lhs < (1.0 - eps) * cert.r * (1.0 - tol) {
            return Cell::fail(
                row,
                "large_norm",
                Some(i),
                format!("s_{i} phi(mu(E_{i})) = {lhs} < (1 - eps) r = {}", (1.0 - eps) * cert.r),
            );
        }
    }
    row.set("min_s", min_s);
    row.set("min_s_phi", min_norm);

    // pigeonhole and the contradiction it yields, for several assignments of witnesses to centers
    let share = needed / k as f64;
    let rhs = match cert.space {
        Space::SmallM => 2.0 / c_phi * (cert.norm_t + cert.r),
        Space::BigM => cert.norm_t + cert.r,
    };
    let at = |t: f64| {
        if t < maj.length() {
            maj.value(t)
        } else {
            maj.limit_at_end()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cert.pigeonhole_seed, eps, k));
    let mut worst_margin = f64::INFINITY;
    let mut worst_mass = f64::INFINITY;
    for trial in 0..=RANDOM_SPLITS {
        let counts = if trial == 0 {
            split_counts(&set.groups, k, None)
        } else {
            split_counts(&set.groups, k, Some(&mut rng))
        };
        let ph = heaviest_class(&set.groups, &counts, k);
        worst_mass = worst_mass.min(ph.mass);
        if ph.mass < share * (1.0 - tol) {
            return Cell::fail(
                row,
                "pigeonhole",
                None,
                format!("heaviest class has measure {} < tau mu(S) / k = {share}", ph.mass),
            );
        }
        let lhs = match cert.space {
            Space::SmallM => c_phi * eps * ph.min_s * at(eps * ph.mass),
            Space::BigM => eps * ph.min_s * at(ph.mass),
        };
        let margin = lhs / rhs - 1.0;
        worst_margin = worst_margin.min(margin);
        if !(margin > 0.0) {
            return Cell::fail(
                row,
                "contradiction",
                None,
                format!("center norm bound {lhs} does not exceed {rhs}"),
            );
        }
    }
    row.set("pigeonhole_mass", worst_mass);
    row.set("contradiction_margin", worst_margin);
    Cell { row, failure: None }
}

fn disjointness_failure(set: &WitnessSet, s_measure: f64) -> Option<String> {
    match &set.disjointness {
        Disjointness::Packing(p) => {
            let report = verify_packing(p);
            if let Some(c) = report.first_failure() {
                return Some(format!("packing check {} failed: {}", c.name, c.detail));
            }
            if p.count != set.len() {
                return Some(format!("packing has {} balls for {} witnesses", p.count, set.len()));
            }
            let cube = to_f64(&p.cube.volume());
            if cube > s_measure * (1.0 + 1e-12) {
                return Some(format!("packing cube of volume {cube} is larger than mu(S) = {s_measure}"));
            }
            let bad = set.groups.iter().find(|g| (g.measure - p.t1).abs() > 1e-12 * p.t1);
            bad.map(|g| format!("witness measure {} differs from the ball volume {}", g.measure, p.t1))
        }
        Disjointness::Intervals(ivs) => {
            if ivs.len() as u64 != set.len() {
                return Some(format!("{} intervals for {} witnesses", ivs.len(), set.len()));
            }
            let mut idx = 0;
            for g in &set.groups {
                for _ in 0..g.count {
                    let len = to_f64(&ivs[idx].length());
                    if (len - g.measure).abs() > 1e-12 * g.measure.max(len) {
                        return Some(format!("interval {idx} has length {len}, not {}", g.measure));
                    }
                    if to_f64(&ivs[idx].start) < 0.0 || to_f64(&ivs[idx].end) > s_measure * (1.0 + 1e-12) {
                        return Some(format!("interval {idx} leaves [0, mu(S))"));
                    }
                    idx += 1;
                }
            }
            let mut order: Vec<usize> = (0..ivs.len()).collect();
            order.sort_by(|&a, &b| ivs[a].start.cmp(&ivs[b].start));
            order
                .windows(2)
                .find(|w| ivs[w[0]].overlaps(&ivs[w[1]]))
                .map(|w| format!("intervals {} and {} overlap", w[0].min(w[1]), w[0].max(w[1])))
        }
    }
}

/// Sweeps `eps` over `eps_list` and the number of centers over `1..=k_max`. PASS certifies
/// `alpha(T) >= r` on the attested X-side data.
pub fn verify_general_lower_certificate<G: WitnessGenerator + ?Sized>(
    cert: &GeneralLowerCertificate,
    gen: &G,
    k_max: usize,
    eps_list: &[f64],
    policy: &NumericPolicy,
) -> Result<Verdict> {
    policy.validate()?;
    if k_max == 0 || eps_list.is_empty() {
        return Err(Error::invalid("need k_max >= 1 and at least one eps"));
    }
    let mut v = Verdict::new(cert.r);
    let Some(c_phi) = check_hypotheses(cert, policy, &mut v) else {
        return Ok(v);
    };
    let maj = Majorant::new(&cert.phi)?;
    let grid: Vec<(f64, usize)> = eps_list
        .iter()
        .flat_map(|&e| (1..=k_max).map(move |k| (e, k)))
        .collect();
    let run = |&(eps, k): &(f64, usize)| check_cell(cert, gen, &maj, c_phi, eps, k, policy);
    let cells: Vec<Cell> = if gen.serial() {
        grid.iter().map(run).collect()
    } else {
        grid.par_iter().map(run).collect()
    };
    for cell in cells {
        if let Some((name, index, detail)) = &cell.failure {
            v.fail(name, *index, format!("[{}] {detail}", cell.row.label));
        }
        v.trace.push(cell.row);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (GeneralLowerCertificate, IndicatorPacking) {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        let cert = GeneralLowerCertificate {
            space: Space::SmallM,
            phi: phi.clone(),
            tau: 0.5,
            s_measure: 1.0,
            t0: Some(0.5),
            r: 1.0,
            norm_t: 2.0,
            pigeonhole_seed: 7,
        };
        (cert, IndicatorPacking::new(Cube::unit(1), phi))
    }

    #[test]
    fn identity_indicators_pass() {
        let (cert, gen) = setup();
        let v = verify_general_lower_certificate(&cert, &gen, 4, &[0.5, 0.1], &NumericPolicy::default()).unwrap();
        assert!(v.pass(), "{:?}", v.failed_condition);
        assert_eq!(v.trace.len(), 8);
        assert!(v.trace.iter().all(|r| r.values["contradiction_margin"] > 0.0));
    }

    #[test]
    fn wrong_x_norm_is_named() {
        let (cert, mut gen) = setup();
        gen.x_norm = 1.5;
        let v = verify_general_lower_certificate(&cert, &gen, 2, &[0.5], &NumericPolicy::default()).unwrap();
        assert_eq!(v.failed_name(), Some("unit_norm"));
        assert_eq!(v.failed_condition.unwrap().index, Some(0));
    }

    #[test]
    fn capital_m_case_passes() {
        let (mut cert, gen) = setup();
        cert.space = Space::BigM;
        cert.t0 = None;
        let v = verify_general_lower_certificate(&cert, &gen, 3, &[0.5], &NumericPolicy::default()).unwrap();
        assert!(v.pass(), "{:?}", v.failed_condition);
    }

    #[test]
    fn r_at_norm_is_rejected() {
        let (mut cert, gen) = setup();
        cert.r = 2.0;
        let v = verify_general_lower_certificate(&cert, &gen, 1, &[0.5], &NumericPolicy::default()).unwrap();
        assert_eq!(v.failed_name(), Some("r_range"));
    }

    #[test]
    fn round_robin_split_is_even() {
        let g = |count| WitnessGroup {
            count,
            x_norm: 1.0,
            measure: 1.0,
            s: 1.0,
        };
        let counts = split_counts(&[g(5), g(4)], 3, None);
        assert_eq!(counts, vec![vec![2, 2, 1], vec![1, 1, 2]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let counts = split_counts(&[g(1000)], 7, Some(&mut rng));
        assert_eq!(counts[0].iter().sum::<u64>(), 1000);
    }
}

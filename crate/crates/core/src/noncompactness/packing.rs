//! Dyadic subdivision of a cube with one ball of prescribed volume per subcube.
//!
//! The ball volume is carried as `rho = t1 / |B_0|`, the ratio to the ball inscribed in the
//! cube. Every invariant of the construction is then a comparison between rationals, because
//! the unit-ball volume multiplies both sides and cancels.

use std::collections::HashSet;
use std::f64::consts::PI;

use num::{BigInt, One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::NamedCheck;
use crate::error::{Error, Result};
use crate::rational::{format_rational, from_f64, measure_serde, measure_vec_serde, to_f64, Measure};

/// Centers are listed explicitly only up to this many subcubes.
pub const MAX_MATERIALIZED_CENTERS: u64 = 1 << 12;

/// Largest supported `n * k`, keeping `2^{nk}` in a `u64`.
pub const MAX_LEVEL_BITS: u32 = 62;

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Closed axis-parallel cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    #[serde(with = "measure_vec_serde")]
    pub center: Vec<Measure>,
    #[serde(with = "measure_serde")]
    pub side: Measure,
}

impl Cube {
    pub fn new(center: Vec<Measure>, side: Measure) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::invalid("cube needs at least one coordinate"));
        }
        if !side.is_positive() {
            return Err(Error::invalid("cube side must be positive"));
        }
        Ok(Cube { center, side })
    }

    /// `[0, 1]^n`.
    pub fn unit(n: u32) -> Self {
        let half = Measure::new(BigInt::one(), BigInt::from(2));
        Cube {
            center: vec![half; n as usize],
            side: Measure::one(),
        }
    }

    pub fn dimension(&self) -> u32 {
        self.center.len() as u32
    }

    pub fn volume(&self) -> Measure {
        pow(&self.side, self.dimension())
    }

    /// Volume of the inscribed ball.
    pub fn ball_volume(&self) -> f64 {
        unit_ball_volume(self.dimension()) * (to_f64(&self.side) / 2.0).powi(self.dimension() as i32)
    }
}

fn pow(m: &Measure, n: u32) -> Measure {
    (0..n).fold(Measure::one(), |acc, _| acc * m)
}

fn dyadic(bits: u32) -> Measure {
    Measure::new(BigInt::one(), BigInt::one() << bits)
}

/// How the caller specifies the ball volume `t1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallSize {
    /// `t1 / |B_0|`, exact.
    Ratio(#[serde(with = "measure_serde")] Measure),
    /// `t1` itself; converted to a ratio through the float value of `|B_0|`.
    Volume(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Packing {
    pub dimension: u32,
    pub cube: Cube,
    /// Subdivision level `k`.
    pub level: u32,
    /// `m = 2^{nk}` subcubes and balls.
    pub count: u64,
    /// `rho = t1 / |B_0|`.
    #[serde(with = "measure_serde")]
    pub ball_ratio: Measure,
    pub t1: f64,
    pub ball_radius: f64,
    /// `tau = |B_0| / (2^n |Q|)`.
    pub tau: f64,
    /// `tau / omega_n = 4^-n`, exact.
    #[serde(with = "measure_serde")]
    pub tau_over_unit_ball: Measure,
    /// Ball centers (the subcube centers), listed when there are at most
    /// [`MAX_MATERIALIZED_CENTERS`] of them.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "serialize_centers")]
    pub centers: Option<Vec<Vec<Measure>>>,
}

fn serialize_centers<S: serde::Serializer>(
    centers: &Option<Vec<Vec<Measure>>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = centers
        .iter()
        .flatten()
        .map(|c| c.iter().map(format_rational).collect())
        .collect();
    s.collect_seq(rows)
}

impl Packing {
    /// `|Q_j| = |Q| / 2^{nk}`.
    pub fn subcube_volume(&self) -> Measure {
        self.cube.volume() * dyadic(self.dimension * self.level)
    }

    /// `|Q_E| = rho |Q|`, the cube in which each ball is inscribed.
    pub fn ball_cube_volume(&self) -> Measure {
        &self.ball_ratio * self.cube.volume()
    }

    /// `sum |E_j| / |B_0| = m rho`.
    pub fn total_ratio(&self) -> Measure {
        Measure::from_integer(BigInt::from(self.count)) * &self.ball_ratio
    }

    pub fn total_volume(&self) -> f64 {
        self.count as f64 * self.t1
    }
}

/// Level `k` with `2^{-n(k+1)} <= rho < 2^{-nk}`.
fn level_for(rho: &Measure, n: u32) -> Result<u32> {
    let mut k = 0;
    while *rho < dyadic(n * (k + 1)) {
        k += 1;
        if n * (k + 1) > MAX_LEVEL_BITS {
            return Err(Error::TooLarge(format!("subdivision level beyond 2^{MAX_LEVEL_BITS} subcubes")));
        }
    }
    Ok(k)
}

fn lattice_centers(cube: &Cube, level: u32) -> Vec<Vec<Measure>> {
    let n = cube.dimension() as usize;
    let per_axis = 1u64 << level;
    let step = &cube.side * dyadic(level);
    let half_step = &step / Measure::from_integer(BigInt::from(2));
    let lows: Vec<Measure> = cube
        .center
        .iter()
        .map(|c| c - &cube.side / Measure::from_integer(BigInt::from(2)))
        .collect();
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|axis| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    &lows[axis] + &step * Measure::from_integer(BigInt::from(i)) + &half_step
                })
                .collect()
        })
        .collect()
}

pub fn build_packing(cube: &Cube, size: &BallSize) -> Result<Packing> {
    let n = cube.dimension();
    let b0 = cube.ball_volume();
    let rho = match size {
        BallSize::Ratio(r) => r.clone(),
        BallSize::Volume(t1) => {
            if !(t1.is_finite() && *t1 > 0.0) {
                return Err(Error::domain(format!("ball volume must be positive, got {t1}")));
            }
            from_f64(t1 / b0)?
        }
    };
    if !rho.is_positive() {
        return Err(Error::domain("ball volume must be positive"));
    }
    if rho >= Measure::one() {
        return Err(Error::domain(format!(
            "ball volume must be below the inscribed ball volume {b0} (ratio {})",
            format_rational(&rho)
        )));
    }
    let level = level_for(&rho, n)?;
    let count = 1u64 << (n * level);
    let t1 = to_f64(&rho) * b0;
    let centers = (count <= MAX_MATERIALIZED_CENTERS).then(|| lattice_centers(cube, level));
    let four_n = BigInt::one() << (2 * n);
    Ok(Packing {
        dimension: n,
        cube: cube.clone(),
        level,
        count,
        ball_radius: (t1 / unit_ball_volume(n)).powf(1.0 / n as f64),
        t1,
        tau: unit_ball_volume(n) / four_n.to_f64().unwrap_or(f64::INFINITY),
        tau_over_unit_ball: Measure::new(BigInt::one(), four_n),
        ball_ratio: rho,
        centers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingReport {
    pub checks: Vec<NamedCheck>,
}

impl PackingReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&NamedCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Re-derives the packing invariants from the stored data.
pub fn verify_packing(p: &Packing) -> PackingReport {
    let n = p.dimension;
    let nk = n * p.level;
    let rho = &p.ball_ratio;
    let mut checks = Vec::new();
    let lower = dyadic(nk + n);
    let upper = dyadic(nk);
    checks.push(NamedCheck::new(
        "level",
        lower <= *rho && *rho < upper,
        format!(
            "2^-{} <= {} < 2^-{}",
            nk + n,
            format_rational(rho),
            nk
        ),
    ));
    checks.push(NamedCheck::new(
        "count",
        n == p.cube.dimension() && nk < 64 && p.count == 1u64 << nk,
        format!("m = {} for n = {n}, k = {}", p.count, p.level),
    ));
    let qe = p.ball_cube_volume();
    let qj = p.subcube_volume();
    checks.push(NamedCheck::new(
        "ball_cube_fits",
        qe < qj,
        format!("|Q_E| = {} < |Q_j| = {}", format_rational(&qe), format_rational(&qj)),
    ));
    // sum |E_j| >= tau |Q| reads m rho |B_0| >= |B_0| / 2^n
    let total = p.total_ratio();
    checks.push(NamedCheck::new(
        "measure_sum",
        total >= dyadic(n) && total < Measure::one(),
        format!("m rho = {} in [2^-{n}, 1)", format_rational(&total)),
    ));
    if let Some(centers) = &p.centers {
        checks.push(verify_centers(p, centers));
    } else {
        checks.push(NamedCheck::new(
            "centers",
            true,
            format!("implicit lattice of {} subcube midpoints", p.count),
        ));
    }
    PackingReport { checks }
}

fn verify_centers(p: &Packing, centers: &[Vec<Measure>]) -> NamedCheck {
    if centers.len() as u64 != p.count {
        return NamedCheck::new("centers", false, format!("{} centers for {} subcubes", centers.len(), p.count));
    }
    let per_axis = BigInt::one() << p.level;
    let two = Measure::from_integer(BigInt::from(2));
    let half = Measure::new(BigInt::one(), BigInt::from(2));
    let mut seen = HashSet::with_capacity(centers.len());
    for (j, c) in centers.iter().enumerate() {
        if c.len() != p.cube.center.len() {
            return NamedCheck::new("centers", false, format!("center {j} has the wrong dimension"));
        }
        let mut cell = Vec::with_capacity(c.len());
        for (x, x0) in c.iter().zip(&p.cube.center) {
            let low = x0 - &p.cube.side / &two;
            // index of the level-k cell whose midpoint is x
            let u = (x - low) * Measure::from_integer(per_axis.clone()) / &p.cube.side - &half;
            if !u.is_integer() {
                return NamedCheck::new("centers", false, format!("center {j} is not a subcube midpoint"));
            }
            let i = u.to_integer();
            if i.is_negative() || i >= per_axis {
                return NamedCheck::new("centers", false, format!("center {j} lies outside the cube"));
            }
            cell.push(i);
        }
        if !seen.insert(cell) {
            return NamedCheck::new("centers", false, format!("center {j} shares its subcube with another ball"));
        }
    }
    NamedCheck::new("centers", true, format!("{} distinct subcube midpoints", centers.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn one_dimensional_example() {
        let p = build_packing(&Cube::unit(1), &BallSize::Volume(0.2)).unwrap();
        assert_eq!(p.level, 2);
        assert_eq!(p.count, 4);
        assert!((p.total_volume() - 0.8).abs() < 1e-15);
        assert_eq!(p.tau, 0.5);
        assert!(verify_packing(&p).pass());
    }

    #[test]
    fn plane_tau() {
        let p = build_packing(&Cube::unit(2), &BallSize::Ratio(ratio(1, 10))).unwrap();
        assert!((p.tau - PI / 16.0).abs() < 1e-15);
        assert_eq!(p.tau_over_unit_ball, ratio(1, 16));
        assert!(verify_packing(&p).pass());
    }

    #[test]
    fn boundary_ratio_stays_on_its_level() {
        // rho = 2^{-n(k+1)} exactly is accepted at level k
        let p = build_packing(&Cube::unit(2), &BallSize::Ratio(ratio(1, 16))).unwrap();
        assert_eq!(p.level, 1);
        assert!(verify_packing(&p).pass());
        let p = build_packing(&Cube::unit(2), &BallSize::Ratio(ratio(1, 4))).unwrap();
        assert_eq!(p.level, 0);
    }

    #[test]
    fn rejects_oversized_balls() {
        assert!(matches!(build_packing(&Cube::unit(3), &BallSize::Ratio(int(1))), Err(Error::Domain(_))));
        let b0 = Cube::unit(3).ball_volume();
        assert!(matches!(build_packing(&Cube::unit(3), &BallSize::Volume(b0)), Err(Error::Domain(_))));
    }

    #[test]
    fn perturbed_center_is_caught() {
        let mut p = build_packing(&Cube::unit(2), &BallSize::Ratio(ratio(1, 100))).unwrap();
        let side = &p.cube.side * dyadic(p.level);
        let centers = p.centers.as_mut().unwrap();
        centers[0][0] = &centers[0][0] + side;
        let rep = verify_packing(&p);
        assert!(!rep.pass());
        assert_eq!(rep.first_failure().unwrap().name, "centers");
    }

    #[test]
    fn large_levels_stay_implicit() {
        let p = build_packing(&Cube::unit(3), &BallSize::Ratio(dyadic(40))).unwrap();
        assert!(p.centers.is_none());
        assert_eq!(p.count, 1 << 39);
        assert!(verify_packing(&p).pass());
    }
}

//! Seeded random instances for property sweeps, benches and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num::BigRational;
use serde::Serialize;

use crate::error::Result;
use crate::phi::{Majorant, PhiSpec};
use crate::rational::{int, ratio, Extent, Measure};
use crate::scalar::Scalar;
use crate::stepfn::{
    verify_disjoint_lower_bound, verify_rearrangement_inequalities, Atomized, InequalityCheck, Interval, Piece,
    StepFunction,
};

const ALPHAS: [f64; 7] = [0.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75, 1.0];
const BETAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
const LENGTHS: [f64; 4] = [0.5, 1.0, 2.0, f64::INFINITY];

/// Admissible `t^alpha log(2L/t)^beta` over a fixed parameter grid, in a fixed order.
pub fn phi_catalogue() -> Vec<PhiSpec> {
    let mut out = Vec::new();
    for &l in &LENGTHS {
        for &a in &ALPHAS {
            for &b in &BETAS {
                if let Ok(phi) = PhiSpec::power_log(a, b, l) {
                    if a + b.abs() > 0.0 && Majorant::new(&phi).is_ok() {
                        out.push(phi);
                    }
                }
            }
        }
    }
    out
}

/// Deterministic generator of step functions, families and fundamental functions.
pub struct Sampler {
    rng: ChaCha8Rng,
    catalogue: Vec<PhiSpec>,
}

/// Denominators of generated positions and values.
const GRID: i64 = 16;

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            catalogue: phi_catalogue(),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn phi(&mut self) -> PhiSpec {
        self.catalogue.choose(&mut self.rng).expect("non-empty catalogue").clone()
    }

    /// A value `k / 8`, `k` in `-32..=32` without 0.
    pub fn value<V: Scalar>(&mut self) -> V {
        let mut k = self.rng.gen_range(1..=32);
        if self.rng.gen_bool(0.3) {
            k = -k;
        }
        V::from_measure(&ratio(k, 8))
    }

    /// The part of `(0, L)` where generated functions live: all of it if it is short, else
    /// `[0, 4)`.
    fn window(length: &Extent) -> Measure {
        match length {
            Extent::Finite(l) if *l <= int(4) => l.clone(),
            _ => int(4),
        }
    }

    /// Up to `max_cells` cells with random positive lengths on multiples of `window / 16`,
    /// laid out left to right with random gaps.
    fn cells(&mut self, length: &Extent, max_cells: usize) -> Vec<Interval> {
        let window = Self::window(length);
        let unit = &window / int(GRID * max_cells as i64);
        let mut at = Measure::from_integer(0.into());
        let mut out = Vec::new();
        let count = self.rng.gen_range(1..=max_cells);
        for _ in 0..count {
            let gap = self.rng.gen_range(0..=GRID / 4);
            let len = self.rng.gen_range(1..=GRID - GRID / 4);
            let start = &at + &unit * int(gap);
            let end = &start + &unit * int(len);
            at = end.clone();
            out.push(Interval::new(start, end).expect("positive cell"));
        }
        out
    }

    /// A positioned step function with at most `max_pieces` pieces.
    pub fn step_function<V: Scalar>(&mut self, length: &Extent, max_pieces: usize) -> StepFunction<V> {
        let pieces = self
            .cells(length, max_pieces.max(1))
            .into_iter()
            .map(|iv| Piece::positioned(self.value(), iv))
            .collect();
        StepFunction::new(pieces, length.clone()).expect("cells fit in the window")
    }

    /// `count` positioned functions with pairwise disjoint supports: each cell of one layout
    /// goes to a random member, and every member gets at least one cell.
    pub fn disjoint_family<V: Scalar>(&mut self, length: &Extent, count: usize, max_pieces: usize) -> Vec<StepFunction<V>> {
        let count = count.max(1);
        let mut cells = self.cells(length, (count * max_pieces.max(1)).max(count));
        while cells.len() < count {
            cells = self.cells(length, count * max_pieces.max(1));
        }
        cells.shuffle(&mut self.rng);
        let mut owned: Vec<Vec<Piece<V>>> = vec![Vec::new(); count];
        for (i, iv) in cells.into_iter().enumerate() {
            let owner = if i < count { i } else { self.rng.gen_range(0..count) };
            let v = self.value();
            owned[owner].push(Piece::positioned(v, iv));
        }
        owned
            .into_iter()
            .map(|p| StepFunction::new(p, length.clone()).expect("cells fit in the window"))
            .collect()
    }

    /// `count` sample points in `(0, upper]` on a grid of step `upper / 256`, sorted.
    pub fn sample_times(&mut self, upper: &Measure, count: usize) -> Vec<Measure> {
        let mut ts: Vec<Measure> = (0..count)
            .map(|_| upper * ratio(self.rng.gen_range(1..=256), 256))
            .collect();
        ts.sort();
        ts
    }

    /// Values on `n` atoms of measure `1 / n`, drawn from a small range so ties occur.
    pub fn atomized<V: Scalar>(&mut self, n: usize) -> Atomized<V> {
        let values = (0..n)
            .map(|_| V::from_measure(&int(self.rng.gen_range(-6..=6))))
            .collect();
        Atomized::new(values, ratio(1, n.max(1) as i64)).expect("positive atom")
    }
}

/// Totals of a randomized sweep of the rearrangement inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalitySweep {
    pub seed: u64,
    pub pairs: usize,
    pub points: usize,
    pub disjoint_sizes: Vec<usize>,
    pub checks: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<InequalityCheck>,
}

/// For each of `pairs` random exact pairs `(f, g)` on `(0, 4)`: both subadditivity inequalities
/// at `points` sample times, and the disjoint lower bound for a random family of each size in
/// `disjoint_sizes`.
pub fn inequality_sweep(seed: u64, pairs: usize, points: usize, disjoint_sizes: &[usize]) -> Result<InequalitySweep> {
    let mut s = Sampler::new(seed);
    let l = Extent::Finite(int(4));
    let mut out = InequalitySweep {
        seed,
        pairs,
        points,
        disjoint_sizes: disjoint_sizes.to_vec(),
        checks: 0,
        failures: 0,
        first_failure: None,
    };
    let mut record = |checks: Vec<InequalityCheck>| {
        for c in checks {
            out.checks += 1;
            if !c.pass {
                out.failures += 1;
                out.first_failure.get_or_insert(c);
            }
        }
    };
    for _ in 0..pairs {
        let f: StepFunction<BigRational> = s.step_function(&l, 6);
        let g: StepFunction<BigRational> = s.step_function(&l, 6);
        let ts = s.sample_times(&int(4), points);
        record(verify_rearrangement_inequalities(&f, &g, &ts)?.checks);
        for &n in disjoint_sizes {
            let fam: Vec<StepFunction<BigRational>> = s.disjoint_family(&l, n, 3);
            let ts = s.sample_times(&ratio(4, n as i64), points);
            record(verify_disjoint_lower_bound(&fam, &ts)?.checks);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::Fundamental;
    use crate::stepfn::disjoint_sum;

    #[test]
    fn catalogue_is_admissible_and_varied() {
        let c = phi_catalogue();
        assert!(c.len() > 40);
        assert!(c.iter().any(|p| p.length().is_infinite()));
    }

    #[test]
    fn same_seed_same_samples() {
        let l = Extent::Finite(int(1));
        let a: StepFunction<f64> = Sampler::new(3).step_function(&l, 6);
        let b: StepFunction<f64> = Sampler::new(3).step_function(&l, 6);
        assert_eq!(a, b);
    }

    #[test]
    fn small_sweep_is_clean() {
        let a = inequality_sweep(1, 20, 10, &[2, 3]).unwrap();
        assert_eq!(a.failures, 0);
        // pairs that happen to be disjoint add a third block of checks
        assert!(a.checks >= 20 * (2 * 10 + 10 + 10));
        assert_eq!(a, inequality_sweep(1, 20, 10, &[2, 3]).unwrap());
    }

    #[test]
    fn families_are_disjoint() {
        let mut s = Sampler::new(11);
        for n in 1..6 {
            let fam: Vec<StepFunction<f64>> = s.disjoint_family(&Extent::Infinite, n, 3);
            assert_eq!(fam.len(), n);
            assert!(fam.iter().all(|f| !f.pieces().is_empty()));
            assert!(disjoint_sum(&fam).is_ok());
        }
    }
}

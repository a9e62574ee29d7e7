//! Certificates and constructions against independent recomputation.

use marclab::noncompactness::{
    alt_witness_params, build_packing, distance_exclusion_bound, distance_lower_estimate, separation_lower_bound,
    shrinking_driver, unit_ball_volume, verify_alt_witness_params, verify_general_lower_certificate, verify_packing,
    BallSize, Cube, GeneralLowerCertificate, IndicatorPacking, ShrinkingEntry,
};
use marclab::rational::{dyadic, int, ratio, to_f64};
use marclab::superadditivity::gen_counterexample_m;
use marclab::{norm, Extent, Interval, NumericPolicy, PhiSpec, Space, StepFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn packing_invariants_on_a_grid() {
    for n in 1..=3u32 {
        let cube = Cube::unit(n);
        let b0 = unit_ball_volume(n) / 2f64.powi(n as i32);
        for j in 1..=12u32 {
            for step in 0..4 {
                // ratios spread over [2^-j, 2^-(j-1))
                let rho = dyadic(j) * ratio(8 + 2 * step, 8);
                if rho >= int(1) {
                    continue;
                }
                let p = build_packing(&cube, &BallSize::Ratio(rho.clone())).unwrap();
                assert!(verify_packing(&p).pass(), "n = {n}, rho = {rho}");
                let t1 = to_f64(&rho) * b0;
                let k = p.level as i32;
                let nf = n as i32;
                assert!(b0 / 2f64.powi(nf * (k + 1)) <= t1 * (1.0 + 1e-15));
                assert!(t1 < b0 / 2f64.powi(nf * k));
                assert_eq!(p.count, 1u64 << (n * p.level));
                let total = p.count as f64 * t1;
                assert!(total >= p.tau * (1.0 - 1e-12) && total < b0);
                // the cube circumscribing each ball fits in its subcube
                let side = 2.0 * p.ball_radius;
                assert!(side <= 0.5f64.powi(k) * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn boundary_ratio_takes_the_lower_level() {
    let p = build_packing(&Cube::unit(2), &BallSize::Ratio(dyadic(6))).unwrap();
    assert_eq!(p.level, 2);
    assert!(verify_packing(&p).pass());
}

proptest! {
    #[test]
    fn exclusion_bound_separates(norm_t in 0.1f64..10.0, r in 0.01f64..5.0, c in 1.0f64..4.0,
                                 extra in 1e-6f64..5.0, tf in 0.0f64..1.0) {
        let bound = distance_exclusion_bound(norm_t, r, c).unwrap();
        prop_assert!(distance_exclusion_bound(norm_t * 1.1, r, c).unwrap() >= bound);
        prop_assert!(distance_exclusion_bound(norm_t, r * 1.1, c).unwrap() >= bound);
        prop_assert!(distance_exclusion_bound(norm_t, r, c * 1.1).unwrap() >= bound);
        let g = bound + extra;
        prop_assert!(distance_lower_estimate(g, tf * norm_t, c) > r);
    }
}

/// Smallest radius covering `d` by `k` centers chosen among the points.
fn k_center_radius(d: &[Vec<f64>], k: usize) -> f64 {
    let n = d.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let radius = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|c| mask >> c & 1 == 1)
                    .map(|c| d[i][c])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        best = best.min(radius);
    }
    best
}

#[test]
fn separation_bound_below_k_center_radius() {
    let phi = PhiSpec::power(0.5, 1.0).unwrap();
    let p = NumericPolicy::default();
    let fam = gen_counterexample_m(&phi, 8, 1.0, &p).unwrap();
    let pts = &fam.members;
    for space in [Space::SmallM, Space::BigM] {
        let bound = separation_lower_bound(pts, &phi, space, &p).unwrap();
        let d: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| norm(&a.add(&b.scale(&-1.0)).unwrap(), &phi, space, &p).value)
                    .collect()
            })
            .collect();
        for k in 1..=3 {
            assert!(k_center_radius(&d, k) >= bound, "{space} k = {k}");
        }
        // unit members: the bound cannot exceed the embedding norm
        assert!(bound <= 1.0 + 1e-9);
    }
    let same = vec![pts[0].clone(), pts[0].clone()];
    assert_eq!(separation_lower_bound(&same, &phi, Space::SmallM, &p).unwrap(), 0.0);
}

#[test]
fn shrinking_indicators_reach_one() {
    let phi = PhiSpec::power(0.5, 1.0).unwrap();
    let p = NumericPolicy::default();
    let entries: Vec<ShrinkingEntry> = (1..=10)
        .map(|j| {
            let r = dyadic(j);
            let h = 1.0 / to_f64(&r).sqrt();
            let f = StepFunction::indicator(h, Interval::new(int(0), r.clone()).unwrap(), Extent::Finite(int(1))).unwrap();
            ShrinkingEntry {
                x_norm: 1.0,
                y_norm: norm(&f, &phi, Space::SmallM, &p).value,
                radius: to_f64(&r) / 2.0,
            }
        })
        .collect();
    assert!(shrinking_driver(&entries, 1.0 - 1e-12, Some(1.0)).pass());
}

#[test]
fn alt_parameters_plug_back_on_random_instances() {
    let p = NumericPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let phis = [
        PhiSpec::power(0.5, 1.0).unwrap(),
        PhiSpec::power(2.0, 1.0).unwrap(),
        PhiSpec::power(1.0, 1.0).unwrap(),
        PhiSpec::power(0.25, f64::INFINITY).unwrap(),
        PhiSpec::power_log(0.5, 1.0, 1.0).unwrap(),
    ];
    let mut done = 0;
    while done < 20 {
        let phi = &phis[rng.gen_range(0..phis.len())];
        let space = if rng.gen_bool(0.5) { Space::SmallM } else { Space::BigM };
        let norm_t = rng.gen_range(0.5..3.0);
        let lambda = norm_t * rng.gen_range(0.2..0.95);
        let m = rng.gen_range(1..10);
        let Ok(params) = alt_witness_params(phi, space, norm_t, lambda, m, &p) else {
            // outside the hypotheses: t^2 is not admissible in M, identity has no growth in m
            continue;
        };
        let checks = verify_alt_witness_params(phi, &params, &p).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{phi:?} {space}: {checks:?}");
        done += 1;
    }
}

#[test]
fn general_verdict_is_deterministic() {
    let phi = PhiSpec::power(0.5, 1.0).unwrap();
    let cert = GeneralLowerCertificate {
        space: Space::SmallM,
        phi: phi.clone(),
        tau: 0.5,
        s_measure: 1.0,
        t0: Some(0.5),
        r: 1.0,
        norm_t: 2.0,
        pigeonhole_seed: 3,
    };
    let gen = IndicatorPacking::new(Cube::unit(1), phi);
    let run = || {
        let v = verify_general_lower_certificate(&cert, &gen, 4, &[0.5, 0.1], &NumericPolicy::default()).unwrap();
        serde_json::to_string(&v).unwrap()
    };
    let first = run();
    assert!(first.contains(r#""verdict":"PASS""#));
    assert_eq!(first, run());
}

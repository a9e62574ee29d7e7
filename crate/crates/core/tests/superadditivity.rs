//! Counterexample families checked against norms computed by hand.

use marclab::rational::to_f64;
use marclab::superadditivity::{
    gen_counterexample_big_m, gen_counterexample_m, l1_equivalence_check, superadditivity_defect,
};
use marclab::sample::Sampler;
use marclab::{Error, Extent, Fundamental, NumericPolicy, PhiSpec, StepFunction};

fn sqrt_log() -> PhiSpec {
    PhiSpec::power_log(0.5, 0.0, 1.0).unwrap()
}

/// `|sum|_m` directly: `sum*` takes the value `1/phi(r_k)` up to `r_1 + ... + r_k`, so the
/// supremum over that step sits at its right end.
fn sum_m_norm(radii: &[f64], phi: &PhiSpec) -> f64 {
    let mut order: Vec<f64> = radii.to_vec();
    order.sort_by(|a, b| b.total_cmp(a));
    // heights 1/phi(r) increase as r shrinks, so the rearrangement lists the smallest radius first
    order.reverse();
    let mut at = 0.0;
    let mut best: f64 = 0.0;
    for r in order {
        at += r;
        best = best.max(phi.value(at.min(phi.length() * (1.0 - 1e-15))) / phi.value(r));
    }
    best
}

#[test]
fn m_family_norms_by_hand() {
    let phi = sqrt_log();
    let p = NumericPolicy::default();
    for m in 2..=12 {
        let fam = gen_counterexample_m(&phi, m, 1.0, &p).unwrap();
        let radii: Vec<f64> = fam.radii.iter().map(to_f64).collect();
        let rep = superadditivity_defect(&fam, &phi, 1.0, &p).unwrap();
        for n in &rep.member_norms {
            assert!((n - 1.0).abs() < 1e-9);
        }
        let by_hand = sum_m_norm(&radii, &phi);
        assert!((rep.sum_norm - by_hand).abs() < 1e-9, "m = {m}: {} vs {by_hand}", rep.sum_norm);
        assert!(rep.sum_norm <= 2f64.sqrt() + 1e-9);
        assert!(rep.defect >= m as f64 / 2f64.sqrt() - 1e-6);
    }
}

#[test]
fn big_m_family_stays_bounded() {
    let phi = sqrt_log();
    let p = NumericPolicy::default();
    let mut last = 0.0;
    for m in 2..=12 {
        let fam = gen_counterexample_big_m(&phi, m, &p).unwrap();
        let rep = superadditivity_defect(&fam, &phi, 1.0, &p).unwrap();
        assert!(rep.member_norms.iter().all(|n| (n - 1.0).abs() < 1e-9));
        assert!(rep.sum_norm <= 4.0 + 1e-9);
        assert!(rep.defect > last);
        last = rep.defect;
        assert!(fam.violations(&phi).is_empty());
    }
}

#[test]
fn identity_is_refused_with_its_reason() {
    let phi = PhiSpec::power(1.0, 1.0).unwrap();
    match gen_counterexample_big_m(&phi, 3, &NumericPolicy::default()) {
        Err(Error::Precondition(msg)) => assert!(msg.contains("positive and finite"), "{msg}"),
        other => panic!("expected a precondition error, got {other:?}"),
    }
}

#[test]
fn l1_equivalence_for_identity_like_phi() {
    let phi = PhiSpec::tabulated(vec![0.25, 0.5], vec![0.5, 0.625], 1.0).unwrap().through_origin();
    let mut s = Sampler::new(9);
    let fs: Vec<StepFunction<f64>> = (0..30).map(|_| s.step_function(&Extent::from_f64(1.0).unwrap(), 5)).collect();
    let rep = l1_equivalence_check(&phi, &fs, &NumericPolicy::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.kappa1_bound > 0.0 && rep.kappa2_bound.is_finite());
}

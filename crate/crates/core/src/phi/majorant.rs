//! The least quasiconcave majorant
//! `phi~(t) = t * sup_{s >= t} (sup_{u <= s} phi(u)) / s`.
//!
//! With knots `c_1 < ... < c_n` the running maximum `Phi` is known exactly at every knot, and
//! on each piece `Phi / s` is maximised at the piece's left end (where `Phi` is either constant,
//! so `Phi/s` decreases, or equals `phi`, whose ratio is monotone on the piece). Hence the outer
//! supremum over `s >= t` only needs `Phi(t)/t`, the knots above `t` and the right-end limit.

use super::{Fundamental, PhiSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Majorant {
    phi: PhiSpec,
    knots: Vec<f64>,
    /// `Phi(c_i)`
    running: Vec<f64>,
    /// `suffix[i] = max(Phi(c_j)/c_j for j >= i, tail)`; `suffix[n] = tail`.
    suffix: Vec<f64>,
    zero: f64,
    sup_phi: f64,
    tail: f64,
}

impl Majorant {
    pub fn new(phi: &PhiSpec) -> Result<Self> {
        let zero = phi.limit_at_zero();
        if !zero.is_finite() {
            return Err(Error::NotAdmissible("phi is unbounded near 0".into()));
        }
        let knots = phi.knots();
        let mut running = Vec::with_capacity(knots.len());
        let mut acc = zero;
        for &c in &knots {
            acc = acc.max(phi.value(c));
            running.push(acc);
        }
        let end = phi.limit_at_end();
        let sup_phi = acc.max(end);
        let l = phi.length();
        let tail = if l.is_finite() {
            sup_phi / l
        } else if end.is_finite() {
            0.0
        } else {
            phi.slope_at_end()
        };
        if !tail.is_finite() {
            return Err(Error::NotAdmissible("phi(t)/t is unbounded at infinity".into()));
        }
        let mut suffix = vec![tail; knots.len() + 1];
        for i in (0..knots.len()).rev() {
            suffix[i] = (running[i] / knots[i]).max(suffix[i + 1]);
        }
        Ok(Majorant {
            phi: phi.clone(),
            knots,
            running,
            suffix,
            zero,
            sup_phi,
            tail,
        })
    }

    pub fn base(&self) -> &PhiSpec {
        &self.phi
    }

    /// `sup_{0 < u <= t} phi(u)`
    pub fn running_max(&self, t: f64) -> f64 {
        let i = self.knots.partition_point(|&c| c <= t);
        let before = if i == 0 { self.zero } else { self.running[i - 1] };
        before.max(self.phi.value(t))
    }

    /// `lim_{t -> 0+} phi(t) / phi~(t)`.
    pub fn base_ratio_at_zero(&self) -> f64 {
        if self.zero > 0.0 {
            return 1.0;
        }
        let s0 = self.phi.slope_at_zero();
        if s0.is_infinite() {
            1.0
        } else if s0 == 0.0 {
            0.0
        } else {
            s0 / s0.max(self.suffix[0])
        }
    }
}

impl Fundamental for Majorant {
    fn length(&self) -> f64 {
        self.phi.length()
    }

    fn value(&self, t: f64) -> f64 {
        let i = self.knots.partition_point(|&c| c <= t);
        let own = self.running_max(t);
        own.max(t * self.suffix[i])
    }

    fn knots(&self) -> Vec<f64> {
        Vec::new()
    }

    fn limit_at_zero(&self) -> f64 {
        self.zero
    }

    fn limit_at_end(&self) -> f64 {
        if self.length().is_infinite() && self.tail > 0.0 {
            f64::INFINITY
        } else {
            self.sup_phi
        }
    }

    fn slope_at_zero(&self) -> f64 {
        if self.zero > 0.0 {
            return f64::INFINITY;
        }
        self.phi.slope_at_zero().max(self.suffix[0])
    }

    fn slope_at_end(&self) -> f64 {
        self.tail
    }
}

/// `phi~(t)` for a single `t in (0, L)`.
pub fn least_quasiconcave_majorant(phi: &PhiSpec, t: f64) -> Result<f64> {
    phi.eval(t)?;
    Ok(Majorant::new(phi)?.value(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over a dense grid of `(0, L)`.
    fn grid_majorant(phi: &PhiSpec, t: f64, n: usize) -> f64 {
        let l = phi.length();
        let mut run = phi.limit_at_zero();
        let mut at_t = None;
        let mut best = 0.0f64;
        for i in 1..n {
            let s = l * i as f64 / n as f64;
            if s > t && at_t.is_none() {
                let r = run.max(phi.value(t));
                at_t = Some(r);
                best = best.max(r / t);
            }
            run = run.max(phi.value(s));
            if s > t {
                best = best.max(run / s);
            }
        }
        best = best.max(run.max(phi.limit_at_end()) / l);
        t * best
    }

    #[test]
    fn quasiconcave_is_fixed() {
        let phi = PhiSpec::power(0.5, 1.0).unwrap();
        let maj = Majorant::new(&phi).unwrap();
        for t in [1e-9, 0.01, 0.3, 0.99] {
            assert!((maj.value(t) - phi.value(t)).abs() <= 1e-15 * phi.value(t));
        }
    }

    #[test]
    fn superlinear_power_becomes_linear() {
        // t^2 on (0,1): majorant is t * sup_{s >= t} s = t
        let phi = PhiSpec::power(2.0, 1.0).unwrap();
        for t in [0.001, 0.5, 0.9] {
            assert!((least_quasiconcave_majorant(&phi, t).unwrap() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn bump_is_flattened() {
        // t^(1/2) log(2/t) rises to a peak then falls; the majorant stays at the peak
        let phi = PhiSpec::power_log(0.5, 1.0, 1.0).unwrap();
        let maj = Majorant::new(&phi).unwrap();
        let peak_t = 2.0 * (-2.0f64).exp();
        let peak = phi.value(peak_t);
        assert!((maj.value(0.9) - peak).abs() < 1e-14);
        for t in [0.01, 0.2, 0.5, 0.95] {
            let g = grid_majorant(&phi, t, 200_000);
            assert!(maj.value(t) >= g * (1.0 - 1e-12));
            assert!(maj.value(t) <= g * (1.0 + 1e-5), "t={t}: {} vs {g}", maj.value(t));
        }
    }

    #[test]
    fn tabulated_dip() {
        let phi = PhiSpec::tabulated(vec![0.1, 0.2, 0.3], vec![1.0, 0.5, 2.0], 1.0).unwrap();
        let maj = Majorant::new(&phi).unwrap();
        for t in [0.05, 0.15, 0.25, 0.6] {
            let g = grid_majorant(&phi, t, 100_000);
            assert!((maj.value(t) - g).abs() < 1e-4 * g, "t={t}");
        }
    }

    #[test]
    fn unbounded_near_zero_is_rejected() {
        let phi = PhiSpec::power(-0.5, 1.0).unwrap();
        assert!(matches!(Majorant::new(&phi), Err(Error::NotAdmissible(_))));
        let phi = PhiSpec::power(2.0, f64::INFINITY).unwrap();
        assert!(matches!(Majorant::new(&phi), Err(Error::NotAdmissible(_))));
    }
}

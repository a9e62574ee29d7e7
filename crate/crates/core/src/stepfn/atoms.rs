//! Functions on `n` equal atoms and exhaustive subset suprema over them.

use num::Signed;

use super::StepFunction;
use crate::error::{Error, Result};
use crate::rational::{int, Extent, Measure};
use crate::scalar::Scalar;

/// Subset enumeration is exponential; beyond this many atoms the oracles refuse.
pub const MAX_ORACLE_ATOMS: usize = 20;

/// `n` atoms of equal measure `atom`, laid out consecutively from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Atomized<V> {
    pub values: Vec<V>,
    pub atom: Measure,
}

impl<V: Scalar> Atomized<V> {
    pub fn new(values: Vec<V>, atom: Measure) -> Result<Self> {
        if !atom.is_positive() {
            return Err(Error::invalid("atoms need positive measure"));
        }
        Ok(Atomized { values, atom })
    }

    pub fn to_step_function(&self, length: Extent) -> Result<StepFunction<V>> {
        StepFunction::laid_out(self.values.iter().map(|v| (v.clone(), self.atom.clone())).collect(), length)
    }

    /// Tiny-length step function with exactly the atom layout; `L` is the total measure.
    pub fn to_step_function_tight(&self) -> Result<StepFunction<V>> {
        self.to_step_function(Extent::Finite(&self.atom * int(self.values.len() as i64)))
    }

    fn subsets(&self, t: usize) -> Result<impl Iterator<Item = u32> + '_> {
        let n = self.values.len();
        if n > MAX_ORACLE_ATOMS {
            return Err(Error::TooLarge(format!("{n} atoms exceed the exhaustive limit {MAX_ORACLE_ATOMS}")));
        }
        if t == 0 || t > n {
            return Err(Error::domain(format!("subset size {t} must lie in 1..={n}")));
        }
        Ok((0u32..(1u32 << n)).filter(move |m| m.count_ones() as usize == t))
    }

    /// `sup_{|E| = t atoms} essinf_E |f|`, which equals `f*(t-)` at `t` atoms' measure.
    pub fn essinf_sup(&self, t: usize) -> Result<V> {
        let mut best: Option<V> = None;
        for mask in self.subsets(t)? {
            let low = (0..self.values.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.values[i].abs())
                .reduce(|a, b| a.min_of(b))
                .expect("non-empty subset");
            best = Some(match best {
                Some(b) => b.max_of(low),
                None => low,
            });
        }
        Ok(best.expect("at least one subset"))
    }

    /// `sup_{|E| = t atoms} int_E |f|`, which equals `t f**(t)` at `t` atoms' measure.
    pub fn integral_sup(&self, t: usize) -> Result<V> {
        let mut best: Option<V> = None;
        for mask in self.subsets(t)? {
            let sum = (0..self.values.len())
                .filter(|i| mask >> i & 1 == 1)
                .fold(V::zero(), |acc, i| acc + self.values[i].abs());
            best = Some(match best {
                Some(b) => b.max_of(sum),
                None => sum,
            });
        }
        Ok(best.expect("at least one subset") * V::from_measure(&self.atom))
    }

    /// Measure of `t` atoms.
    pub fn atoms(&self, t: usize) -> Measure {
        &self.atom * int(t as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn sample() -> Atomized<BigRational> {
        Atomized::new([3, 1, 4, 1, 5, 9].iter().map(|&v| int(v)).collect(), int(1)).unwrap()
    }

    #[test]
    fn six_atoms() {
        let a = sample();
        assert_eq!(a.essinf_sup(2).unwrap(), int(5));
        assert_eq!(a.integral_sup(2).unwrap(), int(14));
        assert_eq!(a.essinf_sup(6).unwrap(), int(1));
    }

    #[test]
    fn matches_direct_rearrangement() {
        let a = sample();
        let f = a.to_step_function_tight().unwrap();
        let star = f.rearrangement();
        let max = f.maximal_rearrangement();
        for t in 1..=6 {
            let m = a.atoms(t);
            assert_eq!(a.essinf_sup(t).unwrap(), star.left_limit(&m).unwrap());
            assert_eq!(a.integral_sup(t).unwrap(), max.integral_to(&m).unwrap());
        }
    }

    #[test]
    fn limits() {
        let a = Atomized::new(vec![1.0; 21], int(1)).unwrap();
        assert!(matches!(a.essinf_sup(2), Err(Error::TooLarge(_))));
        assert!(matches!(sample().essinf_sup(0), Err(Error::Domain(_))));
        assert!(matches!(sample().integral_sup(7), Err(Error::Domain(_))));
    }
}

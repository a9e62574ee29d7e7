//! Rearrangements, Marcinkiewicz quasinorms of step functions and noncompactness certificates.

// `!(x > 0.0)` style guards are how NaN gets rejected alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod noncompactness;
pub mod norms;
pub mod numeric;
pub mod phi;
pub mod policy;
pub mod rational;
pub mod sample;
pub mod scalar;
pub mod stepfn;
pub mod superadditivity;

pub use error::{Error, Result};
pub use phi::{Fundamental, Majorant, PhiSpec, Space};
pub use policy::NumericPolicy;
pub use rational::{Extent, Measure};
pub use scalar::Scalar;
pub use stepfn::{disjoint_sum, DecreasingProfile, Interval, MaximalProfile, Piece, StepFunction};
pub use norms::{norm, norm_big_m_phi, norm_m_phi, NormMethod, NormResult};
pub use noncompactness::{Outcome, Verdict};

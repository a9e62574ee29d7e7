use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resolution knobs shared by every numerical supremum/infimum in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    /// Samples taken on each monotone piece before refinement.
    pub grid_points_per_piece: usize,
    /// Relative bracket width at which golden-section refinement stops.
    pub tol_rel: f64,
    /// Size of dense brute-force grids used by oracles.
    pub oracle_grid: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        NumericPolicy {
            grid_points_per_piece: 64,
            tol_rel: 1e-9,
            oracle_grid: 100_000,
        }
    }
}

impl NumericPolicy {
    pub fn new(grid_points_per_piece: usize, tol_rel: f64, oracle_grid: usize) -> Result<Self> {
        let policy = NumericPolicy {
            grid_points_per_piece,
            tol_rel,
            oracle_grid,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_rel > 0.0 && self.tol_rel.is_finite()) {
            return Err(Error::invalid(format!("tol_rel must be positive, got {}", self.tol_rel)));
        }
        if self.grid_points_per_piece < 8 {
            return Err(Error::invalid(format!(
                "grid_points_per_piece must be at least 8, got {}",
                self.grid_points_per_piece
            )));
        }
        if self.oracle_grid == 0 {
            return Err(Error::invalid("oracle_grid must be positive"));
        }
        Ok(())
    }

    /// Same policy with twice the sampling density.
    pub fn refined(&self) -> Self {
        NumericPolicy {
            grid_points_per_piece: self.grid_points_per_piece * 2,
            ..*self
        }
    }

    pub fn with_tol(self, tol_rel: f64) -> Self {
        NumericPolicy { tol_rel, ..self }
    }
}

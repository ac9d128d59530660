use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds that turn exact identities into floating-point checks.
///
/// Every "=" between matrices goes through [`TolerancePolicy::eq_tol`], every
/// rank decision through [`TolerancePolicy::rank_tol`], unit singular values
/// through [`TolerancePolicy::one_tol`] and every "≥ 0" through
/// [`TolerancePolicy::psd_tol`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Relative Frobenius threshold for matrix equality.
    pub eq_tol: f64,
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tol: f64,
    /// Absolute band `|σ - 1|` accepted as a unit singular value.
    pub one_tol: f64,
    /// Minimum-eigenvalue slack for positive semidefiniteness.
    pub psd_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            eq_tol: 1e-9,
            rank_tol: 1e-8,
            one_tol: 1e-8,
            psd_tol: 1e-10,
        }
    }
}

impl TolerancePolicy {
    pub fn with_eq_tol(mut self, eq_tol: f64) -> Self {
        self.eq_tol = eq_tol;
        self
    }

    pub fn with_rank_tol(mut self, rank_tol: f64) -> Self {
        self.rank_tol = rank_tol;
        self
    }

    pub fn with_one_tol(mut self, one_tol: f64) -> Self {
        self.one_tol = one_tol;
        self
    }

    /// Checks positivity of all thresholds and that `eq_tol` is not below
    /// machine precision for matrices of dimension `max_dim`.
    pub fn validate(&self, max_dim: usize) -> Result<()> {
        for (name, value) in [
            ("eq_tol", self.eq_tol),
            ("rank_tol", self.rank_tol),
            ("one_tol", self.one_tol),
            ("psd_tol", self.psd_tol),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be a positive finite number, got {value}"
                )));
            }
        }
        let floor = f64::EPSILON * max_dim.max(1) as f64;
        if self.eq_tol < floor {
            return Err(Error::InvalidTolerance(format!(
                "eq_tol {} is below machine precision times dimension ({floor:.3e})",
                self.eq_tol
            )));
        }
        Ok(())
    }

    /// `residual ≤ eq_tol · max(1, scale)`.
    pub fn is_small(&self, residual: f64, scale: f64) -> bool {
        residual <= self.eq_tol * scale.max(1.0)
    }
}

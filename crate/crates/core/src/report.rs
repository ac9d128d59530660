use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;

/// Verdict record for cone, ordering and maximality checks.
///
/// `verdict` is `None` when a numerical procedure could not decide.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub verdict: Option<bool>,
    pub residuals: BTreeMap<String, f64>,
    pub witnesses: Vec<CMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConeReport {
    pub fn new(verdict: Option<bool>) -> Self {
        Self {
            verdict,
            ..Self::default()
        }
    }

    /// Records a residual, clamping negatives to zero.
    pub fn residual(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.residuals.insert(name.into(), value.max(0.0));
        self
    }

    pub fn witness(&mut self, m: CMatrix) -> &mut Self {
        self.witnesses.push(m);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

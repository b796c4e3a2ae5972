use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskKind {
    /// max_j f_j / u_j
    WeightedMax,
    /// min_j f_j / u_j
    WeightedMin,
    /// Σ_j f_j / u_j
    WeightedSum,
    /// max_j f_j; the weights are ignored
    Sup,
}

/// Finite-dimensional homogeneous risk functional ℓ with threshold vector u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskFunctional {
    kind: RiskKind,
    weights: Vec<f64>,
}

impl RiskFunctional {
    pub fn new(kind: RiskKind, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DimensionMismatch("risk functional needs at least one weight".into()));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("risk functional weights must be positive, got {w}")));
        }
        Ok(Self { kind, weights })
    }

    pub fn weighted_max(u: Vec<f64>) -> Result<Self> {
        Self::new(RiskKind::WeightedMax, u)
    }

    pub fn sup(dim: usize) -> Result<Self> {
        Self::new(RiskKind::Sup, vec![1.0; dim])
    }

    pub fn kind(&self) -> RiskKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn eval(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.weights.len());
        let scaled = f.iter().zip(&self.weights).map(|(x, u)| x / u);
        match self.kind {
            RiskKind::WeightedMax => scaled.fold(f64::NEG_INFINITY, f64::max),
            RiskKind::WeightedMin => scaled.fold(f64::INFINITY, f64::min),
            RiskKind::WeightedSum => scaled.sum(),
            RiskKind::Sup => f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// c_ℓ with ℓ(f) ≤ c_ℓ·‖f‖_∞ for nonnegative f.
    pub fn bound_coeff(&self) -> f64 {
        let u = &self.weights;
        match self.kind {
            RiskKind::WeightedMax => 1.0 / u.iter().copied().fold(f64::INFINITY, f64::min),
            RiskKind::WeightedMin => 1.0 / u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            RiskKind::WeightedSum => u.iter().map(|x| 1.0 / x).sum(),
            RiskKind::Sup => 1.0,
        }
    }
}

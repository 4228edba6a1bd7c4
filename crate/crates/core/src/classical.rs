//! Gaussian RBF baseline, k(x, y) = exp(−γ‖x − y‖²).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbfSpec {
    pub gamma: f64,
}

impl RbfSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!(
                "rbf gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// γ = 1/d, the default for `d` scaled features.
    pub fn for_dimension(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("rbf default gamma needs d >= 1"));
        }
        Self::new(1.0 / d as f64)
    }

    pub fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "rbf kernel on vectors of length {} and {}",
                x.len(),
                y.len()
            )));
        }
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((-self.gamma * sq).exp())
    }
}

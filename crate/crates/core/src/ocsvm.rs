//! ν one-class SVM on a precomputed kernel.
//!
//! Dual problem:
//!
//! ```text
//! minimise   ½ αᵀKα
//! subject to 0 ≤ α_i ≤ 1/(ν n),  Σ α_i = 1
//! ```
//!
//! solved by pairwise (SMO) updates with second-order working-set selection.
//! The decision function is f(x) = Σ α_i k(x_i, x) − ρ; negative means anomaly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramMatrix;

pub const DEFAULT_NU: f64 = 0.1;
/// Stopping threshold on the maximal KKT violation.
pub const KKT_TOL: f64 = 1e-6;
pub const MAX_ITER: usize = 100_000;
/// α values within this distance of a bound count as at the bound.
pub const ALPHA_TOL: f64 = 1e-8;

const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OcSvmModel {
    pub nu: f64,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub support_indices: Vec<usize>,
}

/// Diagnostics of one solver run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub max_violation: f64,
    pub converged: bool,
    pub objective: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Normal,
    Anomaly,
}

pub fn train(gram: &GramMatrix, nu: f64) -> Result<OcSvmModel> {
    train_with_stats(gram, nu).map(|(m, _)| m)
}

pub fn train_with_stats(gram: &GramMatrix, nu: f64) -> Result<(OcSvmModel, SolverStats)> {
    let n = gram.n();
    if !(nu.is_finite() && nu > 0.0 && nu <= 1.0) {
        return Err(Error::invalid(format!("nu must lie in (0, 1], got {nu}")));
    }
    if nu * (n as f64) < 1.0 - 1e-12 {
        return Err(Error::invalid(format!(
            "nu = {nu} is infeasible for {n} samples (needs nu >= 1/n)"
        )));
    }
    let min_eigenvalue = gram.min_eigenvalue();
    if min_eigenvalue < -crate::gram::PSD_TOL {
        log::warn!("gram matrix is not PSD (min eigenvalue {min_eigenvalue:e}); solving anyway");
    }

    let upper = (1.0 / (nu * n as f64)).min(1.0);
    // uniform start is feasible for every admissible nu
    let mut alpha = vec![1.0 / n as f64; n];
    let mut grad: Vec<f64> = (0..n)
        .map(|i| gram.row(i).iter().zip(&alpha).map(|(k, a)| k * a).sum())
        .collect();

    let mut iterations = 0;
    let mut max_violation;
    loop {
        // i: steepest candidate to grow (smallest gradient among α_i < C)
        let mut i_sel = None;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            if alpha[t] < upper && grad[t] < g_min {
                g_min = grad[t];
                i_sel = Some(t);
            }
        }
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if alpha[t] > 0.0 && grad[t] > g_max {
                g_max = grad[t];
            }
        }
        max_violation = g_max - g_min;
        let Some(i) = i_sel else { break };
        if max_violation < KKT_TOL || iterations >= MAX_ITER {
            break;
        }

        // j: second-order choice among shrinkable α_j with G_j > G_i
        let mut j_sel = None;
        let mut best = f64::NEG_INFINITY;
        for t in 0..n {
            if alpha[t] > 0.0 && grad[t] > g_min {
                let diff = grad[t] - g_min;
                let eta = (gram.get(i, i) + gram.get(t, t) - 2.0 * gram.get(i, t)).max(TAU);
                let gain = diff * diff / eta;
                if gain > best {
                    best = gain;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else { break };

        let eta = (gram.get(i, i) + gram.get(j, j) - 2.0 * gram.get(i, j)).max(TAU);
        let step = ((grad[j] - grad[i]) / eta)
            .min(upper - alpha[i])
            .min(alpha[j]);
        if step <= 0.0 {
            break;
        }
        alpha[i] += step;
        alpha[j] -= step;
        // snap onto the bounds so later membership tests are exact
        if upper - alpha[i] <= ALPHA_TOL * 1e-3 {
            alpha[i] = upper;
        }
        if alpha[j] <= ALPHA_TOL * 1e-3 {
            alpha[j] = 0.0;
        }
        let (ri, rj) = (gram.row(i), gram.row(j));
        for t in 0..n {
            grad[t] += step * (ri[t] - rj[t]);
        }
        iterations += 1;
    }

    // refresh the gradient exactly before computing the offset
    let grad: Vec<f64> = (0..n)
        .map(|i| gram.row(i).iter().zip(&alpha).map(|(k, a)| k * a).sum())
        .collect();
    let support_indices: Vec<usize> = (0..n).filter(|&i| alpha[i] > ALPHA_TOL).collect();
    let interior: Vec<usize> = support_indices
        .iter()
        .copied()
        .filter(|&i| alpha[i] < upper - ALPHA_TOL)
        .collect();
    let margin = if interior.is_empty() {
        &support_indices
    } else {
        &interior
    };
    let rho = margin.iter().map(|&i| grad[i]).sum::<f64>() / margin.len() as f64;

    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();
    let stats = SolverStats {
        iterations,
        max_violation,
        converged: max_violation < KKT_TOL,
        objective,
        min_eigenvalue,
    };
    if !stats.converged {
        log::warn!(
            "one-class svm stopped after {iterations} iterations with KKT violation {max_violation:e}"
        );
    }
    Ok((
        OcSvmModel {
            nu,
            alphas: alpha,
            rho,
            support_indices,
        },
        stats,
    ))
}

impl OcSvmModel {
    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// Box upper bound 1/(νn).
    pub fn upper_bound(&self) -> f64 {
        (1.0 / (self.nu * self.n() as f64)).min(1.0)
    }

    /// f(x) = Σ α_i k(x_i, x) − ρ.
    pub fn decision(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.n() {
            return Err(Error::invalid(format!(
                "kernel row of length {} for a model with {} training points",
                kernel_row.len(),
                self.n()
            )));
        }
        Ok(self
            .alphas
            .iter()
            .zip(kernel_row)
            .map(|(a, k)| a * k)
            .sum::<f64>()
            - self.rho)
    }

    pub fn predict(&self, kernel_row: &[f64]) -> Result<Prediction> {
        Ok(classify(self.decision(kernel_row)?))
    }

    /// ½ αᵀKα.
    pub fn objective(&self, gram: &GramMatrix) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.alphas[i] * self.alphas[j] * gram.get(i, j);
            }
        }
        0.5 * acc
    }
}

/// Scores within this distance of zero lie on the margin, as far as a solver
/// stopped at `KKT_TOL` can tell.
pub const MARGIN_TOL: f64 = KKT_TOL;

/// Anomaly only below the margin band; margin points (ties) are normal.
pub fn classify(score: f64) -> Prediction {
    if score < -MARGIN_TOL {
        Prediction::Anomaly
    } else {
        Prediction::Normal
    }
}

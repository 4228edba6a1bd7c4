//! A trained anomaly detector: scaler, kernel, training features and the
//! one-class SVM solution. This is the unit that is saved as model JSON.

use serde::{Deserialize, Serialize};

use crate::ar::Scaler;
use crate::error::{Error, Result};
use crate::gram::Kernel;
use crate::ocsvm::{self, classify, OcSvmModel, Prediction, SolverStats};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyDetector {
    #[serde(flatten)]
    pub svm: OcSvmModel,
    pub kernel_config: Kernel,
    pub scaler: Scaler,
    /// Raw (unscaled) AR features of the training segments.
    pub training_features: Vec<Vec<f64>>,
}

impl AnomalyDetector {
    /// Fits the scaler on `training_features`, builds the Gram matrix in
    /// scaled space and solves the one-class problem.
    pub fn fit(
        kernel: Kernel,
        training_features: Vec<Vec<f64>>,
        nu: f64,
    ) -> Result<(Self, SolverStats)> {
        let scaler = Scaler::fit(&training_features)?;
        let scaled = scaler.transform_all(&training_features)?;
        let gram = kernel.gram(&scaled)?;
        let (svm, stats) = ocsvm::train_with_stats(&gram, nu)?;
        Ok((
            Self {
                svm,
                kernel_config: kernel,
                scaler,
                training_features,
            },
            stats,
        ))
    }

    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    pub fn scaled_training(&self) -> Result<Vec<Vec<f64>>> {
        self.scaler.transform_all(&self.training_features)
    }

    /// Decision scores for points already in scaled space.
    pub fn scores_scaled(&self, scaled: &[Vec<f64>]) -> Result<Vec<f64>> {
        if self.svm.n() != self.training_features.len() {
            return Err(Error::Format(format!(
                "model has {} dual weights but {} training vectors",
                self.svm.n(),
                self.training_features.len()
            )));
        }
        let train = self.scaled_training()?;
        self.kernel_config
            .cross(&train, scaled)?
            .iter()
            .map(|row| self.svm.decision(row))
            .collect()
    }

    /// Decision scores for raw AR feature vectors.
    pub fn scores(&self, raw: &[Vec<f64>]) -> Result<Vec<f64>> {
        let scaled = self.scaler.transform_all(raw)?;
        self.scores_scaled(&scaled)
    }

    pub fn predict(&self, raw: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        Ok(self.scores(raw)?.into_iter().map(classify).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model
            .training_features
            .iter()
            .any(|x| x.len() != model.dim())
        {
            return Err(Error::Format(
                "training features disagree with scaler width".into(),
            ));
        }
        Ok(model)
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::Kernel;
use crate::ocsvm::{classify, Prediction};

/// Which kernel and ν produced a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kernel: Kernel,
    pub nu: f64,
}

/// Confusion counts with anomaly as the positive class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

/// Scores that `classify` calls anomalous count as positives.
pub fn metrics(is_anomaly: &[bool], scores: &[f64]) -> Result<EvalReport> {
    if is_anomaly.is_empty() {
        return Err(Error::invalid("no samples to evaluate"));
    }
    if is_anomaly.len() != scores.len() {
        return Err(Error::invalid(format!(
            "{} labels but {} scores",
            is_anomaly.len(),
            scores.len()
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&actual, &s) in is_anomaly.iter().zip(scores) {
        match (actual, classify(s) == Prediction::Anomaly) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalReport {
        tp,
        fp,
        tn,
        fn_,
        accuracy: ratio(tp + tn, is_anomaly.len()),
        precision,
        recall,
        f1,
        provenance: None,
    })
}

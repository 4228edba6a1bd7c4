//! Feature-count sweep: for every d and kernel, fit AR(d) features, train on
//! the normal training split and score the test split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::ar::{check_feature_count, extract_features, MAX_FEATURES, MIN_FEATURES};
use crate::dataset::split;
use crate::detector::AnomalyDetector;
use crate::error::{Error, Result};
use crate::eval::metrics::{metrics, EvalReport, Provenance};
use crate::gram::{Kernel, KernelKind, KernelParams};
use crate::ocsvm::DEFAULT_NU;
use crate::synth::{LabeledSegment, Regime};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub d_min: usize,
    pub d_max: usize,
    pub kernels: Vec<KernelKind>,
    pub nu: f64,
    #[serde(flatten)]
    pub kernel: KernelParams,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_min: MIN_FEATURES,
            d_max: MAX_FEATURES,
            kernels: KernelKind::ALL.to_vec(),
            nu: DEFAULT_NU,
            kernel: KernelParams::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_feature_count(self.d_min)?;
        check_feature_count(self.d_max)?;
        if self.d_min > self.d_max {
            return Err(Error::invalid(format!(
                "empty feature range {}..={}",
                self.d_min, self.d_max
            )));
        }
        if self.kernels.is_empty() {
            return Err(Error::invalid("sweep needs at least one kernel"));
        }
        if self.kernel.layers == 0 {
            return Err(Error::invalid("layers must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kernel: KernelKind,
    pub d: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub regime: Regime,
    pub config: SweepConfig,
    pub n_train: usize,
    pub n_test: usize,
    /// Sorted by (kernel, d).
    pub cells: Vec<SweepCell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    F1,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "accuracy" => Ok(Metric::Accuracy),
            "f1" => Ok(Metric::F1),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

/// Train and score one kernel on already-extracted features.
pub fn evaluate(
    kernel: Kernel,
    train: Vec<Vec<f64>>,
    test: &[Vec<f64>],
    test_is_anomaly: &[bool],
    nu: f64,
) -> Result<(AnomalyDetector, EvalReport)> {
    let (detector, _) = AnomalyDetector::fit(kernel, train, nu)?;
    let scores = detector.scores(test)?;
    let mut report = metrics(test_is_anomaly, &scores)?;
    report.provenance = Some(Provenance {
        kernel: detector.kernel_config.clone(),
        nu,
    });
    Ok((detector, report))
}

/// AR(d) features of every segment, in input order.
pub fn features_for(segments: &[LabeledSegment], d: usize) -> Result<Vec<Vec<f64>>> {
    segments
        .par_iter()
        .map(|s| extract_features(&s.signal, d))
        .collect()
}

pub fn sweep(segments: &[LabeledSegment], config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let regime = segments
        .first()
        .map(|s| s.regime)
        .ok_or_else(|| Error::invalid("empty dataset"))?;
    if segments.iter().any(|s| s.regime != regime) {
        return Err(Error::invalid("dataset mixes regimes"));
    }
    let labels: Vec<_> = segments.iter().map(|s| s.label).collect();
    let parts = split(&labels)?;
    let truth: Vec<bool> = parts.test.iter().map(|&i| labels[i].is_anomaly()).collect();

    let ds: Vec<usize> = (config.d_min..=config.d_max).collect();
    let features: Vec<Vec<Vec<f64>>> = ds
        .iter()
        .map(|&d| features_for(segments, d))
        .collect::<Result<_>>()?;

    let mut jobs: Vec<(KernelKind, usize)> = Vec::new();
    for &k in &config.kernels {
        for (di, _) in ds.iter().enumerate() {
            jobs.push((k, di));
        }
    }
    jobs.sort_by_key(|&(k, di)| (k, di));
    jobs.dedup();

    let cells = jobs
        .par_iter()
        .map(|&(kind, di)| {
            let d = ds[di];
            let feats = &features[di];
            let train: Vec<Vec<f64>> = parts.train.iter().map(|&i| feats[i].clone()).collect();
            let test: Vec<Vec<f64>> = parts.test.iter().map(|&i| feats[i].clone()).collect();
            let kernel = Kernel::build(kind, d, &config.kernel)?;
            let (_, report) = evaluate(kernel, train, &test, &truth, config.nu)?;
            Ok(SweepCell {
                kernel: kind,
                d,
                accuracy: report.accuracy,
                f1: report.f1,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        regime,
        config: config.clone(),
        n_train: parts.train.len(),
        n_test: parts.test.len(),
        cells,
    })
}

/// One row of the sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub regime: Regime,
    pub kernel: KernelKind,
    pub d: usize,
    pub accuracy: f64,
    pub f1: f64,
}

impl SweepRow {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Accuracy => self.accuracy,
            Metric::F1 => self.f1,
        }
    }
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.cells
            .iter()
            .map(|c| SweepRow {
                regime: self.regime,
                kernel: c.kernel,
                d: c.d,
                accuracy: c.accuracy,
                f1: c.f1,
            })
            .collect()
    }

    pub fn cell(&self, kernel: KernelKind, d: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.kernel == kernel && c.d == d)
    }

    pub fn best_f1(&self, kernel: KernelKind) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.kernel == kernel)
            .map(|c| c.f1)
            .reduce(f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.rows())
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

/// Metric values ordered by d for one kernel (and optionally one regime).
pub fn series(
    rows: &[SweepRow],
    kernel: Option<KernelKind>,
    metric: Metric,
) -> Result<Vec<(usize, f64)>> {
    let kernels: std::collections::BTreeSet<_> = rows.iter().map(|r| r.kernel).collect();
    let kernel = match kernel {
        Some(k) => k,
        None if kernels.len() == 1 => *kernels.iter().next().unwrap(),
        None => {
            return Err(Error::invalid(format!(
                "sweep table holds {} kernels; pick one",
                kernels.len()
            )))
        }
    };
    let regimes: std::collections::BTreeSet<_> = rows.iter().map(|r| r.regime).collect();
    if regimes.len() > 1 {
        return Err(Error::invalid("sweep table mixes regimes"));
    }
    let mut out: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.kernel == kernel)
        .map(|r| (r.d, r.value(metric)))
        .collect();
    if out.is_empty() {
        return Err(Error::invalid(format!("no rows for kernel {kernel}")));
    }
    out.sort_by_key(|&(d, _)| d);
    if out.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid(format!(
            "duplicate d rows for kernel {kernel}"
        )));
    }
    Ok(out)
}

/// Pairs two series on their common feature counts.
pub fn pair_series(a: &[(usize, f64)], b: &[(usize, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let a_ds: Vec<usize> = a.iter().map(|p| p.0).collect();
    let b_ds: Vec<usize> = b.iter().map(|p| p.0).collect();
    if a_ds != b_ds {
        return Err(Error::invalid(format!(
            "sweep tables cover different feature counts: {a_ds:?} vs {b_ds:?}"
        )));
    }
    Ok((
        a.iter().map(|p| p.1).collect(),
        b.iter().map(|p| p.1).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, DatasetConfig};

    fn tiny() -> Vec<LabeledSegment> {
        let cfg = DatasetConfig {
            segment_seconds: 1.0,
            n_normal_segments: 24,
            n_anomaly_segments_per_type: 3,
            ..DatasetConfig::new(Regime::Obd, 3)
        };
        generate(&cfg).unwrap()
    }

    #[test]
    fn config_validation() {
        let bad = SweepConfig {
            d_min: 1,
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SweepConfig {
            d_max: 11,
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SweepConfig {
            d_min: 5,
            d_max: 4,
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(sweep(&tiny(), &bad).is_err());
    }

    #[test]
    fn grid_is_complete_and_deterministic() {
        let segs = tiny();
        let cfg = SweepConfig {
            d_min: 2,
            d_max: 4,
            ..SweepConfig::default()
        };
        let a = sweep(&segs, &cfg).unwrap();
        assert_eq!(a.cells.len(), 9);
        assert_eq!((a.n_train, a.n_test), (20, 7));
        for k in KernelKind::ALL {
            for d in 2..=4 {
                assert!(a.cell(k, d).is_some());
            }
        }
        let b = sweep(&segs, &cfg).unwrap();
        assert_eq!(a, b);

        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("regime,kernel,d,accuracy,f1\nobd,qk1,2,"));
    }

    #[test]
    fn series_selection_and_pairing() {
        let row = |k, d, f1| SweepRow {
            regime: Regime::Obd,
            kernel: k,
            d,
            accuracy: f1,
            f1,
        };
        let rows = vec![
            row(KernelKind::Qk1, 3, 0.5),
            row(KernelKind::Qk1, 2, 0.4),
            row(KernelKind::Rbf, 2, 0.1),
            row(KernelKind::Rbf, 3, 0.2),
        ];
        assert!(series(&rows, None, Metric::F1).is_err());
        let q = series(&rows, Some(KernelKind::Qk1), Metric::F1).unwrap();
        assert_eq!(q, vec![(2, 0.4), (3, 0.5)]);
        let r = series(&rows, Some(KernelKind::Rbf), Metric::F1).unwrap();
        let (a, b) = pair_series(&q, &r).unwrap();
        assert_eq!((a, b), (vec![0.4, 0.5], vec![0.1, 0.2]));
        assert!(pair_series(&q, &r[..1]).is_err());
        assert!(series(&rows, Some(KernelKind::Qk2), Metric::F1).is_err());
    }
}

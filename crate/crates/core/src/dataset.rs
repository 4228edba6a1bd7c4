//! On-disk datasets (WAV segments plus a manifest) and the train/test split.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_wav, write_wav};
use crate::synth::{DatasetConfig, Label, LabeledSegment, Regime};

pub const MANIFEST_FILE: &str = "manifest.csv";
/// Normal segments used for training; the rest of the normals and every
/// anomaly go to the test set.
pub const TRAIN_NORMALS: usize = 20;

/// One manifest row: filename, regime, label, seed, snr_db.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub filename: String,
    pub regime: Regime,
    pub label: Label,
    pub seed: u64,
    /// Configured anomaly SNR; empty for normal segments.
    pub snr_db: Option<f64>,
}

pub fn segment_filename(regime: Regime, label: Label, ordinal: usize) -> String {
    format!("{}_{:03}_{}.wav", regime.name(), ordinal, label.name())
}

/// Writes every segment as WAV plus `manifest.csv` into `dir`.
pub fn write_dataset(
    dir: &Path,
    config: &DatasetConfig,
    segments: &[LabeledSegment],
) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(segments.len());
    for (ordinal, seg) in segments.iter().enumerate() {
        let filename = segment_filename(seg.regime, seg.label, ordinal);
        write_wav(&dir.join(&filename), &seg.signal)?;
        entries.push(ManifestEntry {
            filename,
            regime: seg.regime,
            label: seg.label,
            seed: config.seed,
            snr_db: seg.label.is_anomaly().then_some(config.anomaly_snr_db),
        });
    }
    let mut w = csv::Writer::from_path(dir.join(MANIFEST_FILE))?;
    for e in &entries {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(entries)
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join(MANIFEST_FILE);
    let mut r = csv::Reader::from_path(&path)?;
    let entries = r
        .deserialize()
        .collect::<std::result::Result<Vec<ManifestEntry>, _>>()?;
    if entries.is_empty() {
        return Err(Error::Format(format!(
            "{} lists no segments",
            path.display()
        )));
    }
    Ok(entries)
}

/// Loads the manifest and every WAV it names, in manifest order.
pub fn read_dataset(dir: &Path) -> Result<Vec<LabeledSegment>> {
    read_manifest(dir)?
        .into_iter()
        .map(|e| {
            Ok(LabeledSegment {
                signal: read_wav(&dir.join(&e.filename))?,
                label: e.label,
                regime: e.regime,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// First `TRAIN_NORMALS` normal segments train; everything else tests, in
/// the original order.
pub fn split(labels: &[Label]) -> Result<Split> {
    let normals = labels.iter().filter(|l| !l.is_anomaly()).count();
    if normals <= TRAIN_NORMALS {
        return Err(Error::invalid(format!(
            "need more than {TRAIN_NORMALS} normal segments to split, found {normals}"
        )));
    }
    let mut train = Vec::with_capacity(TRAIN_NORMALS);
    let mut test = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        if !l.is_anomaly() && train.len() < TRAIN_NORMALS {
            train.push(i);
        } else {
            test.push(i);
        }
    }
    Ok(Split { train, test })
}

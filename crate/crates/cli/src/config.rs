use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qkad::eval::sweep::SweepConfig;
use qkad::featuremap::{DEFAULT_ANGLE_SCALE, DEFAULT_LAYERS};
use qkad::ocsvm::DEFAULT_NU;
use qkad::synth::DEFAULT_SEED;
use qkad::{DatasetConfig, GammaRule, KernelKind, KernelParams, Regime};

/// Everything a run depends on. Every field is optional in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub regime: Regime,
    pub seed: u64,
    pub segment_seconds: f64,
    /// Inclusive feature-count range `[d_min, d_max]`.
    pub d_range: [usize; 2],
    pub kernels: Vec<KernelKind>,
    pub layers: usize,
    pub angle_scale: f64,
    pub nu: f64,
    pub gamma: GammaRule,
    /// Anomaly SNR in dB; the regime default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub paths: Paths,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data: PathBuf,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            data: PathBuf::from("data"),
            out: PathBuf::from("out"),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let sweep = SweepConfig::default();
        Self {
            regime: Regime::Obd,
            seed: DEFAULT_SEED,
            segment_seconds: qkad::synth::DEFAULT_SEGMENT_SECONDS,
            d_range: [sweep.d_min, sweep.d_max],
            kernels: sweep.kernels,
            layers: DEFAULT_LAYERS,
            angle_scale: DEFAULT_ANGLE_SCALE,
            nu: DEFAULT_NU,
            gamma: GammaRule::Auto,
            snr_db: None,
            paths: Paths::default(),
        }
    }
}

/// The hashed view leaves out `paths`, so the same experiment written to a
/// different directory keeps its hash.
#[derive(Serialize)]
struct Hashed<'a> {
    regime: Regime,
    seed: u64,
    segment_seconds: f64,
    d_range: [usize; 2],
    kernels: &'a [KernelKind],
    layers: usize,
    angle_scale: f64,
    nu: f64,
    gamma: GammaRule,
    snr_db: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset().validate()?;
        self.sweep().validate()?;
        self.kernel_params().gamma.resolve(self.d_range[1])?;
        if !(self.angle_scale.is_finite() && self.angle_scale > 0.0) {
            return Err(qkad::Error::InvalidArgument(format!(
                "angle_scale must be positive, got {}",
                self.angle_scale
            ))
            .into());
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(qkad::Error::InvalidArgument(format!(
                "nu must lie in (0, 1], got {}",
                self.nu
            ))
            .into());
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let view = Hashed {
            regime: self.regime,
            seed: self.seed,
            segment_seconds: self.segment_seconds,
            d_range: self.d_range,
            kernels: &self.kernels,
            layers: self.layers,
            angle_scale: self.angle_scale,
            nu: self.nu,
            gamma: self.gamma,
            snr_db: self.snr_db,
        };
        let bytes = serde_json::to_vec(&view).expect("config serialises");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn dataset(&self) -> DatasetConfig {
        let mut cfg = DatasetConfig::new(self.regime, self.seed);
        cfg.segment_seconds = self.segment_seconds;
        if let Some(snr) = self.snr_db {
            cfg.anomaly_snr_db = snr;
        }
        cfg
    }

    pub fn kernel_params(&self) -> KernelParams {
        KernelParams {
            layers: self.layers,
            angle_scale: self.angle_scale,
            gamma: self.gamma,
        }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            d_min: self.d_range[0],
            d_max: self.d_range[1],
            kernels: self.kernels.clone(),
            nu: self.nu,
            kernel: self.kernel_params(),
        }
    }
}

/// Provenance embedded in every JSON artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"seeed": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"paths": {"tmp": "x"}}"#).is_err());
    }

    #[test]
    fn hash_ignores_paths_only() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.paths.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn validation_catches_bad_ranges() {
        let bad = |f: fn(&mut RunConfig)| {
            let mut c = RunConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.d_range = [5, 3]));
        assert!(bad(|c| c.d_range = [1, 3]));
        assert!(bad(|c| c.kernels.clear()));
        assert!(bad(|c| c.nu = 0.0));
        assert!(bad(|c| c.gamma = GammaRule::Fixed(-1.0)));
        assert!(bad(|c| c.angle_scale = 0.0));
        assert!(bad(|c| c.segment_seconds = 0.0));
    }
}

//! Seeded synthetic stand-ins for the two recording setups.
//!
//! * OBD (open belt drive): two belt-rotation tones over low-passed noise;
//!   anomalies are a few loud, short, broadband cracks.
//! * M4W (miniature 4WD track): a motor tone amplitude-modulated at the 5 s
//!   lap period over noise; anomalies are a click train once per lap (stick)
//!   or quiet 2–6 kHz scratch bursts once per lap (velcro).
//!
//! Every segment draws from its own ChaCha stream (`seed`, segment ordinal),
//! so generation order and thread count never change the samples.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ar::Signal;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 16_000;
pub const DEFAULT_SEGMENT_SECONDS: f64 = 10.0;
pub const DEFAULT_NORMAL_SEGMENTS: usize = 30;
pub const DEFAULT_ANOMALY_SEGMENTS_PER_TYPE: usize = 10;
/// Samples are clipped to ±HEADROOM.
pub const HEADROOM: f64 = 0.9;
/// Full scale of the 16-bit PCM grid every generated sample lies on.
pub const PCM_SCALE: f64 = 32767.0;

const LAP_SECONDS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Obd,
    M4w,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Obd => "obd",
            Regime::M4w => "m4w",
        }
    }

    pub fn anomaly_types(self) -> &'static [Label] {
        match self {
            Regime::Obd => &[Label::AnomalyType1],
            Regime::M4w => &[Label::AnomalyType1, Label::AnomalyType2],
        }
    }

    pub fn default_snr_db(self) -> f64 {
        match self {
            Regime::Obd => 12.0,
            Regime::M4w => 3.0,
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obd" => Ok(Regime::Obd),
            "m4w" => Ok(Regime::M4w),
            other => Err(Error::invalid(format!("unknown regime {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    #[serde(rename = "anomaly_type_1")]
    AnomalyType1,
    #[serde(rename = "anomaly_type_2")]
    AnomalyType2,
}

impl Label {
    pub fn is_anomaly(self) -> bool {
        self != Label::Normal
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::AnomalyType1 => "anomaly_type_1",
            Label::AnomalyType2 => "anomaly_type_2",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Label::Normal),
            "anomaly_type_1" => Ok(Label::AnomalyType1),
            "anomaly_type_2" => Ok(Label::AnomalyType2),
            other => Err(Error::Format(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub regime: Regime,
    pub seed: u64,
    pub sample_rate_hz: u32,
    pub segment_seconds: f64,
    pub n_normal_segments: usize,
    pub n_anomaly_segments_per_type: usize,
    pub anomaly_snr_db: f64,
}

impl DatasetConfig {
    pub fn new(regime: Regime, seed: u64) -> Self {
        Self {
            regime,
            seed,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            segment_seconds: DEFAULT_SEGMENT_SECONDS,
            n_normal_segments: DEFAULT_NORMAL_SEGMENTS,
            n_anomaly_segments_per_type: DEFAULT_ANOMALY_SEGMENTS_PER_TYPE,
            anomaly_snr_db: regime.default_snr_db(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz < 1000 {
            return Err(Error::invalid(format!(
                "sample rate {} Hz is too low for the synthetic recipes",
                self.sample_rate_hz
            )));
        }
        if !(self.segment_seconds.is_finite() && self.segment_seconds > 0.0) {
            return Err(Error::invalid("segment_seconds must be positive"));
        }
        if self.segment_len() < 64 {
            return Err(Error::invalid("segments must hold at least 64 samples"));
        }
        if self.n_normal_segments == 0 || self.n_anomaly_segments_per_type == 0 {
            return Err(Error::invalid("segment counts must be positive"));
        }
        if !self.anomaly_snr_db.is_finite() {
            return Err(Error::invalid("anomaly_snr_db must be finite"));
        }
        Ok(())
    }

    pub fn segment_len(&self) -> usize {
        (self.segment_seconds * f64::from(self.sample_rate_hz)).floor() as usize
    }

    /// Labels in generation order: all normals, then each anomaly type in turn.
    pub fn labels(&self) -> Vec<Label> {
        let mut labels = vec![Label::Normal; self.n_normal_segments];
        for &ty in self.regime.anomaly_types() {
            labels.extend(std::iter::repeat_n(ty, self.n_anomaly_segments_per_type));
        }
        labels
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSegment {
    pub signal: Signal,
    pub label: Label,
    pub regime: Regime,
}

pub fn generate(config: &DatasetConfig) -> Result<Vec<LabeledSegment>> {
    config.validate()?;
    let labels = config.labels();
    Ok(labels
        .par_iter()
        .enumerate()
        .map(|(ordinal, &label)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(ordinal as u64);
            let samples = match config.regime {
                Regime::Obd => obd_segment(config, label, &mut rng),
                Regime::M4w => m4w_segment(config, label, &mut rng),
            };
            LabeledSegment {
                signal: Signal {
                    sample_rate_hz: config.sample_rate_hz,
                    samples: finish(samples),
                },
                label,
                regime: config.regime,
            }
        })
        .collect())
}

/// Clip with headroom and snap onto the 16-bit PCM grid so a WAV round trip
/// is lossless.
fn finish(mut samples: Vec<f64>) -> Vec<f64> {
    for s in &mut samples {
        *s = (s.clamp(-HEADROOM, HEADROOM) * PCM_SCALE).round() / PCM_SCALE;
    }
    samples
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn one_pole_lowpass(x: &mut [f64], cutoff_hz: f64, rate: f64) {
    let a = (-2.0 * PI * cutoff_hz / rate).exp();
    let mut y = 0.0;
    for v in x.iter_mut() {
        y = (1.0 - a) * *v + a * y;
        *v = y;
    }
}

/// RBJ constant-peak band-pass biquad.
fn bandpass(x: &mut [f64], low_hz: f64, high_hz: f64, rate: f64) {
    let centre = (low_hz * high_hz).sqrt();
    let q = centre / (high_hz - low_hz);
    let w0 = 2.0 * PI * centre / rate;
    let alpha = w0.sin() / (2.0 * q);
    let a0 = 1.0 + alpha;
    let (b0, b2) = (alpha / a0, -alpha / a0);
    let (a1, a2) = (-2.0 * w0.cos() / a0, (1.0 - alpha) / a0);
    let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    for v in x.iter_mut() {
        let y = b0 * *v + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = *v;
        y2 = y1;
        y1 = y;
        *v = y;
    }
}

fn scale_to_rms(x: &mut [f64], target: f64) {
    let r = rms(x);
    if r > 0.0 {
        let g = target / r;
        x.iter_mut().for_each(|v| *v *= g);
    }
}

/// Harmonic series `Σ_k amp/k · sin(2π k f t + φ_k)` added into `out`.
fn add_harmonics(
    out: &mut [f64],
    rng: &mut ChaCha8Rng,
    fundamental_hz: f64,
    harmonics: usize,
    amp: f64,
    rate: f64,
) {
    for k in 1..=harmonics {
        let phase = rng.gen_range(0.0..2.0 * PI);
        let w = 2.0 * PI * fundamental_hz * k as f64 / rate;
        let a = amp / k as f64;
        for (t, v) in out.iter_mut().enumerate() {
            *v += a * (w * t as f64 + phase).sin();
        }
    }
}

/// Adds `burst` into `out` at `start`, scaled so its RMS over its own span
/// equals `target_rms`. Parts past the end are dropped.
fn add_burst(out: &mut [f64], start: usize, mut burst: Vec<f64>, target_rms: f64) {
    scale_to_rms(&mut burst, target_rms);
    for (v, b) in out.iter_mut().skip(start).zip(burst) {
        *v += b;
    }
}

fn decaying_noise(rng: &mut ChaCha8Rng, len: usize, decay_samples: f64) -> Vec<f64> {
    (0..len)
        .map(|t| rng.sample::<f64, _>(StandardNormal) * (-(t as f64) / decay_samples).exp())
        .collect()
}

fn db_to_amp(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

const OBD_BED_RMS: f64 = 0.02;

fn obd_segment(config: &DatasetConfig, label: Label, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let rate = f64::from(config.sample_rate_hz);
    let n = config.segment_len();

    // belt bed: rubber belt ~37 Hz, chain ~61 Hz, three harmonics each
    let mut noise = gaussian(rng, n);
    one_pole_lowpass(&mut noise, rng.gen_range(700.0..900.0), rate);
    scale_to_rms(&mut noise, OBD_BED_RMS * rng.gen_range(0.95..1.05));
    let mut out = noise;
    let tone_amp = OBD_BED_RMS * 0.8;
    let (rubber, chain) = (
        37.0 * rng.gen_range(0.99..1.01),
        61.0 * rng.gen_range(0.99..1.01),
    );
    add_harmonics(&mut out, rng, rubber, 3, tone_amp, rate);
    add_harmonics(&mut out, rng, chain, 3, tone_amp, rate);

    if label.is_anomaly() {
        let bed = rms(&out);
        let target = bed * db_to_amp(config.anomaly_snr_db);
        let count = rng.gen_range(2..=4);
        for _ in 0..count {
            let len = (rng.gen_range(0.030..0.060) * rate) as usize;
            let start = rng.gen_range(0..n.saturating_sub(len).max(1));
            let burst = decaying_noise(rng, len.max(1), len as f64 / 4.0);
            add_burst(&mut out, start, burst, target);
        }
    }
    out
}

const M4W_BED_RMS: f64 = 0.05;

fn m4w_segment(config: &DatasetConfig, label: Label, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let rate = f64::from(config.sample_rate_hz);
    let n = config.segment_len();
    let lap = (LAP_SECONDS * rate) as usize;
    let lap_phase = rng.gen_range(0.0..1.0);

    // motor whine with per-run speed drift
    let mut motor = vec![0.0; n];
    let motor_hz = 180.0 * rng.gen_range(0.95..1.05);
    add_harmonics(&mut motor, rng, motor_hz, 4, 1.0, rate);
    let depth = rng.gen_range(0.4..0.6);
    for (t, v) in motor.iter_mut().enumerate() {
        let lap_pos = t as f64 / rate / LAP_SECONDS + lap_phase;
        *v *= 1.0 + depth * (2.0 * PI * lap_pos).sin();
    }
    scale_to_rms(&mut motor, M4W_BED_RMS * 0.6);

    // tyre/track rumble
    let mut noise = gaussian(rng, n);
    one_pole_lowpass(&mut noise, rng.gen_range(1500.0..3000.0), rate);
    scale_to_rms(&mut noise, M4W_BED_RMS * 0.8 * rng.gen_range(0.85..1.15));

    let mut out: Vec<f64> = motor.iter().zip(&noise).map(|(a, b)| a + b).collect();
    if !label.is_anomaly() {
        return out;
    }

    let bed = rms(&out);
    let target = bed * db_to_amp(config.anomaly_snr_db);
    // the anomaly sits at a fixed spot on the track, reached once per lap
    let first = ((1.0 - lap_phase) * lap as f64) as usize % lap.max(1);
    let mut at = first + rng.gen_range(0..lap / 10);
    while at < n {
        match label {
            Label::AnomalyType1 => {
                // wheels hopping over the sticks: a short click train
                let clicks = rng.gen_range(4..=6);
                let click_len = (0.002 * rate) as usize;
                let spacing = (rng.gen_range(0.012..0.020) * rate) as usize;
                for c in 0..clicks {
                    let burst = decaying_noise(rng, click_len.max(1), click_len as f64 / 3.0);
                    add_burst(&mut out, at + c * spacing, burst, target);
                }
            }
            Label::AnomalyType2 => {
                let len = (rng.gen_range(0.3..0.5) * rate) as usize;
                let mut scratch = gaussian(rng, len);
                bandpass(&mut scratch, 2000.0, 6000.0, rate);
                add_burst(&mut out, at, scratch, target);
            }
            Label::Normal => unreachable!(),
        }
        at += lap;
    }
    out
}

//! Autoregressive features from audio segments.
//!
//! An AR(p) model `y_t = c + Σ φ_i y_{t−i} + ε_t` is fitted per segment by
//! solving the Yule-Walker equations with the Levinson-Durbin recursion. The
//! intercept is removed by mean subtraction and only φ_1..φ_p become features.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Smallest and largest AR order accepted as a feature count.
pub const MIN_FEATURES: usize = 2;
pub const MAX_FEATURES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub sample_rate_hz: u32,
    pub samples: Vec<f64>,
}

impl Signal {
    pub fn new(sample_rate_hz: u32, samples: Vec<f64>) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("signal has no samples"));
        }
        if let Some(pos) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {pos}")));
        }
        Ok(Self {
            sample_rate_hz,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Non-overlapping windows of `floor(segment_seconds · rate)` samples;
    /// the trailing remainder is dropped.
    pub fn segment(&self, segment_seconds: f64) -> Result<Vec<Signal>> {
        if !(segment_seconds.is_finite() && segment_seconds > 0.0) {
            return Err(Error::invalid(format!(
                "segment length must be positive, got {segment_seconds}"
            )));
        }
        let width = (segment_seconds * f64::from(self.sample_rate_hz)).floor() as usize;
        if width == 0 || self.samples.len() < width {
            return Err(Error::invalid(format!(
                "signal of {} samples is shorter than one {segment_seconds} s segment",
                self.samples.len()
            )));
        }
        Ok(self
            .samples
            .chunks_exact(width)
            .map(|c| Signal {
                sample_rate_hz: self.sample_rate_hz,
                samples: c.to_vec(),
            })
            .collect())
    }
}

/// Biased, mean-removed autocorrelation r_0..r_max_lag.
pub fn autocorrelation(samples: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = samples.len();
    if max_lag >= n {
        return Err(Error::invalid(format!(
            "max lag {max_lag} needs more than {n} samples"
        )));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = samples.iter().map(|s| s - mean).collect();
    Ok((0..=max_lag)
        .map(|k| {
            centred[k..]
                .iter()
                .zip(&centred)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArFit {
    pub order: usize,
    /// φ_1..φ_p.
    pub coefficients: Vec<f64>,
    /// Innovation variance σ² of the order-p predictor.
    pub noise_variance: f64,
    pub reflection_coefficients: Vec<f64>,
    /// Prediction error after each order 0..=p.
    pub prediction_errors: Vec<f64>,
}

/// Solves the order-`p` Yule-Walker system `T(r)·φ = r_{1..p}`.
pub fn levinson_durbin(r: &[f64], p: usize) -> Result<ArFit> {
    if p == 0 {
        return Err(Error::invalid("AR order must be at least 1"));
    }
    if r.len() < p + 1 {
        return Err(Error::invalid(format!(
            "order {p} needs {} autocorrelation lags, got {}",
            p + 1,
            r.len()
        )));
    }
    if r[..=p].iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite autocorrelation"));
    }
    if r[0] <= 0.0 {
        return Err(Error::DegenerateSignal(format!(
            "zero-lag autocorrelation {} is not positive",
            r[0]
        )));
    }

    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    let mut err = r[0];
    let mut reflections = Vec::with_capacity(p);
    let mut errors = Vec::with_capacity(p + 1);
    errors.push(err);

    for m in 1..=p {
        let acc: f64 = (1..m).map(|i| phi[i - 1] * r[m - i]).sum();
        let k = (r[m] - acc) / err;
        if !k.is_finite() || k.abs() >= 1.0 {
            return Err(Error::Conditioning(format!(
                "reflection coefficient {k} at order {m} is outside (-1, 1)"
            )));
        }
        prev[..m - 1].copy_from_slice(&phi[..m - 1]);
        for i in 1..m {
            phi[i - 1] = prev[i - 1] - k * prev[m - i - 1];
        }
        phi[m - 1] = k;
        err *= 1.0 - k * k;
        reflections.push(k);
        errors.push(err);
    }

    Ok(ArFit {
        order: p,
        coefficients: phi,
        noise_variance: err,
        reflection_coefficients: reflections,
        prediction_errors: errors,
    })
}

/// AR(d) coefficients of one segment, for `d` in `MIN_FEATURES..=MAX_FEATURES`.
pub fn extract_features(segment: &Signal, d: usize) -> Result<Vec<f64>> {
    check_feature_count(d)?;
    let r = autocorrelation(&segment.samples, d)?;
    Ok(levinson_durbin(&r, d)?.coefficients)
}

pub fn check_feature_count(d: usize) -> Result<()> {
    if !(MIN_FEATURES..=MAX_FEATURES).contains(&d) {
        return Err(Error::invalid(format!(
            "feature count {d} outside {MIN_FEATURES}..={MAX_FEATURES}"
        )));
    }
    Ok(())
}

/// Per-feature min-max map of the training set onto [0, π].
///
/// Values outside the training range are clipped to [−π/2, 3π/2]; a constant
/// training column maps every input to π/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub const SCALED_LOW: f64 = -FRAC_PI_2;
pub const SCALED_HIGH: f64 = PI + FRAC_PI_2;

impl Scaler {
    pub fn fit(training: &[Vec<f64>]) -> Result<Self> {
        let first = training
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on no samples"))?;
        let d = first.len();
        if d == 0 {
            return Err(Error::invalid(
                "cannot fit a scaler on empty feature vectors",
            ));
        }
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for x in training {
            if x.len() != d {
                return Err(Error::invalid(format!(
                    "inconsistent feature dimension {} vs {d}",
                    x.len()
                )));
            }
            for (j, &v) in x.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::invalid("non-finite training feature"));
                }
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "scaler fitted on {} features, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    (PI * ((v - lo) / (hi - lo))).clamp(SCALED_LOW, SCALED_HIGH)
                } else {
                    FRAC_PI_2
                }
            })
            .collect())
    }

    pub fn transform_all(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.transform(x)).collect()
    }
}

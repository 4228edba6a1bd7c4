//! Decision-function surface over the plane of two features, with the other
//! features held at their training mean (all in scaled space).

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::ar::{SCALED_HIGH, SCALED_LOW};
use crate::detector::AnomalyDetector;
use crate::error::{Error, Result};
use crate::synth::Label;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
}

impl Default for AxisRange {
    /// The full range a scaled feature can take after clipping.
    fn default() -> Self {
        Self {
            min: SCALED_LOW,
            max: SCALED_HIGH,
        }
    }
}

impl AxisRange {
    /// `resolution` evenly spaced nodes including both ends.
    pub fn nodes(&self, resolution: usize) -> Vec<f64> {
        let step = (self.max - self.min) / (resolution - 1) as f64;
        (0..resolution)
            .map(|i| {
                if i + 1 == resolution {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRequest {
    pub feature_x: usize,
    pub feature_y: usize,
    pub resolution: usize,
    pub x_range: AxisRange,
    pub y_range: AxisRange,
}

impl Default for GridRequest {
    fn default() -> Self {
        Self {
            feature_x: 0,
            feature_y: 1,
            resolution: 50,
            x_range: AxisRange::default(),
            y_range: AxisRange::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayPoint {
    pub x: f64,
    pub y: f64,
    pub label: Label,
    /// Decision score of the full feature vector (not the projection).
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedFeature {
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionGrid {
    pub request: GridRequest,
    pub x_nodes: Vec<f64>,
    pub y_nodes: Vec<f64>,
    pub fixed_features: Vec<FixedFeature>,
    /// `scores[iy][ix]`.
    #[serde(skip)]
    pub scores: Vec<Vec<f64>>,
    pub score_min: f64,
    pub score_max: f64,
    pub overlay: Vec<OverlayPoint>,
}

pub fn decision_grid(
    detector: &AnomalyDetector,
    request: &GridRequest,
    samples: &[(Vec<f64>, Label)],
) -> Result<DecisionGrid> {
    let d = detector.dim();
    let (fx, fy) = (request.feature_x, request.feature_y);
    if request.resolution < 2 {
        return Err(Error::invalid(format!(
            "grid resolution {} is below 2",
            request.resolution
        )));
    }
    if fx >= d || fy >= d || fx == fy {
        return Err(Error::invalid(format!(
            "grid axes ({fx}, {fy}) must be distinct features below {d}"
        )));
    }
    for r in [request.x_range, request.y_range] {
        if !(r.min.is_finite() && r.max.is_finite() && r.max > r.min) {
            return Err(Error::invalid(format!(
                "bad axis range {}..{}",
                r.min, r.max
            )));
        }
    }

    let train = detector.scaled_training()?;
    let mean: Vec<f64> = (0..d)
        .map(|j| train.iter().map(|x| x[j]).sum::<f64>() / train.len() as f64)
        .collect();
    let fixed_features = (0..d)
        .filter(|&j| j != fx && j != fy)
        .map(|j| FixedFeature {
            index: j,
            value: mean[j],
        })
        .collect();

    let x_nodes = request.x_range.nodes(request.resolution);
    let y_nodes = request.y_range.nodes(request.resolution);
    let mut points = Vec::with_capacity(x_nodes.len() * y_nodes.len());
    for &y in &y_nodes {
        for &x in &x_nodes {
            let mut p = mean.clone();
            p[fx] = x;
            p[fy] = y;
            points.push(p);
        }
    }
    let flat = detector.scores_scaled(&points)?;
    if flat.iter().any(|s| !s.is_finite()) {
        return Err(Error::Conditioning(
            "non-finite decision score on grid".into(),
        ));
    }
    let score_min = flat.iter().copied().fold(f64::INFINITY, f64::min);
    let score_max = flat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scores = flat.chunks(x_nodes.len()).map(<[f64]>::to_vec).collect();

    let overlay = if samples.is_empty() {
        Vec::new()
    } else {
        let raw: Vec<Vec<f64>> = samples.iter().map(|s| s.0.clone()).collect();
        let scaled = detector.scaler.transform_all(&raw)?;
        let full = detector.scores_scaled(&scaled)?;
        scaled
            .iter()
            .zip(samples)
            .zip(full)
            .map(|((p, (_, label)), score)| OverlayPoint {
                x: p[fx],
                y: p[fy],
                label: *label,
                score,
            })
            .collect()
    };

    Ok(DecisionGrid {
        request: request.clone(),
        x_nodes,
        y_nodes,
        fixed_features,
        scores,
        score_min,
        score_max,
        overlay,
    })
}

impl DecisionGrid {
    pub fn score_range(&self) -> f64 {
        self.score_max - self.score_min
    }

    /// `x,y,score` rows, x varying fastest.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "score"])?;
        for (iy, row) in self.scores.iter().enumerate() {
            for (ix, s) in row.iter().enumerate() {
                w.write_record([
                    self.x_nodes[ix].to_string(),
                    self.y_nodes[iy].to_string(),
                    s.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Index of the node nearest to `v` along `nodes`.
    pub fn nearest(nodes: &[f64], v: f64) -> usize {
        nodes
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{Kernel, KernelKind, KernelParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn detector(kind: KernelKind, d: usize) -> AnomalyDetector {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let train: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let kernel = Kernel::build(kind, d, &KernelParams::default()).unwrap();
        AnomalyDetector::fit(kernel, train, 0.1).unwrap().0
    }

    #[test]
    fn shape_and_range() {
        let det = detector(KernelKind::Qk2, 4);
        let g = decision_grid(&det, &GridRequest::default(), &[]).unwrap();
        assert_eq!(g.scores.len(), 50);
        assert!(g
            .scores
            .iter()
            .all(|r| r.len() == 50 && r.iter().all(|s| s.is_finite())));
        assert_eq!(
            g.fixed_features.iter().map(|f| f.index).collect::<Vec<_>>(),
            vec![2, 3]
        );
        assert!(g.score_min <= g.score_max);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2501);
    }

    #[test]
    fn rejects_bad_requests() {
        let det = detector(KernelKind::Rbf, 3);
        let bad = |r: GridRequest| decision_grid(&det, &r, &[]).is_err();
        assert!(bad(GridRequest {
            resolution: 1,
            ..Default::default()
        }));
        assert!(bad(GridRequest {
            feature_y: 0,
            ..Default::default()
        }));
        assert!(bad(GridRequest {
            feature_x: 3,
            ..Default::default()
        }));
        assert!(bad(GridRequest {
            x_range: AxisRange { min: 1.0, max: 1.0 },
            ..Default::default()
        }));
    }

    #[test]
    fn two_feature_grid_reproduces_training_scores() {
        for kind in KernelKind::ALL {
            let det = detector(kind, 2);
            let req = GridRequest {
                resolution: 401,
                ..Default::default()
            };
            let samples: Vec<(Vec<f64>, Label)> = det
                .training_features
                .iter()
                .map(|x| (x.clone(), Label::Normal))
                .collect();
            let g = decision_grid(&det, &req, &samples).unwrap();
            // half a node spacing in each direction bounds the lookup error
            let h = (SCALED_HIGH - SCALED_LOW) / 400.0;
            for p in &g.overlay {
                let ix = DecisionGrid::nearest(&g.x_nodes, p.x);
                let iy = DecisionGrid::nearest(&g.y_nodes, p.y);
                let diff = (g.scores[iy][ix] - p.score).abs();
                // kernels here are 2-Lipschitz in each scaled coordinate
                assert!(diff <= 2.0 * h, "{kind}: {diff}");
            }
        }
    }
}

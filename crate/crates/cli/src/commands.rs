use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use qkad::dataset::{read_dataset, read_manifest, split, write_dataset, ManifestEntry};
use qkad::eval::grid::{decision_grid, GridRequest};
use qkad::eval::metrics::{metrics, EvalReport, Provenance};
use qkad::eval::sweep::{self as sw, features_for, Metric, SweepResult};
use qkad::eval::ttest::paired_t_test;
use qkad::io::write_features;
use qkad::ocsvm::{classify, Prediction, SolverStats};
use qkad::synth::generate;
use qkad::{AnomalyDetector, DatasetConfig, Kernel, KernelKind, Label, LabeledSegment, Regime};

use crate::config::{RunConfig, Stamp};

fn stamp(cfg: &RunConfig, command: &str, seed: u64) -> Stamp {
    Stamp {
        command: command.to_owned(),
        config_hash: cfg.hash(),
        seed,
    }
}

/// One line on stdout; a closed pipe is not an error.
fn say(line: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn write_json_quiet<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes pretty JSON and reports the path on stdout.
fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json_quiet(path, value)?;
    say(&path.display().to_string())?;
    Ok(())
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.paths.out.as_path();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

struct Dataset {
    segments: Vec<LabeledSegment>,
    manifest: Vec<ManifestEntry>,
    regime: Regime,
    seed: u64,
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let dir = &cfg.paths.data;
    let manifest =
        read_manifest(dir).with_context(|| format!("reading dataset {}", dir.display()))?;
    let segments =
        read_dataset(dir).with_context(|| format!("reading dataset {}", dir.display()))?;
    let seed = manifest[0].seed;
    if manifest.iter().any(|e| e.seed != seed) {
        return Err(qkad::Error::Format("manifest mixes seeds".into()).into());
    }
    if segments.iter().any(|s| s.regime != segments[0].regime) {
        return Err(qkad::Error::Format("manifest mixes regimes".into()).into());
    }
    Ok(Dataset {
        regime: segments[0].regime,
        segments,
        manifest,
        seed,
    })
}

#[derive(Serialize)]
struct SegmentRef<'a> {
    filename: &'a str,
    label: Label,
}

#[derive(Serialize)]
struct SynthMeta<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    dataset: &'a DatasetConfig,
    n_segments: usize,
}

pub fn synth(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let dataset = cfg.dataset();
    let segments = generate(&dataset)?;
    write_dataset(dir, &dataset, &segments)
        .with_context(|| format!("writing dataset to {}", dir.display()))?;
    say(&dir.join(qkad::dataset::MANIFEST_FILE).display().to_string())?;
    let meta = SynthMeta {
        stamp: stamp(cfg, "synth", dataset.seed),
        dataset: &dataset,
        n_segments: segments.len(),
    };
    write_json(&dir.join("manifest.json"), &meta)
}

#[derive(Serialize)]
struct FeaturesMeta<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    regime: Regime,
    d: usize,
    /// Row order of the CSV.
    segments: Vec<SegmentRef<'a>>,
}

pub fn features(cfg: &RunConfig, d: usize) -> Result<()> {
    let data = load_dataset(cfg)?;
    let rows = features_for(&data.segments, d)?;
    let out = out_dir(cfg)?;
    let name = format!("features_{}_d{d}", data.regime);
    let csv_path = out.join(format!("{name}.csv"));
    let file =
        fs::File::create(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    write_features(file, &rows)?;
    say(&csv_path.display().to_string())?;
    let meta = FeaturesMeta {
        stamp: stamp(cfg, "features", data.seed),
        regime: data.regime,
        d,
        segments: data
            .manifest
            .iter()
            .map(|e| SegmentRef {
                filename: &e.filename,
                label: e.label,
            })
            .collect(),
    };
    write_json(&out.join(format!("{name}.json")), &meta)
}

/// Model file: provenance fields next to the detector's own.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(flatten)]
    stamp: Stamp,
    regime: Regime,
    kernel: KernelKind,
    d: usize,
    solver: SolverStats,
    #[serde(flatten)]
    detector: AnomalyDetector,
}

fn load_model(path: &Path) -> Result<ModelFile> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    let model: ModelFile =
        serde_json::from_str(&text).with_context(|| format!("parsing model {}", path.display()))?;
    // re-run the detector's own consistency checks
    AnomalyDetector::from_json(&serde_json::to_string(&model.detector)?)?;
    if model.detector.dim() != model.d {
        return Err(qkad::Error::Format(format!(
            "model declares d = {} but its scaler has {} features",
            model.d,
            model.detector.dim()
        ))
        .into());
    }
    Ok(model)
}

pub fn train(cfg: &RunConfig, kind: KernelKind, d: usize) -> Result<()> {
    let data = load_dataset(cfg)?;
    let feats = features_for(&data.segments, d)?;
    let labels: Vec<Label> = data.segments.iter().map(|s| s.label).collect();
    let parts = split(&labels)?;
    let train: Vec<Vec<f64>> = parts.train.iter().map(|&i| feats[i].clone()).collect();
    let kernel = Kernel::build(kind, d, &cfg.kernel_params())?;
    let (detector, solver) = AnomalyDetector::fit(kernel, train, cfg.nu)?;
    if !solver.converged {
        log::warn!(
            "solver stopped after {} iterations with KKT violation {:.3e}",
            solver.iterations,
            solver.max_violation
        );
    }
    let model = ModelFile {
        stamp: stamp(cfg, "train", data.seed),
        regime: data.regime,
        kernel: kind,
        d,
        solver,
        detector,
    };
    let out = out_dir(cfg)?;
    write_json(
        &out.join(format!("model_{}_{kind}_d{d}.json", data.regime)),
        &model,
    )
}

#[derive(Serialize)]
struct ScoredSegment<'a> {
    filename: &'a str,
    label: Label,
    score: f64,
    prediction: Prediction,
}

#[derive(Serialize)]
struct ScoreReport<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    model_config_hash: &'a str,
    regime: Regime,
    kernel: KernelKind,
    d: usize,
    scope: &'static str,
    report: EvalReport,
    segments: Vec<ScoredSegment<'a>>,
}

pub fn score(cfg: &RunConfig, model_path: &Path, all: bool) -> Result<()> {
    let model = load_model(model_path)?;
    let data = load_dataset(cfg)?;
    let labels: Vec<Label> = data.segments.iter().map(|s| s.label).collect();
    let indices: Vec<usize> = if all {
        (0..labels.len()).collect()
    } else {
        split(&labels)?.test
    };
    let chosen: Vec<LabeledSegment> = indices.iter().map(|&i| data.segments[i].clone()).collect();
    let feats = features_for(&chosen, model.d)?;
    let scores = model.detector.scores(&feats)?;
    let truth: Vec<bool> = indices.iter().map(|&i| labels[i].is_anomaly()).collect();
    let mut report = metrics(&truth, &scores)?;
    report.provenance = Some(Provenance {
        kernel: model.detector.kernel_config.clone(),
        nu: model.detector.svm.nu,
    });
    let segments = indices
        .iter()
        .zip(&scores)
        .map(|(&i, &score)| ScoredSegment {
            filename: &data.manifest[i].filename,
            label: labels[i],
            score,
            prediction: classify(score),
        })
        .collect();
    let out_report = ScoreReport {
        stamp: stamp(cfg, "score", data.seed),
        model_config_hash: &model.stamp.config_hash,
        regime: data.regime,
        kernel: model.kernel,
        d: model.d,
        scope: if all { "all" } else { "test" },
        report,
        segments,
    };
    let out = out_dir(cfg)?;
    write_json(
        &out.join(format!("score_{}.json", file_stem(model_path))),
        &out_report,
    )
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    #[serde(flatten)]
    result: &'a SweepResult,
}

#[derive(Serialize)]
struct TableMeta {
    #[serde(flatten)]
    stamp: Stamp,
    regime: Regime,
    kernel: KernelKind,
    table: String,
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let data = load_dataset(cfg)?;
    let result = sw::sweep(&data.segments, &cfg.sweep())?;
    let out = out_dir(cfg)?;
    let name = format!("sweep_{}", data.regime);

    let csv_path = out.join(format!("{name}.csv"));
    result.write_csv(create(&csv_path)?)?;
    say(&csv_path.display().to_string())?;
    let meta = SweepMeta {
        stamp: stamp(cfg, "sweep", data.seed),
        result: &result,
    };
    write_json(&out.join(format!("{name}.json")), &meta)?;

    let rows = result.rows();
    for &kind in &cfg.kernels {
        let table = format!("{name}_{kind}.csv");
        let path = out.join(&table);
        let subset: Vec<_> = rows.iter().filter(|r| r.kernel == kind).cloned().collect();
        sw::write_rows(create(&path)?, &subset)?;
        say(&path.display().to_string())?;
        let meta = TableMeta {
            stamp: stamp(cfg, "sweep", data.seed),
            regime: data.regime,
            kernel: kind,
            table,
        };
        write_json(&out.join(format!("{name}_{kind}.json")), &meta)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct TTestSide {
    table: String,
    kernel: KernelKind,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct TTestReport {
    #[serde(flatten)]
    stamp: Stamp,
    metric: Metric,
    d: Vec<usize>,
    a: TTestSide,
    b: TTestSide,
    t: f64,
    p: f64,
    df: usize,
    mean_diff: f64,
    sd_diff: f64,
}

fn only_kernel(
    rows: &[sw::SweepRow],
    chosen: Option<KernelKind>,
    path: &Path,
) -> Result<KernelKind> {
    if let Some(k) = chosen {
        return Ok(k);
    }
    let kinds: BTreeSet<KernelKind> = rows.iter().map(|r| r.kernel).collect();
    match kinds.len() {
        1 => Ok(*kinds.iter().next().unwrap()),
        n => Err(qkad::Error::InvalidArgument(format!(
            "{} holds {n} kernels; choose one with --kernel-a/--kernel-b",
            path.display()
        ))
        .into()),
    }
}

pub fn ttest(
    cfg: &RunConfig,
    a: &Path,
    b: &Path,
    metric: Metric,
    kernel_a: Option<KernelKind>,
    kernel_b: Option<KernelKind>,
) -> Result<()> {
    let rows_a = sw::read_rows(a).with_context(|| format!("reading {}", a.display()))?;
    let rows_b = sw::read_rows(b).with_context(|| format!("reading {}", b.display()))?;
    let (ka, kb) = (
        only_kernel(&rows_a, kernel_a, a)?,
        only_kernel(&rows_b, kernel_b, b)?,
    );
    let sa = sw::series(&rows_a, Some(ka), metric)?;
    let sb = sw::series(&rows_b, Some(kb), metric)?;
    let (va, vb) = sw::pair_series(&sa, &sb)?;
    let res = paired_t_test(&va, &vb)?;
    let side = |path: &Path, kernel, values| TTestSide {
        table: path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        kernel,
        values,
    };
    let report = TTestReport {
        stamp: stamp(cfg, "ttest", cfg.seed),
        metric,
        d: sa.iter().map(|p| p.0).collect(),
        a: side(a, ka, va),
        b: side(b, kb, vb),
        t: res.t,
        p: res.p,
        df: res.df,
        mean_diff: res.mean_diff,
        sd_diff: res.sd_diff,
    };
    let out = out_dir(cfg)?;
    let metric_name = serde_json::to_value(metric)?;
    let path: PathBuf = out.join(format!(
        "ttest_{}_vs_{}_{}.json",
        file_stem(a),
        file_stem(b),
        metric_name.as_str().unwrap_or("metric")
    ));
    write_json_quiet(&path, &report)?;
    say(&serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

#[derive(Serialize)]
struct GridMeta<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    model_config_hash: &'a str,
    regime: Regime,
    kernel: KernelKind,
    d: usize,
    table: String,
    score_range: f64,
    #[serde(flatten)]
    grid: &'a qkad::eval::grid::DecisionGrid,
}

pub fn grid(
    cfg: &RunConfig,
    model_path: &Path,
    feature_x: usize,
    feature_y: usize,
    resolution: usize,
) -> Result<()> {
    let model = load_model(model_path)?;
    let data = load_dataset(cfg)?;
    let feats = features_for(&data.segments, model.d)?;
    let samples: Vec<(Vec<f64>, Label)> = feats
        .into_iter()
        .zip(data.segments.iter().map(|s| s.label))
        .collect();
    let request = GridRequest {
        feature_x,
        feature_y,
        resolution,
        ..Default::default()
    };
    let grid = decision_grid(&model.detector, &request, &samples)?;
    let out = out_dir(cfg)?;
    let name = format!("grid_{}_f{feature_x}_f{feature_y}", file_stem(model_path));
    let table = format!("{name}.csv");
    let csv_path = out.join(&table);
    grid.write_csv(create(&csv_path)?)?;
    say(&csv_path.display().to_string())?;
    let meta = GridMeta {
        stamp: stamp(cfg, "grid", data.seed),
        model_config_hash: &model.stamp.config_hash,
        regime: data.regime,
        kernel: model.kernel,
        d: model.d,
        table,
        score_range: grid.score_range(),
        grid: &grid,
    };
    write_json(&out.join(format!("{name}.json")), &meta)
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qkad(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkad"))
        .current_dir(dir)
        .env_remove("QKAD_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    p.to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) {
    std::fs::write(dir.join("run.json"), body).unwrap();
}

#[test]
fn ttest_over_nine_feature_counts() {
    let dir = tempfile::tempdir().unwrap();
    let obd = fixture("sweep_obd.csv");
    let o = qkad(
        dir.path(),
        &[
            "ttest",
            &obd,
            &obd,
            "--kernel-a",
            "qk1",
            "--kernel-b",
            "rbf",
            "--metric",
            "f1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["df"], 8);
    assert_eq!(v["d"].as_array().unwrap().len(), 9);
    let p = v["p"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!(v["t"].is_number());
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(dir
        .path()
        .join("out/ttest_sweep_obd_vs_sweep_obd_f1.json")
        .exists());

    let o = qkad(dir.path(), &["ttest", &obd, &obd]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("validation error"), "{}", stderr(&o));
}

#[test]
fn flags_override_config_and_outputs_are_stamped() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        r#"{"regime": "obd", "seed": 3, "segment_seconds": 1.0, "d_range": [2, 3],
            "kernels": ["qk1"], "paths": {"data": "d", "out": "o"}}"#,
    );
    let o = qkad(
        dir.path(),
        &["--config", "run.json", "synth", "--seed", "4"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = json(&dir.path().join("d/manifest.json"));
    assert_eq!(meta["seed"], 4);
    assert_eq!(meta["dataset"]["seed"], 4);

    let o = qkad(
        dir.path(),
        &["--config", "run.json", "--threads", "2", "sweep"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("o");
    let mut jsons = 0;
    for entry in std::fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let v = json(&path);
            assert_eq!(v["seed"], 4, "{}", path.display());
            assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
            jsons += 1;
        } else {
            let mut companion = path.clone();
            companion.set_extension("json");
            assert!(companion.exists(), "{} has no companion", path.display());
        }
    }
    assert_eq!(jsons, 2);
    let table = std::fs::read_to_string(out.join("sweep_obd.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn exit_codes_by_failure_category() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();

    write_config(p, r#"{"seed": 1, "colour": "blue"}"#);
    let o = qkad(p, &["--config", "run.json", "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("schema error"), "{}", stderr(&o));

    let o = qkad(p, &["--data", "missing", "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("file error"), "{}", stderr(&o));

    let o = qkad(p, &["--d-max", "11", "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("validation error"), "{}", stderr(&o));

    let o = qkad(p, &["--threads", "0", "sweep"]);
    assert_eq!(o.status.code(), Some(1));

    let o = qkad(p, &["sweep", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));

    // silent recordings have no autocorrelation structure to fit
    let silent = p.join("silent");
    std::fs::create_dir(&silent).unwrap();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: 16_000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut manifest = String::from("filename,regime,label,seed,snr_db\n");
    for i in 0..3 {
        let name = format!("s{i}.wav");
        let mut w = hound::WavWriter::create(silent.join(&name), spec).unwrap();
        for _ in 0..1600 {
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        manifest.push_str(&format!("{name},obd,normal,1,\n"));
    }
    std::fs::write(silent.join("manifest.csv"), manifest).unwrap();
    let o = qkad(p, &["--data", "silent", "features", "--d", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("numerical error"), "{}", stderr(&o));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qkad"))
        .current_dir(dir.path())
        .env("QKAD_THREADS", "0")
        .args(["sweep"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--threads"));
}

#[test]
fn train_score_grid_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_config(p, r#"{"regime": "obd", "seed": 9, "segment_seconds": 1.0}"#);
    let run = |args: &[&str]| {
        let mut full = vec!["--config", "run.json"];
        full.extend_from_slice(args);
        let o = qkad(p, &full);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    };
    run(&["synth"]);
    run(&["train", "--kernel", "rbf", "--d", "3"]);
    run(&["score", "--model", "out/model_obd_rbf_d3.json"]);
    run(&[
        "grid",
        "--model",
        "out/model_obd_rbf_d3.json",
        "--resolution",
        "10",
    ]);

    let model = json(&p.join("out/model_obd_rbf_d3.json"));
    for key in [
        "nu",
        "alphas",
        "rho",
        "support_indices",
        "kernel_config",
        "scaler",
        "training_features",
    ] {
        assert!(!model[key].is_null(), "model lacks {key}");
    }
    let score = json(&p.join("out/score_model_obd_rbf_d3.json"));
    assert_eq!(score["segments"].as_array().unwrap().len(), 20);
    assert_eq!(score["model_config_hash"], model["config_hash"]);
    let grid = std::fs::read_to_string(p.join("out/grid_model_obd_rbf_d3_f0_f1.csv")).unwrap();
    assert_eq!(grid.lines().count(), 101);
    let grid_meta = json(&p.join("out/grid_model_obd_rbf_d3_f0_f1.json"));
    assert_eq!(grid_meta["overlay"].as_array().unwrap().len(), 40);
}

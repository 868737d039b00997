//! End-to-end CLI behavior: the full artifact chain on a small synthetic
//! section, error surfaces, byte-level determinism, and SVG structure.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cortolam")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawning cortolam")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Small-section configuration: full schema, fast runtime.
fn write_small_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(
        &path,
        "seed = 11\n\
         [train]\nrounds = 10\n\
         [synth]\nwidth_um = 800.0\n",
    )
    .unwrap();
    path
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

/// Run the whole chain into `dir`, returning the artifact paths.
fn run_chain(dir: &Path) -> Vec<PathBuf> {
    let config = write_small_config(dir);
    let cfg = p(&config);
    let out = p(dir);
    run_ok(&["synth", "--config", &cfg, "--out", &out]);
    let neurons = p(&dir.join("neurons.csv"));
    run_ok(&["features", "--config", &cfg, "--neurons", &neurons, "--out", &out]);
    let features = p(&dir.join("features.csv"));
    run_ok(&[
        "regions", "--config", &cfg, "--neurons", &neurons, "--features", &features, "--out",
        &out,
    ]);
    run_ok(&[
        "train",
        "--config",
        &cfg,
        "--features",
        &features,
        "--labels",
        &p(&dir.join("labels_rater1.csv")),
        "--labels",
        &p(&dir.join("labels_rater2.csv")),
        "--labels",
        &p(&dir.join("labels_rater3.csv")),
        "--out",
        &out,
    ]);
    run_ok(&[
        "predict",
        "--features",
        &features,
        "--model",
        &p(&dir.join("ensemble.json")),
        "--out",
        &p(&dir.join("predictions.csv")),
    ]);
    run_ok(&[
        "explain",
        "--features",
        &features,
        "--model",
        &p(&dir.join("ensemble.json")),
        "--out",
        &out,
        "--limit",
        "5",
        "--importance-rows",
        "50",
    ]);
    run_ok(&[
        "eval",
        "--predictions",
        &p(&dir.join("predictions.csv")),
        "--split",
        &p(&dir.join("split.json")),
        "--labels",
        &p(&dir.join("labels_rater1.csv")),
        "--labels",
        &p(&dir.join("labels_rater2.csv")),
        "--labels",
        &p(&dir.join("labels_rater3.csv")),
        "--truth",
        &p(&dir.join("truth.csv")),
        "--neurons",
        &neurons,
        "--out",
        &out,
        "--top-n",
        "100",
    ]);
    run_ok(&[
        "plot",
        "--neurons",
        &neurons,
        "--labels",
        &p(&dir.join("labels_rater1.csv")),
        "--labels",
        &p(&dir.join("labels_rater2.csv")),
        "--labels",
        &p(&dir.join("labels_rater3.csv")),
        "--out",
        &p(&dir.join("raters.svg")),
    ]);
    run_ok(&[
        "plot",
        "--neurons",
        &neurons,
        "--features",
        &features,
        "--column",
        "depth_norm",
        "--out",
        &p(&dir.join("depth.svg")),
    ]);

    [
        "neurons.csv",
        "truth.csv",
        "labels_rater1.csv",
        "labels_rater2.csv",
        "labels_rater3.csv",
        "synth_meta.json",
        "features.csv",
        "features_schema.json",
        "regions.csv",
        "regions_summary.json",
        "split.json",
        "model_rater1.json",
        "model_rater2.json",
        "model_rater3.json",
        "ensemble.json",
        "predictions.csv",
        "explanations.csv",
        "importance.json",
        "eval.json",
        "eval.txt",
        "raters.svg",
        "depth.svg",
    ]
    .iter()
    .map(|f| dir.join(f))
    .collect()
}

#[test]
fn full_chain_writes_all_artifacts_and_reruns_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    std::fs::create_dir_all(&dir_a).unwrap();
    std::fs::create_dir_all(&dir_b).unwrap();

    let artifacts_a = run_chain(&dir_a);
    for artifact in &artifacts_a {
        assert!(artifact.exists(), "missing artifact {}", artifact.display());
        assert!(artifact.metadata().unwrap().len() > 0);
    }

    let artifacts_b = run_chain(&dir_b);
    for (a, b) in artifacts_a.iter().zip(artifacts_b.iter()) {
        let bytes_a = std::fs::read(a).unwrap();
        let bytes_b = std::fs::read(b).unwrap();
        assert!(
            bytes_a == bytes_b,
            "artifact {} differs between identical runs",
            a.file_name().unwrap().to_string_lossy()
        );
    }
}

#[test]
fn predict_without_model_reports_model_not_found() {
    let tmp = tempfile::tempdir().unwrap();
    let features = tmp.path().join("features.csv");
    std::fs::write(&features, "id,a\n1,0.5\n").unwrap();
    let out = run(&[
        "predict",
        "--features",
        &p(&features),
        "--model",
        &p(&tmp.path().join("missing.json")),
        "--out",
        &p(&tmp.path().join("pred.csv")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("model not found"),
        "stderr was: {stderr}"
    );
}

#[test]
fn truncated_model_file_is_malformed() {
    let tmp = tempfile::tempdir().unwrap();
    let features = tmp.path().join("features.csv");
    std::fs::write(&features, "id,a\n1,0.5\n").unwrap();
    let model = tmp.path().join("ensemble.json");
    std::fs::write(&model, "{\"version\":1,\"kind\":\"cortolam-ens").unwrap();
    let out = run(&[
        "predict",
        "--features",
        &p(&features),
        "--model",
        &p(&model),
        "--out",
        &p(&tmp.path().join("pred.csv")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("malformed"), "stderr was: {stderr}");
}

#[test]
fn unknown_label_token_fails_with_context() {
    let tmp = tempfile::tempdir().unwrap();
    let neurons = tmp.path().join("neurons.csv");
    std::fs::write(
        &neurons,
        "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness\n1,0,0,50,30,0.7,0.6\n",
    )
    .unwrap();
    let labels = tmp.path().join("labels.csv");
    std::fs::write(&labels, "neuron_id,layer\n1,VIII\n").unwrap();
    let out = run(&[
        "plot",
        "--neurons",
        &p(&neurons),
        "--labels",
        &p(&labels),
        "--out",
        &p(&tmp.path().join("x.svg")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("VIII"));
}

fn assert_well_formed_xml(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut reader = quick_xml::Reader::from_str(&text);
    loop {
        match reader.read_event() {
            Ok(quick_xml::events::Event::Eof) => break,
            Ok(_) => {}
            Err(e) => panic!("{} is not well-formed XML: {e}", path.display()),
        }
    }
}

#[test]
fn plots_are_well_formed_with_one_panel_per_rater() {
    let tmp = tempfile::tempdir().unwrap();
    let neurons = tmp.path().join("neurons.csv");
    std::fs::write(
        &neurons,
        "id,x_um,y_um,area_um2,perimeter_um,circularity,roundness\n\
         1,0,0,50,30,0.7,0.6\n2,100,40,50,30,0.7,0.6\n3,50,90,50,30,0.7,0.6\n",
    )
    .unwrap();
    for rater in ["a", "b", "c"] {
        std::fs::write(
            tmp.path().join(format!("labels_{rater}.csv")),
            "neuron_id,layer\n1,I\n2,III\n3,WM\n",
        )
        .unwrap();
    }
    let svg_path = tmp.path().join("panels.svg");
    run_ok(&[
        "plot",
        "--neurons",
        &p(&neurons),
        "--labels",
        &p(&tmp.path().join("labels_a.csv")),
        "--labels",
        &p(&tmp.path().join("labels_b.csv")),
        "--labels",
        &p(&tmp.path().join("labels_c.csv")),
        "--out",
        &p(&svg_path),
    ]);
    assert_well_formed_xml(&svg_path);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    // Three panels of three neurons each.
    assert_eq!(svg.matches("<circle").count(), 9);
    // Panel titles are the rater ids derived from the file names.
    for title in ["a", "b", "c"] {
        assert!(svg.contains(&format!(">{title}</text>")), "missing panel {title}");
    }
}

#[test]
fn commands_do_not_mutate_their_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("chain");
    std::fs::create_dir_all(&dir).unwrap();
    let config = write_small_config(&dir);
    let cfg = p(&config);
    let out = p(&dir);
    run_ok(&["synth", "--config", &cfg, "--out", &out]);
    let neurons = dir.join("neurons.csv");
    let before = std::fs::read(&neurons).unwrap();
    run_ok(&["features", "--config", &cfg, "--neurons", &p(&neurons), "--out", &out]);
    assert_eq!(before, std::fs::read(&neurons).unwrap());
}

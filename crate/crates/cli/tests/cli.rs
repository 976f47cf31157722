use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

const SMALL: &[&str] = &[
    "--set",
    "n_subscribers=600",
    "--set",
    "observation_days=28",
    "--set",
    "n_towers=40",
    "--set",
    "min_count=2",
    "--set",
    "n_trees=40",
    "--set",
    "gcv_budget_trees=10",
];

fn litmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_litmap"))
        .args(SMALL)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = litmap(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// synth → featurize → train, shared by every test.
struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn data(&self) -> PathBuf {
        self.root.join("data")
    }
    fn features(&self) -> PathBuf {
        self.root.join("features")
    }
    fn model_dir(&self) -> PathBuf {
        self.root.join("model")
    }
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let f = Fixture { _dir: dir, root };
        ok(&["synth", "--seed", "5", "--out", s(&f.data())]);
        ok(&["featurize", "--data", s(&f.data()), "--out", s(&f.features())]);
        ok(&[
            "train",
            "--seed",
            "5",
            "--data",
            s(&f.data()),
            "--features",
            s(&f.features()),
            "--out",
            s(&f.model_dir()),
            "--folds",
            "3",
        ]);
        f
    })
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Data lines of a CSV artifact (provenance comment and header skipped).
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn synth_writes_bundle_and_is_repeatable() {
    let f = fixture();
    let names: Vec<String> = read_dir_sorted(&f.data()).into_iter().map(|x| x.0).collect();
    assert_eq!(
        names,
        [
            "cdr.csv",
            "handsets.csv",
            "labels.csv",
            "manifest.json",
            "topups.csv",
            "towers.csv"
        ]
    );
    let again = tempfile::tempdir().unwrap();
    ok(&["synth", "--seed", "5", "--out", s(again.path())]);
    assert_eq!(read_dir_sorted(&f.data()), read_dir_sorted(again.path()));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.kv");
    std::fs::write(&cfg, "n_subscribers = 10\nn_tress = 3\n").unwrap();
    let out = litmap(&["--config", s(&cfg), "synth", "--out", s(&dir.path().join("d"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_tress"));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(litmap(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(litmap(&["density"]).status.code(), Some(1));
    assert_eq!(litmap(&["--help"]).status.code(), Some(0));
}

#[test]
fn featurize_has_one_row_per_label_and_is_repeatable() {
    let f = fixture();
    let labels = csv_rows(&f.data().join("labels.csv")).len();
    let rows = csv_rows(&f.features().join("features.csv"));
    assert_eq!(rows.len(), labels);
    let homes = csv_rows(&f.features().join("home_towers.csv"));
    assert_eq!(homes.len(), labels);

    let again = tempfile::tempdir().unwrap();
    ok(&["featurize", "--data", s(&f.data()), "--out", s(again.path())]);
    assert_eq!(read_dir_sorted(&f.features()), read_dir_sorted(again.path()));
}

#[test]
fn unknown_tower_in_strict_mode_is_a_data_error() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(f.data()).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), dir.path().join(e.file_name())).unwrap();
    }
    let cdr = dir.path().join("cdr.csv");
    let text = std::fs::read_to_string(&cdr).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let i = lines.iter().position(|l| l.starts_with("s0")).unwrap();
    let mut fields: Vec<&str> = lines[i].split(',').collect();
    fields[7] = "T999";
    lines[i] = fields.join(",");
    std::fs::write(&cdr, lines.join("\n") + "\n").unwrap();

    let out = litmap(&[
        "--strict",
        "featurize",
        "--data",
        s(dir.path()),
        "--out",
        s(&dir.path().join("f")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T999"));
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = litmap(&["featurize", "--data", s(dir.path()), "--out", s(&dir.path().join("f"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_report_schema_and_cv() {
    let f = fixture();
    let r = json(&f.model_dir().join("report.json"));
    for key in [
        "accuracy",
        "accuracy_ci95",
        "sensitivity",
        "specificity",
        "lift",
        "train_test_gap",
    ] {
        assert!(r["report"].get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["provenance"]["seed"], 5);
    assert!(r["importance"].as_array().unwrap().len() > 5);
    let cv = json(&f.model_dir().join("cv.json"));
    assert_eq!(cv["k"], 3);
    assert_eq!(cv["folds"].as_array().unwrap().len(), 3);
    let m = json(&f.model_dir().join("model.json"));
    assert_eq!(m["format"], "litmap-gbm");
    assert_eq!(m["provenance"]["seed"], 5);
}

#[test]
fn train_is_repeatable() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "train",
        "--seed",
        "5",
        "--data",
        s(&f.data()),
        "--features",
        s(&f.features()),
        "--out",
        s(dir.path()),
        "--folds",
        "3",
    ]);
    assert_eq!(read_dir_sorted(&f.model_dir()), read_dir_sorted(dir.path()));
}

#[test]
fn evaluate_matches_training_report() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eval.json");
    ok(&[
        "evaluate",
        "--data",
        s(&f.data()),
        "--features",
        s(&f.features()),
        "--model",
        s(&f.model_dir().join("model.json")),
        "--out",
        s(&out),
    ]);
    let e = json(&out);
    let r = json(&f.model_dir().join("report.json"));
    assert_eq!(e["report"]["confusion"], r["report"]["confusion"]);
    assert_eq!(e["rows"], "test");
}

#[test]
fn map_emits_both_surfaces_on_one_grid() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    for fmt in ["geojson", "csv"] {
        let out = dir.path().join(fmt);
        ok(&[
            "map",
            "--seed",
            "5",
            "--data",
            s(&f.data()),
            "--features",
            s(&f.features()),
            "--model",
            s(&f.model_dir().join("model.json")),
            "--format",
            fmt,
            "--out",
            s(&out),
        ]);
        let cmp = json(&out.join("comparison.json"));
        let cells = cmp["n_cols"].as_u64().unwrap() * cmp["n_rows"].as_u64().unwrap();
        if fmt == "csv" {
            let p = csv_rows(&out.join("predicted.csv"));
            let a = csv_rows(&out.join("actual.csv"));
            assert_eq!(p.len() as u64, cells);
            let centers = |v: &[Vec<String>]| v.iter().map(|r| (r[0].clone(), r[1].clone())).collect::<Vec<_>>();
            assert_eq!(centers(&p), centers(&a));
        } else {
            let p = json(&out.join("predicted.geojson"));
            let a = json(&out.join("actual.geojson"));
            assert_eq!(p["type"], "FeatureCollection");
            assert_eq!(p["features"].as_array().unwrap().len() as u64, cells);
            assert_eq!(p["grid"], a["grid"]);
            assert_eq!(p["provenance"]["seed"], 5);
        }
    }
}

#[test]
fn map_rejects_mismatched_catalog() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let feat = dir.path().join("features");
    std::fs::create_dir(&feat).unwrap();
    // Drop the last column from both the matrix and its catalog.
    let drop_last = |line: &str| line.rsplit_once(',').map(|x| x.0.to_string()).unwrap_or_default();
    let m = std::fs::read_to_string(f.features().join("features.csv")).unwrap();
    let trimmed: Vec<String> = m
        .lines()
        .map(|l| {
            if l.starts_with('#') {
                l.to_string()
            } else {
                drop_last(l)
            }
        })
        .collect();
    std::fs::write(feat.join("features.csv"), trimmed.join("\n") + "\n").unwrap();
    let c = std::fs::read_to_string(f.features().join("catalog.csv")).unwrap();
    let mut lines: Vec<&str> = c.lines().collect();
    lines.pop();
    std::fs::write(feat.join("catalog.csv"), lines.join("\n") + "\n").unwrap();
    std::fs::copy(f.features().join("home_towers.csv"), feat.join("home_towers.csv")).unwrap();

    let out = litmap(&[
        "map",
        "--data",
        s(&f.data()),
        "--features",
        s(&feat),
        "--model",
        s(&f.model_dir().join("model.json")),
        "--out",
        s(&dir.path().join("map")),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn density_columns_sum_to_one() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let (data, features) = (f.data(), f.features());
    for log in [false, true] {
        let out = dir.path().join(format!("d{log}.csv"));
        let mut args = vec![
            "density",
            "--data",
            s(&data),
            "--features",
            s(&features),
            "--feature",
            "internet_volume",
            "--bins",
            "12",
            "--out",
            s(&out),
        ];
        if log {
            args.push("--log");
        }
        ok(&args);
        let rows = csv_rows(&out);
        assert_eq!(rows.len(), 12);
        for col in [2, 3] {
            let total: f64 = rows.iter().map(|r| r[col].parse::<f64>().unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-9, "column {col} sums to {total}");
        }
        let lo: f64 = rows[0][0].parse().unwrap();
        if log {
            // ln of byte volumes, far below the raw values
            assert!(lo < 30.0);
        }
    }
}

#[test]
fn density_unknown_feature_lists_near_matches() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let out = litmap(&[
        "density",
        "--data",
        s(&f.data()),
        "--features",
        s(&f.features()),
        "--feature",
        "contact_entrpy",
        "--out",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contact_entropy"));
}

#[test]
fn select_features_writes_selection_and_final_model() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "select-features",
        "--seed",
        "5",
        "--data",
        s(&f.data()),
        "--features",
        s(&f.features()),
        "--out",
        s(dir.path()),
    ]);
    let sel = json(&dir.path().join("selection.json"));
    let kept = sel["selected"].as_array().unwrap().len();
    let steps = sel["trace"].as_array().unwrap().len();
    let n_features = csv_rows(&f.features().join("catalog.csv")).len();
    assert_eq!(kept + steps, n_features);
    assert!(kept >= 1);
    let m = json(&dir.path().join("model.json"));
    assert_eq!(m["trees"].as_array().unwrap().len(), 40);
    assert!(dir.path().join("report.json").exists());
}

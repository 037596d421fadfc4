use std::path::Path;
use std::process::{Command, Output};

use rcnkit::base::{Dataset, Matrix, Target};
use rcnkit::datasets::{bundled_digits, MackeyGlassConfig};
use rcnkit::estimators::{EsnEstimator, EsnParams, Estimator, TaskKind};
use rcnkit_cli::bench::{digits_params, mackey_glass_split};
use rcnkit_cli::commands::fit_model_file;
use rcnkit_cli::model_file::ModelFile;

fn rcnkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcnkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Splits a generated `x,y` file at row 1900.
fn write_mg_split(dir: &Path) {
    let o = rcnkit(dir, &["generate", "mackey-glass", "--n", "2400", "--out", "mg.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.join("mg.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let join = |rows: &[&str]| rows.join("\n") + "\n";
    std::fs::write(dir.join("train.csv"), join(&lines[..1901])).unwrap();
    let mut test = vec![lines[0]];
    test.extend(&lines[1901..]);
    std::fs::write(dir.join("test.csv"), join(&test)).unwrap();
    let inputs: Vec<&str> = lines[1901..].iter().map(|l| l.split(',').next().unwrap()).collect();
    std::fs::write(dir.join("test_x.csv"), join(&inputs)).unwrap();
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = rcnkit(dir.path(), &["generate", "mackey-glass", "--seed", "7", "--out", name]);
        assert!(o.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 5001);
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = rcnkit(dir.path(), &["generate", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rcnkit(dir.path(), &["train", "--set", "params.no_such_param=1", "--set", "data.train=x.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("no_such_param"));
    let o = rcnkit(dir.path(), &["train", "--set", "unknown_key=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_mg_split(d);
    std::fs::write(
        d.join("cfg.toml"),
        "[params]\nhidden_layer_size = 100\n[data]\ntrain = \"train.csv\"\ntest = \"test.csv\"\n[output]\nmodel = \"m.rcn\"\n",
    )
    .unwrap();
    let o = rcnkit(d, &["train", "--config", "cfg.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("test mse:"));

    let o = rcnkit(d, &["predict", "--model", "m.rcn", "--data", "test.csv", "--out", "p.csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("test mse:"));
    assert_eq!(std::fs::read_to_string(d.join("p.csv")).unwrap().lines().count(), 500);

    // Unlabeled input: predictions only.
    let o = rcnkit(d, &["predict", "--model", "m.rcn", "--data", "test_x.csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(!out.contains("mse"));
    assert_eq!(out.lines().count(), 500);

    // Width mismatch names both widths and is a data error.
    std::fs::write(d.join("wide.csv"), "1,2,3,4\n5,6,7,8\n").unwrap();
    let o = rcnkit(d, &["predict", "--model", "m.rcn", "--data", "wide.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("expected width 1, found 4"), "{}", stderr(&o));

    // Corrupt model file.
    let bytes = std::fs::read(d.join("m.rcn")).unwrap();
    std::fs::write(d.join("cut.rcn"), &bytes[..bytes.len() / 2]).unwrap();
    let o = rcnkit(d, &["predict", "--model", "cut.rcn", "--data", "test.csv"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn singular_readout_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Two identical input columns give duplicated states.
    let rows: Vec<String> = (0..50).map(|i| format!("{0},{0},{1}", i as f64 / 10.0, i)).collect();
    std::fs::write(d.join("t.csv"), rows.join("\n")).unwrap();
    let o = rcnkit(
        d,
        &["train", "--set", "estimator=elm", "--set", "params.alpha=0", "--set", "params.hidden_layer_size=200", "--set", "data.train=t.csv", "--set", "output.model=m.rcn"],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("alpha"));
}

fn assert_round_trip(file: &ModelFile, data: &Dataset) {
    let bytes = file.to_bytes().unwrap();
    assert_eq!(&bytes[..8], b"RCNKIT01");
    let back = ModelFile::from_bytes(&bytes).unwrap();
    assert_eq!(back.to_bytes().unwrap(), bytes);
    assert_eq!(back.predictor().predict(data).unwrap(), file.predictor().predict(data).unwrap());
}

#[test]
fn model_file_round_trip_is_exact() {
    let (train, test) = mackey_glass_split(&MackeyGlassConfig { n_timesteps: 2100, ..MackeyGlassConfig::default() }).unwrap();
    let model = EsnEstimator::regressor(EsnParams { hidden_layer_size: 60, ..EsnParams::default() }).unwrap().into_model();
    assert_round_trip(&fit_model_file(model.clone(), false, &train).unwrap(), &test);
    assert_round_trip(&fit_model_file(model, true, &train).unwrap(), &test);

    let digits = bundled_digits().unwrap();
    let seqs = Dataset::Sequences(digits.to_sequences(&(0..150).collect::<Vec<_>>()).unwrap());
    let clf = EsnEstimator::classifier(digits_params(40, true)).unwrap().into_model();
    assert_round_trip(&fit_model_file(clf, false, &seqs).unwrap(), &seqs);

    let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
    let blobs = Dataset::instances(x, Target::Labels(vec![3, 3, -1, -1])).unwrap();
    let elm = rcnkit::estimators::ElmEstimator::from_params(TaskKind::Classification, &Default::default())
        .unwrap()
        .into_model();
    assert_round_trip(&fit_model_file(elm, false, &blobs).unwrap(), &blobs);
}

const SEARCH_CFG: &str = r#"
[params]
hidden_layer_size = 50
input_scaling = 0.5
[data]
train = "train.csv"
[output]
report = "report.txt"
params = "best.toml"

[[search.steps]]
name = "scaling"
strategy = "random"
n_iter = 6
seed = 3
space = { input_scaling = { uniform = [0.1, 1.0] }, spectral_radius = { uniform = [0.1, 1.0] } }

[[search.steps]]
name = "leakage"
strategy = "grid"
space = { leakage = [0.3, 0.6, 1.0] }
"#;

#[test]
fn search_is_monotone_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_mg_split(d);
    std::fs::write(d.join("s.toml"), SEARCH_CFG).unwrap();
    let o = rcnkit(d, &["search", "--config", "s.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = std::fs::read_to_string(d.join("report.txt")).unwrap();
    let csv = std::fs::read_to_string(d.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 + 3);
    let bests: Vec<f64> = report
        .lines()
        .filter_map(|l| l.strip_prefix("best: #"))
        .map(|l| l.rsplit(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(bests.len(), 2);
    assert!(bests[1] >= bests[0], "{bests:?}");
    assert!(std::fs::read_to_string(d.join("best.toml")).unwrap().contains("[params]"));

    let o = rcnkit(d, &["search", "--config", "s.toml", "--set", "output.report=again.txt"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(d.join("again.txt")).unwrap(), report);
    assert_eq!(std::fs::read_to_string(d.join("again.csv")).unwrap(), csv);
}

#[test]
fn empty_search_plan_echoes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_mg_split(d);
    let o = rcnkit(d, &["search", "--set", "data.train=train.csv", "--set", "params.leakage=0.25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("initial: leakage=0.25"), "{out}");
    assert!(out.contains("final: leakage=0.25"));
}

#[test]
fn digits_benchmark_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = rcnkit(dir.path(), &["benchmark", "digits", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/digits.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(dir.path().join("out/digits.txt").exists());
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let n: usize = cells[0].parse().unwrap();
        let width: usize = cells[2].parse().unwrap();
        assert_eq!(width, if cells[1] == "bi" { 2 * n } else { n });
    }
}

#[test]
fn volatility_without_data_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let o = rcnkit(dir.path(), &["benchmark", "volatility"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("synthetic"));
    // 3 horizons × 3 folds × 2 models × 2 inputs, plus note and header.
    assert_eq!(out.lines().count(), 36 + 2);
    let o = rcnkit(dir.path(), &["benchmark", "volatility", "--data-dir", "missing"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn timing_and_mackey_glass_benchmarks() {
    let dir = tempfile::tempdir().unwrap();
    let o = rcnkit(dir.path(), &["benchmark", "timing", "--sizes", "50,100", "--out-dir", "."]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("timing.csv")).unwrap().lines().count(), 3);
    let o = rcnkit(dir.path(), &["benchmark", "mackey-glass", "--hidden-layer-size", "100"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("ols_raw_input"));
}

//! Subcommand implementations. Each returns the text printed to stdout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rcnkit::base::csv_io::{read_csv, write_csv};
use rcnkit::base::{Dataset, Label, Matrix, Prediction, Target};
use rcnkit::datasets::{
    bundled_digits_csv, har_features, load_digits, load_volatility_dir, mackey_glass, MackeyGlassConfig,
    VOLATILITY_HORIZONS,
};
use rcnkit::estimators::{EsnParams, Estimator, MinMaxScaled, ReservoirModel, TaskKind};
use rcnkit::metrics::{score_dataset, Metric};
use rcnkit::model_selection::run_search;

use crate::bench;
use crate::config::{params_toml, DataFormat, RunConfig};
use crate::error::{data, usage};
use crate::model_file::ModelFile;
use crate::report::{fixed, sci, write, Table};

/// Loads a data file. Table files split off the trailing `target_columns`
/// columns as targets; `with_targets = false` treats every column as input.
pub fn load_data(path: &Path, format: DataFormat, task: TaskKind, target_columns: usize, with_targets: bool) -> Result<Dataset> {
    let ctx = || format!("reading {}", path.display());
    match format {
        DataFormat::Digits => Ok(Dataset::Sequences(load_digits(path).with_context(ctx)?.as_sequences()?)),
        DataFormat::Table => {
            let m = read_csv(path).with_context(ctx)?.data;
            if !with_targets {
                let n = m.rows();
                return Ok(Dataset::instances(m, empty_target(task, n))?);
            }
            if target_columns == 0 || m.cols() <= target_columns {
                return Err(data(format!(
                    "{}: {} columns cannot hold inputs plus {target_columns} target column(s)",
                    path.display(),
                    m.cols()
                )));
            }
            let d = m.cols() - target_columns;
            let x = m.select_columns(&(0..d).collect::<Vec<_>>());
            let y = m.select_columns(&(d..m.cols()).collect::<Vec<_>>());
            let target = match task {
                TaskKind::Regression => Target::Values(y),
                TaskKind::Classification => {
                    if target_columns != 1 {
                        return Err(usage("classification needs exactly one label column"));
                    }
                    Target::Labels(to_labels(path, y.as_slice())?)
                }
            };
            Ok(Dataset::instances(x, target)?)
        }
    }
}

/// Placeholder targets for prediction-only data.
fn empty_target(task: TaskKind, n: usize) -> Target {
    match task {
        TaskKind::Regression => Target::Values(Matrix::zeros(n, 1)),
        TaskKind::Classification => Target::Labels(vec![0; n]),
    }
}

fn to_labels(path: &Path, v: &[f64]) -> Result<Vec<Label>> {
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x.fract() == 0.0 && x.abs() < 9.0e15 {
                Ok(x as Label)
            } else {
                Err(data(format!("{}: row {}: label {x} is not an integer", path.display(), i + 1)))
            }
        })
        .collect()
}

fn metrics_for(task: TaskKind) -> &'static [Metric] {
    match task {
        TaskKind::Regression => &[Metric::Mse, Metric::R2],
        TaskKind::Classification => &[Metric::Accuracy],
    }
}

fn metric_lines(task: TaskKind, label: &str, data: &Dataset, pred: &Prediction) -> Result<String> {
    let mut out = String::new();
    for &m in metrics_for(task) {
        let v = score_dataset(m, data, pred)?;
        let _ = writeln!(out, "{label} {}: {}", m.name(), v.value);
    }
    Ok(out)
}

/// Fits the configured estimator, saves the model and reports train (and
/// optional test) metrics.
pub fn train(cfg: &RunConfig) -> Result<String> {
    let train_path = cfg.data.train.as_ref().ok_or_else(|| usage("no training data (set data.train)"))?;
    let model_path = cfg.output.model.as_ref().ok_or_else(|| usage("no model path (set output.model)"))?;
    let task = cfg.task_kind();
    let params = cfg.estimator_params()?;
    let train = load_data(train_path, cfg.data.format, task, cfg.data.target_columns, true)?;
    let file = fit_model_file(cfg.build_model(&params)?, cfg.scale, &train)?;
    file.save(model_path)?;
    let predictor = file.predictor();
    let mut out = metric_lines(task, "train", &train, &predictor.predict(&train)?)?;
    if let Some(test_path) = &cfg.data.test {
        let test = load_data(test_path, cfg.data.format, task, cfg.data.target_columns, true)?;
        out += &metric_lines(task, "test", &test, &predictor.predict(&test)?)?;
    }
    let _ = writeln!(out, "model written to {}", model_path.display());
    if let Some(r) = &cfg.output.report {
        write(r, &out)?;
    }
    Ok(out)
}

/// Fits `model`, optionally inside min-max scaling, and packages the result.
pub fn fit_model_file(model: ReservoirModel, scale: bool, train: &Dataset) -> Result<ModelFile> {
    if scale {
        let mut scaled = MinMaxScaled::new(model, true);
        scaled.fit(train)?;
        Ok(ModelFile::new(
            scaled.inner().clone(),
            scaled.x_scaler().cloned(),
            scaled.y_scaler().cloned(),
        ))
    } else {
        let mut model = model;
        model.fit(train)?;
        Ok(ModelFile::new(model, None, None))
    }
}

pub struct PredictArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    pub format: DataFormat,
    pub target_columns: usize,
    pub out: Option<PathBuf>,
}

/// Applies a saved model. Table data with exactly the model's input width
/// is treated as unlabeled and no metrics are reported.
pub fn predict(args: &PredictArgs) -> Result<String> {
    let file = ModelFile::load(&args.model)?;
    let task = file.model.task();
    let width = file.input_width()?;
    let with_targets = match args.format {
        DataFormat::Digits => true,
        DataFormat::Table => {
            let cols = read_csv(&args.data).with_context(|| format!("reading {}", args.data.display()))?.data.cols();
            if cols == width {
                false
            } else if cols == width + args.target_columns {
                true
            } else {
                return Err(rcnkit::RcnError::width(
                    format!("{} (model input width {width}, plus {} target column(s) if labeled)", args.data.display(), args.target_columns),
                    width,
                    cols,
                )
                .into());
            }
        }
    };
    let dataset = load_data(&args.data, args.format, task, args.target_columns, with_targets)?;
    let pred = file.predictor().predict(&dataset)?;
    let mut out = String::new();
    if with_targets {
        out += &metric_lines(task, "test", &dataset, &pred)?;
    }
    let table = prediction_matrix(&pred)?;
    match &args.out {
        Some(p) => {
            write_csv(p, None, &table).with_context(|| format!("writing {}", p.display()))?;
            let _ = writeln!(out, "{} predictions written to {}", table.rows(), p.display());
        }
        None if !with_targets => {
            for r in table.row_iter() {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        None => {}
    }
    Ok(out)
}

fn target_matrix(t: &Target) -> Result<Matrix> {
    match t {
        Target::Values(m) => Ok(m.clone()),
        Target::Labels(l) => Ok(Matrix::column_vector(&l.iter().map(|&v| v as f64).collect::<Vec<_>>())?),
    }
}

/// Flattens a prediction to rows; per-step sequence outputs get the
/// sequence index as a leading column.
pub fn prediction_matrix(p: &Prediction) -> Result<Matrix> {
    match p {
        Prediction::Instances(t) | Prediction::PerSequence(t) => target_matrix(t),
        Prediction::PerStep(parts) => {
            let mats = parts
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let m = target_matrix(t)?;
                    Ok(Matrix::hstack(&[&Matrix::filled(m.rows(), 1, i as f64), &m])?)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Matrix::vstack(&mats.iter().collect::<Vec<_>>())?)
        }
    }
}

/// Runs the configured search plan on the training data.
pub fn search(cfg: &RunConfig) -> Result<String> {
    let train_path = cfg.data.train.as_ref().ok_or_else(|| usage("no training data (set data.train)"))?;
    let task = cfg.task_kind();
    let initial = cfg.estimator_params()?;
    let steps = cfg.search_steps()?;
    let train = load_data(train_path, cfg.data.format, task, cfg.data.target_columns, true)?;
    let scale = cfg.scale;
    let factory = |p: &rcnkit::estimators::Params| -> rcnkit::Result<Box<dyn Estimator>> {
        let model = cfg.build_model(p)?;
        Ok(if scale {
            Box::new(MinMaxScaled::new(model, true))
        } else {
            Box::new(model)
        })
    };
    let result = run_search(&initial, &steps, &factory, &train)?;
    let text = result.text_report();
    if let Some(r) = &cfg.output.report {
        write(r, &text)?;
        write(&r.with_extension("csv"), &result.csv_report())?;
    }
    if let Some(p) = &cfg.output.params {
        write(p, &params_toml(&result.final_params))?;
    }
    Ok(text)
}

pub fn generate_mackey_glass(cfg: &MackeyGlassConfig, out: &Path) -> Result<String> {
    let (x, y) = mackey_glass(cfg)?;
    let m = Matrix::hstack(&[&x, &y])?;
    write_csv(out, Some(&["x", "y"]), &m).with_context(|| format!("writing {}", out.display()))?;
    Ok(format!("{} rows written to {}\n", m.rows(), out.display()))
}

pub fn generate_digits(out: &Path) -> Result<String> {
    write(out, bundled_digits_csv())?;
    Ok(format!("digits written to {}\n", out.display()))
}

/// HAR features of a one-column series, written as `x,mean5,mean22`.
pub fn generate_har(input: &Path, out: &Path) -> Result<String> {
    let series = rcnkit::datasets::load_series(input).with_context(|| format!("reading {}", input.display()))?;
    let har = har_features(&series)?;
    write_csv(out, Some(&["x", "mean5", "mean22"]), &har).with_context(|| format!("writing {}", out.display()))?;
    Ok(format!("{} rows written to {}\n", har.rows(), out.display()))
}

pub fn benchmark_digits(sizes: &[usize], seed: u64, out_dir: Option<&Path>) -> Result<String> {
    let rows = bench::digits_benchmark(sizes, seed)?;
    let mut t = Table::new(&["hidden_layer_size", "direction", "state_width", "train_accuracy", "test_accuracy", "fit_seconds"]);
    for r in &rows {
        t.push(vec![
            r.hidden_layer_size.to_string(),
            if r.bidirectional { "bi" } else { "uni" }.into(),
            r.state_width.to_string(),
            fixed(r.train_accuracy, 4),
            fixed(r.test_accuracy, 4),
            fixed(r.fit_seconds, 3),
        ]);
    }
    finish(t, out_dir, "digits")
}

pub fn benchmark_mackey_glass(cfg: &MackeyGlassConfig, hidden: usize, out_dir: Option<&Path>) -> Result<String> {
    let r = bench::mackey_glass_benchmark(cfg, EsnParams { hidden_layer_size: hidden, ..EsnParams::default() })?;
    let mut t = Table::new(&["model", "train_mse", "test_mse", "test_mse_cold_start"]);
    t.push(vec![format!("esn{}", r.hidden_layer_size), sci(r.esn_train_mse), sci(r.esn_test_mse), sci(r.esn_test_mse_cold)]);
    t.push(vec!["ols_raw_input".into(), "".into(), sci(r.ols_test_mse), sci(r.ols_test_mse)]);
    finish(t, out_dir, "mackey_glass")
}

/// Volatility folds on user data, or on synthetic AR(1) series when `dir`
/// is absent.
pub fn benchmark_volatility(dir: Option<&Path>, synthetic_seed: u64, out_dir: Option<&Path>) -> Result<String> {
    let (series, note) = match dir {
        Some(d) => (load_volatility_dir(d).with_context(|| format!("reading volatility data from {}", d.display()))?, String::new()),
        None => (
            bench::synthetic_volatility(synthetic_seed, 2745)?,
            format!("no volatility data given; using synthetic AR(1) series (seed {synthetic_seed})\n"),
        ),
    };
    let rows = bench::volatility_benchmark(&series, &VOLATILITY_HORIZONS, 42)?;
    let mut t = Table::new(&["horizon", "fold", "model", "input", "r2_validation", "r2_test", "mse_test"]);
    for r in &rows {
        t.push(vec![
            r.horizon.to_string(),
            (r.fold + 1).to_string(),
            r.model.name().into(),
            r.input.name().into(),
            fixed(r.r2_validation, 4),
            fixed(r.r2_test, 4),
            sci(r.mse_test),
        ]);
    }
    Ok(note + &finish(t, out_dir, "volatility")?)
}

pub fn benchmark_timing(cfg: &MackeyGlassConfig, sizes: &[usize], out_dir: Option<&Path>) -> Result<String> {
    let rows = bench::timing_benchmark(cfg, sizes)?;
    let mut t = Table::new(&["hidden_layer_size", "fit_seconds", "score_seconds", "test_mse"]);
    for r in &rows {
        t.push(vec![r.hidden_layer_size.to_string(), fixed(r.fit_seconds, 4), fixed(r.score_seconds, 4), sci(r.test_mse)]);
    }
    finish(t, out_dir, "timing")
}

fn finish(t: Table, out_dir: Option<&Path>, stem: &str) -> Result<String> {
    if let Some(d) = out_dir {
        t.write_pair(d, stem)?;
    }
    Ok(t.to_text())
}

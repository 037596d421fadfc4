//! Benchmark reproductions: digits accuracy sweep, Mackey-Glass skill,
//! volatility folds, the sequential search plan and fit/score timing.

use std::time::Instant;

use rcnkit::base::{Activation, Dataset, Matrix, Prediction, SequenceDataset, Target};
use rcnkit::blocks::FanIn;
use rcnkit::datasets::{
    ar1_series, bundled_digits, har_features, mackey_glass, shift_target, volatility_folds, Digits,
    MackeyGlassConfig, VOLATILITY_SERIES,
};
use rcnkit::estimators::{EsnEstimator, EsnParams, Estimator, MinMaxScaled, ParamValue, Params, Projection, TaskKind};
use rcnkit::metrics::{accuracy, mse, r2, Metric};
use rcnkit::model_selection::{
    run_search, train_test_split, Distribution, ParamRange, ParamSpace, Scorer, SearchResult, SearchStep, Splitter,
    Strategy,
};
use rcnkit::readout::{Readout, RidgeAccumulator};
use rcnkit::{RcnError, Result};

/// Reservoir sizes of the digits sweep.
pub const DIGITS_SIZES: [usize; 5] = [50, 100, 200, 400, 500];
/// Reservoir sizes of the timing sweep.
pub const TIMING_SIZES: [usize; 8] = [50, 100, 200, 400, 800, 1600, 3200, 6400];
/// Training rows of the Mackey-Glass split.
pub const MG_TRAIN_ROWS: usize = 1900;

/// Digits classifier hyperparameters used as the benchmark default.
pub fn digits_params(hidden_layer_size: usize, bidirectional: bool) -> EsnParams {
    EsnParams {
        hidden_layer_size,
        k_in: FanIn::Count(5),
        input_scaling: 0.1,
        input_activation: Activation::Identity,
        bias_scaling: 0.5,
        k_rec: FanIn::Count(10),
        spectral_radius: 1.2,
        leakage: 0.1,
        reservoir_activation: Activation::Tanh,
        bidirectional,
        alpha: 1e-5,
        decision_strategy: Projection::WinnerTakesAll,
        ..EsnParams::default()
    }
}

fn labels(p: Prediction) -> Vec<i64> {
    match p {
        Prediction::PerSequence(Target::Labels(l)) | Prediction::Instances(Target::Labels(l)) => l,
        _ => Vec::new(),
    }
}

fn sequence_labels(s: &SequenceDataset) -> Vec<i64> {
    match s.targets() {
        rcnkit::base::SequenceTargets::PerSequence(Target::Labels(l)) => l.clone(),
        _ => Vec::new(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DigitsRow {
    pub hidden_layer_size: usize,
    pub bidirectional: bool,
    pub state_width: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub fit_seconds: f64,
}

/// 80/20 train/test partition of the digits with the given seed.
pub fn digits_split(digits: &Digits, seed: u64) -> Result<(SequenceDataset, SequenceDataset)> {
    let (train, test) = train_test_split(digits.len(), 0.2, seed)?;
    Ok((digits.to_sequences(&train)?, digits.to_sequences(&test)?))
}

pub fn digits_run(train: &SequenceDataset, test: &SequenceDataset, params: EsnParams) -> Result<DigitsRow> {
    let (n, bi) = (params.hidden_layer_size, params.bidirectional);
    let mut est = EsnEstimator::classifier(params)?;
    let start = Instant::now();
    est.fit(&Dataset::Sequences(train.clone()))?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let train_pred = labels(est.predict(&Dataset::Sequences(train.clone()))?);
    let test_pred = labels(est.predict(&Dataset::Sequences(test.clone()))?);
    Ok(DigitsRow {
        hidden_layer_size: n,
        bidirectional: bi,
        state_width: est.model().graph()?.output_width(),
        train_accuracy: accuracy(&sequence_labels(train), &train_pred)?,
        test_accuracy: accuracy(&sequence_labels(test), &test_pred)?,
        fit_seconds,
    })
}

/// Full sweep over sizes × {unidirectional, bidirectional}.
pub fn digits_benchmark(sizes: &[usize], seed: u64) -> Result<Vec<DigitsRow>> {
    let digits = bundled_digits()?;
    let (train, test) = digits_split(&digits, seed)?;
    let mut rows = Vec::new();
    for &n in sizes {
        for bi in [false, true] {
            rows.push(digits_run(&train, &test, digits_params(n, bi))?);
        }
    }
    Ok(rows)
}

/// Mackey-Glass series split into the first 1900 rows for training and the
/// rest for testing.
pub fn mackey_glass_split(cfg: &MackeyGlassConfig) -> Result<(Dataset, Dataset)> {
    let (x, y) = mackey_glass(cfg)?;
    if x.rows() <= MG_TRAIN_ROWS {
        return Err(RcnError::shape("mackey-glass split", format!("need more than {MG_TRAIN_ROWS} rows")));
    }
    let n = x.rows();
    let train = Dataset::instances(x.slice_rows(0..MG_TRAIN_ROWS), Target::Values(y.slice_rows(0..MG_TRAIN_ROWS)))?;
    let test = Dataset::instances(x.slice_rows(MG_TRAIN_ROWS..n), Target::Values(y.slice_rows(MG_TRAIN_ROWS..n)))?;
    Ok((train, test))
}

fn xy(d: &Dataset) -> (&Matrix, &Matrix) {
    match d {
        Dataset::Instances { x, y: Target::Values(y) } => (x, y),
        _ => unreachable!("instance regression data"),
    }
}

fn prediction_values(p: Prediction) -> Result<Matrix> {
    match p {
        Prediction::Instances(Target::Values(m)) => Ok(m),
        _ => Err(RcnError::shape("prediction", "expected real-valued instance outputs")),
    }
}

/// Ordinary least squares `y ≈ a·x + b` on a single input column, solved in
/// closed form.
pub fn ols_1d(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MackeyGlassReport {
    pub hidden_layer_size: usize,
    pub esn_train_mse: f64,
    /// Test rows scored with the reservoir state carried over from the
    /// training rows.
    pub esn_test_mse: f64,
    /// Test rows run from a zero state, transient included.
    pub esn_test_mse_cold: f64,
    pub ols_test_mse: f64,
}

impl MackeyGlassReport {
    pub fn ratio(&self) -> f64 {
        self.esn_test_mse / self.ols_test_mse
    }
}

/// One-step prediction with an ESN against a linear predictor on the raw
/// input.
pub fn mackey_glass_benchmark(cfg: &MackeyGlassConfig, params: EsnParams) -> Result<MackeyGlassReport> {
    let (train, test) = mackey_glass_split(cfg)?;
    let n = params.hidden_layer_size;
    let mut esn = EsnEstimator::regressor(params)?;
    esn.fit(&train)?;
    let (xtr, ytr) = xy(&train);
    let (xte, yte) = xy(&test);
    let esn_train = mse(ytr, &prediction_values(esn.predict(&train)?)?)?;
    let cold = mse(yte, &prediction_values(esn.predict(&test)?)?)?;
    let full = Matrix::vstack(&[xtr, xte])?;
    let warm = esn.model().decision_function(&full)?.slice_rows(xtr.rows()..full.rows());
    let (a, b) = ols_1d(xtr.as_slice(), ytr.as_slice());
    let ols = Matrix::column_vector(&xte.as_slice().iter().map(|v| a * v + b).collect::<Vec<_>>())?;
    Ok(MackeyGlassReport {
        hidden_layer_size: n,
        esn_train_mse: esn_train,
        esn_test_mse: mse(yte, &warm)?,
        esn_test_mse_cold: cold,
        ols_test_mse: mse(yte, &ols)?,
    })
}

/// Ridge regression straight on the input features.
#[derive(Clone, Debug)]
pub struct LinearRegressor {
    alpha: f64,
    readout: Option<Readout>,
}

impl LinearRegressor {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, readout: None }
    }
}

impl Estimator for LinearRegressor {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let (x, y) = match data {
            Dataset::Instances { x, y: Target::Values(y) } => (x, y),
            _ => return Err(RcnError::param("task", "linear regressor needs real-valued instance data")),
        };
        let mut acc = RidgeAccumulator::new(self.alpha)?;
        acc.partial_fit(x, y)?;
        self.readout = Some(acc.finalize()?);
        Ok(())
    }

    fn predict(&self, data: &Dataset) -> Result<Prediction> {
        let r = self.readout.as_ref().ok_or(RcnError::NotFitted)?;
        match data {
            Dataset::Instances { x, .. } => Ok(Prediction::Instances(Target::Values(r.predict(x)?))),
            _ => Err(RcnError::param("task", "linear regressor needs instance data")),
        }
    }
}

/// Reservoir used for volatility forecasting.
pub fn volatility_esn_params(seed: u64) -> EsnParams {
    EsnParams {
        hidden_layer_size: 100,
        input_scaling: 0.5,
        spectral_radius: 0.5,
        leakage: 0.5,
        bias_scaling: 0.5,
        alpha: 1e-3,
        seed,
        ..EsnParams::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolModel {
    Linear,
    Esn,
}

impl VolModel {
    pub fn name(self) -> &'static str {
        match self {
            VolModel::Linear => "linear",
            VolModel::Esn => "esn",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolInput {
    Raw,
    Har,
}

impl VolInput {
    pub fn name(self) -> &'static str {
        match self {
            VolInput::Raw => "raw",
            VolInput::Har => "har",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolatilityRow {
    pub horizon: usize,
    pub fold: usize,
    pub model: VolModel,
    pub input: VolInput,
    pub r2_validation: f64,
    pub r2_test: f64,
    pub mse_test: f64,
}

fn vol_dataset(series: &Matrix, input: VolInput, h: usize) -> Result<Dataset> {
    let (_, y) = shift_target(series, h)?;
    let features = match input {
        VolInput::Raw => series.clone(),
        VolInput::Har => har_features(series)?,
    };
    Dataset::instances(features.slice_rows(0..series.rows() - h), Target::Values(y))
}

/// Synthetic stand-ins for the volatility series: three AR(1) processes
/// with seeds `seed`, `seed + 1` and `seed + 2`.
pub fn synthetic_volatility(seed: u64, len: usize) -> Result<Vec<(String, Matrix)>> {
    VOLATILITY_SERIES
        .iter()
        .enumerate()
        .map(|(i, name)| Ok((name.to_string(), ar1_series(len, 1.0, 0.95, 0.1, seed + i as u64)?)))
        .collect()
}

/// Rotating-fold evaluation. Inputs and targets are scaled to `[0, 1]`
/// with ranges learned on the training series; scores are in original
/// units.
pub fn volatility_benchmark(series: &[(String, Matrix)], horizons: &[usize], esn_seed: u64) -> Result<Vec<VolatilityRow>> {
    let find = |name: &str| -> Result<&Matrix> {
        series
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| RcnError::Empty(format!("volatility series {name}")))
    };
    let mut rows = Vec::new();
    for &h in horizons {
        for (k, fold) in volatility_folds(h).iter().enumerate() {
            for input in [VolInput::Raw, VolInput::Har] {
                let train = vol_dataset(find(fold.train)?, input, h)?;
                let val = vol_dataset(find(fold.validation)?, input, h)?;
                let test = vol_dataset(find(fold.test)?, input, h)?;
                for model in [VolModel::Linear, VolModel::Esn] {
                    let mut est: MinMaxScaled<Box<dyn Estimator>> = MinMaxScaled::new(
                        match model {
                            VolModel::Linear => Box::new(LinearRegressor::new(1e-8)),
                            VolModel::Esn => Box::new(EsnEstimator::regressor(volatility_esn_params(esn_seed))?),
                        },
                        true,
                    );
                    est.fit(&train)?;
                    let pv = prediction_values(est.predict(&val)?)?;
                    let pt = prediction_values(est.predict(&test)?)?;
                    rows.push(VolatilityRow {
                        horizon: h,
                        fold: k,
                        model,
                        input,
                        r2_validation: r2(xy(&val).1, &pv)?.value,
                        r2_test: r2(xy(&test).1, &pt)?.value,
                        mse_test: mse(xy(&test).1, &pt)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Mean test R² over folds for one configuration.
pub fn mean_r2_test(rows: &[VolatilityRow], h: usize, model: VolModel, input: VolInput) -> f64 {
    let sel: Vec<f64> = rows
        .iter()
        .filter(|r| r.horizon == h && r.model == model && r.input == input)
        .map(|r| r.r2_test)
        .collect();
    sel.iter().sum::<f64>() / sel.len() as f64
}

fn floats(values: &[f64]) -> ParamRange {
    ParamRange::Values(values.iter().map(|&v| ParamValue::Float(v)).collect())
}

/// Four-step ESN search: input scaling and spectral radius at random, then
/// grids over leakage, bias scaling and regularization. Each grid contains
/// the starting value of its parameter.
pub fn mackey_glass_search_plan(n_iter: usize, hidden_layer_size: usize, seed: u64) -> (Params, Vec<SearchStep>) {
    let initial = EsnParams {
        hidden_layer_size,
        input_scaling: 0.5,
        spectral_radius: 0.9,
        leakage: 1.0,
        bias_scaling: 1.0,
        alpha: 1e-5,
        ..EsnParams::default()
    }
    .to_params();
    let step = |name: &str, strategy, space: ParamSpace, offset: u64| SearchStep {
        name: name.into(),
        strategy,
        space,
        splitter: Splitter::TimeSeries { n_splits: 5 },
        scorer: Scorer::new(Metric::Mse),
        seed: seed.wrapping_add(offset),
    };
    let mut s1 = ParamSpace::new();
    s1.insert("input_scaling".into(), ParamRange::Dist(Distribution::Uniform { loc: 0.01, scale: 1.0 }));
    s1.insert("spectral_radius".into(), ParamRange::Dist(Distribution::Uniform { loc: 0.0, scale: 1.5 }));
    let mut s2 = ParamSpace::new();
    s2.insert("leakage".into(), floats(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]));
    let mut s3 = ParamSpace::new();
    s3.insert("bias_scaling".into(), floats(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]));
    let mut s4 = ParamSpace::new();
    s4.insert("alpha".into(), floats(&[1e-7, 1e-6, 1e-5, 1e-4, 1e-3]));
    let steps = vec![
        step("input_scaling+spectral_radius", Strategy::Random { n_iter }, s1, 0),
        step("leakage", Strategy::Grid, s2, 1),
        step("bias_scaling", Strategy::Grid, s3, 2),
        step("alpha", Strategy::Grid, s4, 3),
    ];
    (initial, steps)
}

pub fn esn_factory(task: TaskKind) -> impl Fn(&Params) -> Result<Box<dyn Estimator>> + Sync {
    move |p: &Params| -> Result<Box<dyn Estimator>> { Ok(Box::new(EsnEstimator::from_params(task, p)?)) }
}

/// Runs the four-step plan on the Mackey-Glass training rows.
pub fn mackey_glass_search(cfg: &MackeyGlassConfig, n_iter: usize, hidden_layer_size: usize, seed: u64) -> Result<SearchResult> {
    let (train, _) = mackey_glass_split(cfg)?;
    let (initial, steps) = mackey_glass_search_plan(n_iter, hidden_layer_size, seed);
    run_search(&initial, &steps, &esn_factory(TaskKind::Regression), &train)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub hidden_layer_size: usize,
    pub fit_seconds: f64,
    pub score_seconds: f64,
    pub test_mse: f64,
}

/// Wall-clock fit and score times of the default ESN on the Mackey-Glass
/// split.
pub fn timing_benchmark(cfg: &MackeyGlassConfig, sizes: &[usize]) -> Result<Vec<TimingRow>> {
    let (train, test) = mackey_glass_split(cfg)?;
    sizes
        .iter()
        .map(|&n| {
            let mut esn = EsnEstimator::regressor(EsnParams {
                hidden_layer_size: n,
                ..EsnParams::default()
            })?;
            let t0 = Instant::now();
            esn.fit(&train)?;
            let fit_seconds = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let pred = prediction_values(esn.predict(&test)?)?;
            let test_mse = mse(xy(&test).1, &pred)?;
            Ok(TimingRow {
                hidden_layer_size: n,
                fit_seconds,
                score_seconds: t1.elapsed().as_secs_f64(),
                test_mse,
            })
        })
        .collect()
}

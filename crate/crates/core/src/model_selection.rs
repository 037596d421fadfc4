//! Cross-validation and sequential hyperparameter search.
//!
//! A search is an ordered list of steps. Each step generates candidates
//! (a full grid or seeded random draws), scores every candidate by
//! cross-validation with the current parameters overridden by the
//! candidate, and merges the best candidate into the current parameters
//! before the next step runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::base::{Dataset, Rng};
use crate::error::{RcnError, Result};
use crate::estimators::Estimator;
use crate::metrics::{score_dataset, Metric};

pub use crate::estimators::{ParamValue, Params};

/// Sampling distribution for random search.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    /// Uniform on `[loc, loc + scale]`.
    Uniform { loc: f64, scale: f64 },
    /// Log-uniform on `[lo, hi]`.
    LogUniform { lo: f64, hi: f64 },
    Choice(Vec<ParamValue>),
}

impl Distribution {
    pub fn validate(&self, name: &str) -> Result<()> {
        match self {
            Distribution::Uniform { loc, scale } if loc.is_finite() && scale.is_finite() && *scale > 0.0 => Ok(()),
            Distribution::LogUniform { lo, hi } if lo.is_finite() && hi.is_finite() && *lo > 0.0 && hi > lo => Ok(()),
            Distribution::Choice(v) if !v.is_empty() => Ok(()),
            Distribution::Uniform { .. } => Err(RcnError::param(name, "uniform needs scale > 0")),
            Distribution::LogUniform { .. } => Err(RcnError::param(name, "log-uniform needs hi > lo > 0")),
            Distribution::Choice(_) => Err(RcnError::param(name, "choice needs at least one value")),
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> ParamValue {
        match self {
            Distribution::Uniform { loc, scale } => ParamValue::Float(loc + scale * rng.uniform()),
            Distribution::LogUniform { lo, hi } => {
                let (a, b) = (lo.ln(), hi.ln());
                ParamValue::Float((a + (b - a) * rng.uniform()).exp().clamp(*lo, *hi))
            }
            Distribution::Choice(v) => v[rng.below(v.len())].clone(),
        }
    }
}

/// Values of one parameter: an explicit list or a distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamRange {
    Values(Vec<ParamValue>),
    Dist(Distribution),
}

/// Parameter name to range, iterated in sorted key order.
pub type ParamSpace = BTreeMap<String, ParamRange>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Full Cartesian product of the value lists.
    Grid,
    Random { n_iter: usize },
}

/// Candidate overrides in generation order. Grids vary the last key
/// (in sorted order) fastest; random draw `i` uses the stream
/// `Rng::derive(seed, i)`.
pub fn candidates(strategy: Strategy, space: &ParamSpace, seed: u64) -> Result<Vec<Params>> {
    match strategy {
        Strategy::Grid => {
            let mut out = vec![Params::new()];
            for (name, range) in space {
                let values = match range {
                    ParamRange::Values(v) if !v.is_empty() => v,
                    ParamRange::Values(_) => return Err(RcnError::param(name.as_str(), "empty value list")),
                    ParamRange::Dist(Distribution::Choice(v)) if !v.is_empty() => v,
                    ParamRange::Dist(_) => {
                        return Err(RcnError::param(name.as_str(), "grid search needs explicit values"))
                    }
                };
                out = out
                    .into_iter()
                    .flat_map(|base| {
                        values.iter().map(move |v| {
                            let mut p = base.clone();
                            p.insert(name.clone(), v.clone());
                            p
                        })
                    })
                    .collect();
            }
            Ok(out)
        }
        Strategy::Random { n_iter } => {
            if n_iter == 0 {
                return Err(RcnError::param("n_iter", "must be at least 1"));
            }
            let dists = space
                .iter()
                .map(|(name, range)| {
                    let d = match range {
                        ParamRange::Values(v) => Distribution::Choice(v.clone()),
                        ParamRange::Dist(d) => d.clone(),
                    };
                    d.validate(name)?;
                    Ok((name.clone(), d))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((0..n_iter)
                .map(|i| {
                    let mut rng = Rng::derive(seed, i as u64);
                    dists.iter().map(|(n, d)| (n.clone(), d.sample(&mut rng))).collect()
                })
                .collect())
        }
    }
}

/// Train and test indices of one fold.
pub type Fold = (Vec<usize>, Vec<usize>);

#[derive(Clone, Debug, PartialEq)]
pub enum Splitter {
    KFold { k: usize, shuffle: bool, seed: u64 },
    /// Expanding window: split `i` trains on `[0, (i+1)·s)` and tests on
    /// `[(i+1)·s, (i+2)·s)` with `s = ⌊n / (n_splits + 1)⌋`.
    TimeSeries { n_splits: usize },
    Predefined(Vec<Fold>),
}

impl Splitter {
    pub fn n_splits(&self) -> usize {
        match self {
            Splitter::KFold { k, .. } => *k,
            Splitter::TimeSeries { n_splits } => *n_splits,
            Splitter::Predefined(f) => f.len(),
        }
    }

    pub fn split(&self, n: usize) -> Result<Vec<Fold>> {
        match self {
            Splitter::KFold { k, shuffle, seed } => {
                let k = *k;
                if k < 2 || n < k {
                    return Err(RcnError::param("cv", format!("k-fold needs 2 <= k <= n, got k={k}, n={n}")));
                }
                let mut order: Vec<usize> = (0..n).collect();
                if *shuffle {
                    Rng::new(*seed).shuffle(&mut order);
                }
                let mut folds = Vec::with_capacity(k);
                let mut start = 0;
                for i in 0..k {
                    let size = n / k + usize::from(i < n % k);
                    let mut test = order[start..start + size].to_vec();
                    test.sort_unstable();
                    let mut train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
                    train.sort_unstable();
                    folds.push((train, test));
                    start += size;
                }
                Ok(folds)
            }
            Splitter::TimeSeries { n_splits } => {
                let s = *n_splits;
                if s < 1 || n < s + 1 {
                    return Err(RcnError::param(
                        "cv",
                        format!("time-series split needs n >= n_splits + 1, got n={n}, n_splits={s}"),
                    ));
                }
                let size = n / (s + 1);
                Ok((0..s)
                    .map(|i| ((0..(i + 1) * size).collect(), ((i + 1) * size..(i + 2) * size).collect()))
                    .collect())
            }
            Splitter::Predefined(folds) => {
                if folds.is_empty() {
                    return Err(RcnError::param("cv", "predefined split has no folds"));
                }
                let mut covered = vec![false; n];
                for (train, test) in folds {
                    if train.is_empty() || test.is_empty() {
                        return Err(RcnError::param("cv", "predefined fold with an empty side"));
                    }
                    for &i in train.iter().chain(test) {
                        if i >= n {
                            return Err(RcnError::param("cv", format!("fold index {i} out of range for n={n}")));
                        }
                        covered[i] = true;
                    }
                }
                if let Some(missing) = covered.iter().position(|c| !c) {
                    return Err(RcnError::param("cv", format!("index {missing} is in no fold")));
                }
                Ok(folds.clone())
            }
        }
    }
}

/// Shuffled `(train, test)` partition with `⌈n·test_fraction⌉` test items.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<Fold> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(RcnError::param("test_fraction", "must lie in (0, 1)"));
    }
    let n_test = (n as f64 * test_fraction).ceil() as usize;
    if n_test == 0 || n_test >= n {
        return Err(RcnError::param("test_fraction", format!("leaves an empty side for n={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut order);
    let test = order[..n_test].to_vec();
    let train = order[n_test..].to_vec();
    Ok((train, test))
}

/// Metric with an orientation; scores are always maximized, so loss
/// metrics are negated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scorer {
    pub metric: Metric,
    pub greater_is_better: bool,
}

impl Scorer {
    pub fn new(metric: Metric) -> Self {
        Self {
            metric,
            greater_is_better: metric.greater_is_better(),
        }
    }

    pub fn score(&self, estimator: &dyn Estimator, data: &Dataset) -> Result<f64> {
        let v = score_dataset(self.metric, data, &estimator.predict(data)?)?.value;
        Ok(if self.greater_is_better { v } else { -v })
    }
}

/// Builds an unfitted estimator from parameters.
pub type Factory<'a> = dyn Fn(&Params) -> Result<Box<dyn Estimator>> + Sync + 'a;

fn fold_score(factory: &Factory, params: &Params, data: &Dataset, fold: &Fold, scorer: &Scorer) -> Result<f64> {
    let mut est = factory(params)?;
    est.fit(&data.subset(&fold.0))?;
    scorer.score(est.as_ref(), &data.subset(&fold.1))
}

/// Per-fold scores. Folds whose estimator fails, or whose score is not
/// finite, score `−∞`.
pub fn cross_validate(
    factory: &Factory,
    params: &Params,
    data: &Dataset,
    splitter: &Splitter,
    scorer: &Scorer,
) -> Result<Vec<f64>> {
    let folds = splitter.split(data.len())?;
    Ok(folds.iter().map(|f| evaluate_fold(factory, params, data, f, scorer).0).collect())
}

fn evaluate_fold(factory: &Factory, params: &Params, data: &Dataset, fold: &Fold, scorer: &Scorer) -> (f64, Option<String>) {
    match fold_score(factory, params, data, fold, scorer) {
        Ok(s) if s.is_finite() => (s, None),
        Ok(s) => (f64::NEG_INFINITY, Some(format!("non-finite score {s}"))),
        Err(e) => (f64::NEG_INFINITY, Some(e.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchStep {
    pub name: String,
    pub strategy: Strategy,
    pub space: ParamSpace,
    pub splitter: Splitter,
    pub scorer: Scorer,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateResult {
    /// The overrides this candidate applied.
    pub params: Params,
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// First failure message, if any fold failed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub name: String,
    pub candidates: Vec<CandidateResult>,
    pub best_index: usize,
    pub best_score: f64,
    /// Full parameter set after merging the winner.
    pub params_after: Params,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub initial: Params,
    pub steps: Vec<StepResult>,
    pub final_params: Params,
}

fn merged(base: &Params, overrides: &Params) -> Params {
    let mut p = base.clone();
    p.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
    p
}

fn evaluate_candidate(factory: &Factory, current: &Params, overrides: &Params, data: &Dataset, folds: &[Fold], scorer: &Scorer) -> CandidateResult {
    let params = merged(current, overrides);
    let mut scores = Vec::with_capacity(folds.len());
    let mut error = None;
    for fold in folds {
        let (s, e) = evaluate_fold(factory, &params, data, fold, scorer);
        scores.push(s);
        if error.is_none() {
            error = e;
        }
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let std = if mean.is_finite() {
        (scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n).sqrt()
    } else {
        f64::NAN
    };
    CandidateResult {
        params: overrides.clone(),
        fold_scores: scores,
        mean: if mean.is_nan() { f64::NEG_INFINITY } else { mean },
        std,
        error,
    }
}

/// Index of the first candidate with the maximal mean score.
fn best_candidate(results: &[CandidateResult]) -> usize {
    let mut best = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        if r.mean > results[best].mean {
            best = i;
        }
    }
    best
}

/// Runs the steps in order. Candidates of a step are evaluated in parallel;
/// the outcome depends only on the scores and the generation order. A step
/// whose candidates all fail leaves the parameters unchanged.
pub fn run_search(initial: &Params, steps: &[SearchStep], factory: &Factory, data: &Dataset) -> Result<SearchResult> {
    let mut current = initial.clone();
    let mut results = Vec::with_capacity(steps.len());
    for step in steps {
        let cands = candidates(step.strategy, &step.space, step.seed)?;
        let folds = step.splitter.split(data.len())?;
        let evaluated: Vec<CandidateResult> = cands
            .par_iter()
            .map(|c| evaluate_candidate(factory, &current, c, data, &folds, &step.scorer))
            .collect();
        let best = best_candidate(&evaluated);
        let best_score = evaluated[best].mean;
        if best_score.is_finite() {
            current = merged(&current, &evaluated[best].params);
        }
        results.push(StepResult {
            name: step.name.clone(),
            candidates: evaluated,
            best_index: best,
            best_score,
            params_after: current.clone(),
        });
    }
    Ok(SearchResult {
        initial: initial.clone(),
        steps: results,
        final_params: current,
    })
}

fn format_params(p: &Params) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

impl SearchResult {
    /// Best score of each step in order.
    pub fn step_bests(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.best_score).collect()
    }

    /// Plain-text report with one table per step.
    pub fn text_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "initial: {}", format_params(&self.initial));
        for (i, step) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "\nstep {} ({}): {} candidates", i + 1, step.name, step.candidates.len());
            let _ = writeln!(out, "{:>5}  {:>14}  {:>12}  params", "#", "mean", "std");
            for (j, c) in step.candidates.iter().enumerate() {
                let mark = if j == step.best_index { "*" } else { " " };
                let _ = writeln!(out, "{mark}{j:>4}  {:>14.6e}  {:>12.4e}  {}", c.mean, c.std, format_params(&c.params));
            }
            let _ = writeln!(out, "best: #{} score {:.6e}", step.best_index, step.best_score);
            let _ = writeln!(out, "params: {}", format_params(&step.params_after));
        }
        let _ = writeln!(out, "\nfinal: {}", format_params(&self.final_params));
        out
    }

    /// Machine-readable twin of the text report: one row per candidate.
    pub fn csv_report(&self) -> String {
        let mut out = String::from("step,name,candidate,best,mean,std,fold_scores,params,error\n");
        for (i, step) in self.steps.iter().enumerate() {
            for (j, c) in step.candidates.iter().enumerate() {
                let folds = c.fold_scores.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(";");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:?},{:?},{},{},{}",
                    i + 1,
                    csv_field(&step.name),
                    j,
                    j == step.best_index,
                    c.mean,
                    c.std,
                    folds,
                    csv_field(&format_params(&c.params)),
                    csv_field(c.error.as_deref().unwrap_or("")),
                );
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

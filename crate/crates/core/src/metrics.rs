//! Regression and classification metrics.
//!
//! Sequence metrics pool all time steps (or all sequence labels) into one
//! flat collection before scoring, so every step carries equal weight and a
//! single sequence scores exactly like the plain metric.

use std::fmt;
use std::str::FromStr;

use crate::base::{Dataset, Label, Matrix, Prediction, SequenceTargets, Target};
use crate::error::{RcnError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Mse,
    R2,
    Accuracy,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::R2 => "r2",
            Metric::Accuracy => "accuracy",
        }
    }

    pub fn greater_is_better(self) -> bool {
        !matches!(self, Metric::Mse)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = RcnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" | "mean_squared_error" => Ok(Metric::Mse),
            "r2" => Ok(Metric::R2),
            "accuracy" => Ok(Metric::Accuracy),
            other => Err(RcnError::param("metric", format!("unknown metric `{other}` (mse, r2, accuracy)"))),
        }
    }
}

/// A computed metric. `degenerate` marks R² on a constant truth, where the
/// value is 1 for a perfect prediction and 0 otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricValue {
    pub metric: Metric,
    pub value: f64,
    pub count: usize,
    pub degenerate: bool,
}

fn check_shapes(y_true: &Matrix, y_pred: &Matrix) -> Result<()> {
    if y_true.shape() != y_pred.shape() {
        return Err(RcnError::shape(
            "metric",
            format!("truth is {:?}, prediction is {:?}", y_true.shape(), y_pred.shape()),
        ));
    }
    if y_true.rows() == 0 {
        return Err(RcnError::Empty("metric".into()));
    }
    Ok(())
}

/// Mean squared error over all entries.
pub fn mse(y_true: &Matrix, y_pred: &Matrix) -> Result<f64> {
    check_shapes(y_true, y_pred)?;
    let sse: f64 = y_true
        .as_slice()
        .iter()
        .zip(y_pred.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sse / y_true.as_slice().len() as f64)
}

/// Coefficient of determination `1 − SSE/SST`, averaged over output columns.
pub fn r2(y_true: &Matrix, y_pred: &Matrix) -> Result<MetricValue> {
    check_shapes(y_true, y_pred)?;
    let n = y_true.rows() as f64;
    let mut total = 0.0;
    let mut degenerate = false;
    for j in 0..y_true.cols() {
        let t = y_true.column(j);
        let p = y_pred.column(j);
        let mean = t.iter().sum::<f64>() / n;
        let sst: f64 = t.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sse: f64 = t.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
        total += if sst > 0.0 {
            1.0 - sse / sst
        } else {
            degenerate = true;
            if sse == 0.0 {
                1.0
            } else {
                0.0
            }
        };
    }
    Ok(MetricValue {
        metric: Metric::R2,
        value: total / y_true.cols() as f64,
        count: y_true.rows(),
        degenerate,
    })
}

/// Fraction of equal labels.
pub fn accuracy(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(RcnError::shape(
            "accuracy",
            format!("{} true labels, {} predicted", y_true.len(), y_pred.len()),
        ));
    }
    if y_true.is_empty() {
        return Err(RcnError::Empty("accuracy".into()));
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// Scores one prediction against its truth.
pub fn score(metric: Metric, y_true: &Target, y_pred: &Target) -> Result<MetricValue> {
    let plain = |value: f64| MetricValue {
        metric,
        value,
        count: y_true.len(),
        degenerate: false,
    };
    match (metric, y_true, y_pred) {
        (Metric::Mse, Target::Values(t), Target::Values(p)) => Ok(plain(mse(t, p)?)),
        (Metric::R2, Target::Values(t), Target::Values(p)) => r2(t, p),
        (Metric::Accuracy, Target::Labels(t), Target::Labels(p)) => Ok(plain(accuracy(t, p)?)),
        (Metric::Accuracy, _, _) => Err(RcnError::param("metric", "accuracy needs label targets")),
        _ => Err(RcnError::param("metric", format!("{metric} needs real-valued targets"))),
    }
}

/// Scores sequence predictions by pooling every sequence into one collection.
pub fn sequence_metric(metric: Metric, y_true: &[Target], y_pred: &[Target]) -> Result<MetricValue> {
    if y_true.len() != y_pred.len() {
        return Err(RcnError::shape(
            "sequence metric",
            format!("{} true sequences, {} predicted", y_true.len(), y_pred.len()),
        ));
    }
    for (i, (t, p)) in y_true.iter().zip(y_pred).enumerate() {
        if t.len() != p.len() {
            return Err(RcnError::shape(
                format!("sequence metric, sequence {i}"),
                format!("{} true steps, {} predicted", t.len(), p.len()),
            ));
        }
    }
    let t = Target::concat(&y_true.iter().collect::<Vec<_>>())?;
    let p = Target::concat(&y_pred.iter().collect::<Vec<_>>())?;
    score(metric, &t, &p)
}

/// Scores a prediction against the targets of the dataset it was made for.
pub fn score_dataset(metric: Metric, data: &Dataset, prediction: &Prediction) -> Result<MetricValue> {
    match (data, prediction) {
        (Dataset::Instances { y, .. }, Prediction::Instances(p)) => score(metric, y, p),
        (Dataset::Sequences(s), Prediction::PerStep(p)) => match s.targets() {
            SequenceTargets::PerStep(t) => sequence_metric(metric, t, p),
            SequenceTargets::PerSequence(_) => Err(kind_mismatch()),
        },
        (Dataset::Sequences(s), Prediction::PerSequence(p)) => match s.targets() {
            SequenceTargets::PerSequence(t) => score(metric, t, p),
            SequenceTargets::PerStep(_) => Err(kind_mismatch()),
        },
        _ => Err(kind_mismatch()),
    }
}

fn kind_mismatch() -> RcnError {
    RcnError::shape("metric", "prediction kind does not match the dataset targets")
}

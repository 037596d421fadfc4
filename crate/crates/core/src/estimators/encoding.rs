use std::fmt;
use std::str::FromStr;

use crate::base::{Label, Matrix};
use crate::error::{RcnError, Result};

/// Sorted class list with one-hot targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelEncoding {
    classes: Vec<Label>,
}

impl LabelEncoding {
    pub fn fit(labels: &[Label]) -> Result<Self> {
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        Self::from_classes(classes)
    }

    /// Classes must be distinct; their order defines the output columns.
    pub fn from_classes(classes: Vec<Label>) -> Result<Self> {
        if classes.is_empty() {
            return Err(RcnError::Empty("label encoding".into()));
        }
        let mut sorted = classes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(RcnError::param("classes", "duplicate class"));
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> &[Label] {
        &self.classes
    }

    pub fn width(&self) -> usize {
        self.classes.len()
    }

    pub fn index_of(&self, label: Label) -> Result<usize> {
        self.classes
            .iter()
            .position(|&c| c == label)
            .ok_or(RcnError::UnknownLabel(label))
    }

    /// One row per label with a single 1 in the class column.
    pub fn encode(&self, labels: &[Label]) -> Result<Matrix> {
        let w = self.width();
        let mut data = vec![0.0; labels.len() * w];
        for (i, &l) in labels.iter().enumerate() {
            data[i * w + self.index_of(l)?] = 1.0;
        }
        Ok(Matrix::from_raw(labels.len(), w, data))
    }

    /// `rows` copies of the one-hot row of `label`.
    pub fn encode_repeated(&self, label: Label, rows: usize) -> Result<Matrix> {
        let w = self.width();
        let k = self.index_of(label)?;
        let mut data = vec![0.0; rows * w];
        for r in 0..rows {
            data[r * w + k] = 1.0;
        }
        Ok(Matrix::from_raw(rows, w, data))
    }

    pub fn decode(&self, index: usize) -> Result<Label> {
        self.classes.get(index).copied().ok_or_else(|| {
            RcnError::shape("label decoding", format!("class index {index} out of range"))
        })
    }

    /// Label of the largest output in each row.
    pub fn decode_rows(&self, outputs: &Matrix) -> Result<Vec<Label>> {
        if outputs.cols() != self.width() {
            return Err(RcnError::width("label decoding", self.width(), outputs.cols()));
        }
        outputs.row_iter().map(|r| self.decode(argmax(r))).collect()
    }
}

/// Sequence-to-label aggregation of per-step outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Projection {
    /// Column sums over all steps.
    WinnerTakesAll,
    /// The final step only.
    LastValue,
    /// Column means over all steps.
    MeanValue,
}

impl Projection {
    pub fn name(self) -> &'static str {
        match self {
            Projection::WinnerTakesAll => "winner_takes_all",
            Projection::LastValue => "last_value",
            Projection::MeanValue => "mean_value",
        }
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Projection {
    type Err = RcnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "winner_takes_all" => Ok(Projection::WinnerTakesAll),
            "last_value" => Ok(Projection::LastValue),
            "mean_value" => Ok(Projection::MeanValue),
            other => Err(RcnError::param(
                "decision_strategy",
                format!("unknown strategy `{other}` (winner_takes_all, last_value, mean_value)"),
            )),
        }
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn aggregate(outputs: &Matrix, p: Projection) -> Vec<f64> {
    match p {
        Projection::LastValue => outputs.row(outputs.rows() - 1).to_vec(),
        Projection::WinnerTakesAll | Projection::MeanValue => {
            let mut acc = vec![0.0; outputs.cols()];
            for row in outputs.row_iter() {
                acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
            }
            if p == Projection::MeanValue {
                let t = outputs.rows() as f64;
                acc.iter_mut().for_each(|a| *a /= t);
            }
            acc
        }
    }
}

/// Class index chosen for a `T × N_out` output block; ties go to the lowest
/// index.
pub fn project(outputs: &Matrix, p: Projection) -> Result<usize> {
    if outputs.rows() == 0 {
        return Err(RcnError::Empty("projection".into()));
    }
    Ok(argmax(&aggregate(outputs, p)))
}

/// Real-valued sequence output: the final row for `LastValue`, the column
/// means otherwise.
pub fn project_values(outputs: &Matrix, p: Projection) -> Result<Vec<f64>> {
    if outputs.rows() == 0 {
        return Err(RcnError::Empty("projection".into()));
    }
    let p = if p == Projection::WinnerTakesAll { Projection::MeanValue } else { p };
    Ok(aggregate(outputs, p))
}

/// Softmax of a row of linear outputs. A monotone convenience, not a
/// calibrated probability.
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = values.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_hot_round_trip() {
        let enc = LabelEncoding::fit(&[2, 0, 1, 2]).unwrap();
        assert_eq!(enc.width(), 3);
        let m = enc.encode(&[1]).unwrap();
        assert_eq!(m.row(0), &[0.0, 1.0, 0.0]);
        let labels = vec![2, 1, 0, 0];
        assert_eq!(enc.decode_rows(&enc.encode(&labels).unwrap()).unwrap(), labels);
        assert!(matches!(enc.encode(&[5]), Err(RcnError::UnknownLabel(5))));
        let single = LabelEncoding::fit(&[7, 7]).unwrap();
        assert_eq!(single.width(), 1);
        assert_eq!(single.decode_rows(&Matrix::from_rows(&[[-3.0]]).unwrap()).unwrap(), vec![7]);
        assert!(LabelEncoding::from_classes(vec![1, 1]).is_err());
    }

    #[test]
    fn projections() {
        let m = Matrix::from_rows(&[[0.1, 0.9], [0.2, 0.8]]).unwrap();
        assert_eq!(project(&m, Projection::WinnerTakesAll).unwrap(), 1);
        let tie = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        for p in [Projection::WinnerTakesAll, Projection::LastValue, Projection::MeanValue] {
            assert_eq!(project(&tie, p).unwrap(), 0);
        }
        let m = Matrix::from_rows(&[[3.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(project(&m, Projection::LastValue).unwrap(), 1);
        assert_eq!(project(&m, Projection::MeanValue).unwrap(), 0);
        assert_eq!(project_values(&m, Projection::LastValue).unwrap(), vec![0.0, 1.0]);
        assert_eq!(project_values(&m, Projection::WinnerTakesAll).unwrap(), vec![1.5, 0.5]);
        assert!(project(&Matrix::zeros(0, 2), Projection::LastValue).is_err());
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1.0, 2.0, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p[0] < p[1] && p[1] < p[2]);
        assert_eq!(softmax(&[1000.0, 1000.0]), vec![0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn scaling_keeps_winner(values in proptest::collection::vec(-5.0f64..5.0, 12), c in 0.01f64..100.0) {
            let m = Matrix::new(4, 3, values).unwrap();
            prop_assert_eq!(
                project(&m, Projection::WinnerTakesAll).unwrap(),
                project(&m.scale(c), Projection::WinnerTakesAll).unwrap()
            );
        }
    }
}

use crate::base::Matrix;
use crate::error::{RcnError, Result};

/// Per-column min-max scaling onto `[0, 1]`.
///
/// Columns whose training minimum equals their maximum are flagged as
/// degenerate and transform to a constant 0; inverting such a column yields
/// the training constant.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(train: &Matrix) -> Result<Self> {
        if train.rows() == 0 {
            return Err(RcnError::Empty("min-max scaler fit".into()));
        }
        let mut min = train.row(0).to_vec();
        let mut max = min.clone();
        for row in train.row_iter().skip(1) {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn from_parts(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(RcnError::shape("min-max scaler", "min and max lengths differ"));
        }
        if min.iter().zip(&max).any(|(a, b)| !a.is_finite() || !b.is_finite() || a > b) {
            return Err(RcnError::shape("min-max scaler", "invalid column range"));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn width(&self) -> usize {
        self.min.len()
    }

    pub fn degenerate_columns(&self) -> Vec<bool> {
        self.min.iter().zip(&self.max).map(|(a, b)| a == b).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate_columns().into_iter().any(|d| d)
    }

    pub fn transform(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        let mut out = m.clone();
        let cols = m.cols();
        for (k, v) in out.as_mut_slice().iter_mut().enumerate() {
            let j = k % cols;
            let span = self.max[j] - self.min[j];
            *v = if span == 0.0 { 0.0 } else { (*v - self.min[j]) / span };
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        let mut out = m.clone();
        let cols = m.cols();
        for (k, v) in out.as_mut_slice().iter_mut().enumerate() {
            let j = k % cols;
            *v = self.min[j] + *v * (self.max[j] - self.min[j]);
        }
        Ok(out)
    }

    fn check(&self, m: &Matrix) -> Result<()> {
        if m.cols() != self.width() {
            return Err(RcnError::width("min-max scaler", self.width(), m.cols()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_and_round_trip() {
        let train = Matrix::column_vector(&[2.0, 4.0, 6.0]).unwrap();
        let s = MinMaxScaler::fit(&train).unwrap();
        let four = Matrix::column_vector(&[4.0]).unwrap();
        assert_eq!(s.transform(&four).unwrap().get(0, 0), 0.5);
        let half = Matrix::column_vector(&[0.5]).unwrap();
        assert_eq!(s.inverse_transform(&half).unwrap().get(0, 0), 4.0);
        assert!(!s.is_degenerate());
        let t = s.transform(&train).unwrap();
        assert_eq!(t.column(0), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn degenerate_column_maps_to_zero() {
        let train = Matrix::column_vector(&[3.0, 3.0]).unwrap();
        let s = MinMaxScaler::fit(&train).unwrap();
        assert!(s.is_degenerate());
        assert_eq!(s.transform(&train).unwrap().column(0), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(MinMaxScaler::fit(&Matrix::zeros(0, 2)).is_err());
        let s = MinMaxScaler::fit(&Matrix::identity(2)).unwrap();
        assert!(s.transform(&Matrix::zeros(1, 3)).is_err());
    }

    proptest! {
        #[test]
        fn inverse_of_transform_is_identity(
            train in proptest::collection::vec(-1e3f64..1e3, 6),
            probe in proptest::collection::vec(-1e4f64..1e4, 4),
        ) {
            let train = Matrix::new(3, 2, train).unwrap();
            let s = MinMaxScaler::fit(&train).unwrap();
            prop_assume!(!s.is_degenerate());
            let x = Matrix::new(2, 2, probe).unwrap();
            let back = s.inverse_transform(&s.transform(&x).unwrap()).unwrap();
            for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            let t = s.transform(&train).unwrap();
            prop_assert!(t.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

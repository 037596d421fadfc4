use crate::base::{Matrix, Rng};
use crate::error::{RcnError, Result};

/// Number of nonzero weights per matrix row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FanIn {
    /// Every row connects to every column.
    Dense,
    Count(usize),
}

impl FanIn {
    /// Effective per-row count for a matrix with `cols` columns.
    pub fn resolve(self, cols: usize) -> usize {
        match self {
            FanIn::Dense => cols,
            FanIn::Count(k) => k.min(cols),
        }
    }

    pub(crate) fn validate(self, name: &str) -> Result<()> {
        match self {
            FanIn::Count(0) => Err(RcnError::param(name, "fan-in must be at least 1")),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for FanIn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FanIn::Dense => f.write_str("dense"),
            FanIn::Count(k) => write!(f, "{k}"),
        }
    }
}

impl std::str::FromStr for FanIn {
    type Err = RcnError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "dense" {
            return Ok(FanIn::Dense);
        }
        let k: usize = s
            .parse()
            .map_err(|_| RcnError::param("fan-in", format!("expected a count or `dense`, got `{s}`")))?;
        let fan = FanIn::Count(k);
        fan.validate("fan-in")?;
        Ok(fan)
    }
}

/// Row-compressed sparse weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseWeights {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseWeights {
    /// All-zero matrix with no stored entries.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from per-row `(column, value)` lists. Columns must be
    /// distinct within a row and in range; values must be finite.
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if entries.len() != rows {
            return Err(RcnError::shape(
                "sparse weights",
                format!("{} row lists for {} rows", entries.len(), rows),
            ));
        }
        let mut out = Self::zeros(rows, cols);
        out.row_ptr.clear();
        out.row_ptr.push(0);
        for (i, mut row) in entries.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(RcnError::shape(
                        "sparse weights",
                        format!("duplicate column {} in row {}", w[0].0, i),
                    ));
                }
            }
            for &(c, v) in &row {
                if c >= cols {
                    return Err(RcnError::shape(
                        "sparse weights",
                        format!("column {c} out of range in row {i}"),
                    ));
                }
                if !v.is_finite() {
                    return Err(RcnError::NonFinite(format!("sparse weights row {i}")));
                }
                out.col_idx.push(c);
                out.values.push(v);
            }
            out.row_ptr.push(out.col_idx.len());
        }
        Ok(out)
    }

    /// Builds a matrix from `(row, column, value)` triples.
    pub fn from_triples(rows: usize, cols: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); rows];
        for &(r, c, v) in triples {
            if r >= rows {
                return Err(RcnError::shape("sparse weights", format!("row {r} out of range")));
            }
            lists[r].push((c, v));
        }
        Self::from_rows(rows, cols, lists)
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(m: &Matrix) -> Self {
        let lists = m
            .row_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(m.rows(), m.cols(), lists).expect("dense matrix rows are well formed")
    }

    /// `rows × cols` matrix with `fan_in` uniform(−1, 1)·`scale` entries per
    /// row at distinct random columns.
    pub fn random_uniform(rows: usize, cols: usize, fan_in: FanIn, scale: f64, rng: &mut Rng) -> Self {
        Self::random_with(rows, cols, fan_in, rng, |r| r.symmetric() * scale)
    }

    /// `rows × cols` matrix with `fan_in` standard-normal entries per row.
    pub fn random_normal(rows: usize, cols: usize, fan_in: FanIn, rng: &mut Rng) -> Self {
        Self::random_with(rows, cols, fan_in, rng, Rng::normal)
    }

    fn random_with(
        rows: usize,
        cols: usize,
        fan_in: FanIn,
        rng: &mut Rng,
        mut draw: impl FnMut(&mut Rng) -> f64,
    ) -> Self {
        let k = fan_in.resolve(cols);
        let mut out = Self::zeros(rows, cols);
        out.row_ptr.clear();
        out.row_ptr.push(0);
        out.col_idx.reserve(rows * k);
        out.values.reserve(rows * k);
        for _ in 0..rows {
            let mut picked = if k == cols {
                (0..cols).collect()
            } else {
                rng.sample_without_replacement(cols, k)
            };
            picked.sort_unstable();
            for c in picked {
                out.col_idx.push(c);
                out.values.push(draw(rng));
            }
            out.row_ptr.push(out.col_idx.len());
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols.max(1));
        for (i, c, v) in self.triples() {
            m.set(i, c, v);
        }
        m
    }

    /// `out += W·x`.
    #[inline]
    pub fn mul_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = 0.0;
            for (&c, &v) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                acc += v * x[c];
            }
            *o += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_in_is_exact() {
        let mut rng = Rng::new(1);
        let w = SparseWeights::random_uniform(50, 10, FanIn::Count(5), 0.3, &mut rng);
        for i in 0..50 {
            assert_eq!(w.row_nnz(i), 5);
            let (cols, vals) = w.row(i);
            assert!(cols.windows(2).all(|p| p[0] < p[1]));
            assert!(vals.iter().all(|v| v.abs() <= 0.3));
        }
        let d = SparseWeights::random_normal(4, 3, FanIn::Dense, &mut rng);
        assert_eq!(d.nnz(), 12);
        let saturated = SparseWeights::random_normal(4, 3, FanIn::Count(8), &mut rng);
        assert_eq!(saturated.nnz(), 12);
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(SparseWeights::from_rows(1, 3, vec![vec![(0, 1.0), (0, 2.0)]]).is_err());
        assert!(SparseWeights::from_rows(1, 3, vec![vec![(3, 1.0)]]).is_err());
        assert!(SparseWeights::from_rows(1, 3, vec![vec![(1, f64::INFINITY)]]).is_err());
        assert!(SparseWeights::from_rows(2, 3, vec![vec![]]).is_err());
    }

    #[test]
    fn dense_round_trip_and_product() {
        let m = Matrix::from_rows(&[[0.0, 2.0], [3.0, 0.0]]).unwrap();
        let w = SparseWeights::from_dense(&m);
        assert_eq!(w.nnz(), 2);
        assert_eq!(w.to_dense(), m);
        let mut out = vec![1.0, 1.0];
        w.mul_add(&[1.0, 10.0], &mut out);
        assert_eq!(out, vec![21.0, 4.0]);
        let back = SparseWeights::from_triples(2, 2, &w.triples().collect::<Vec<_>>()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn parses_fan_in() {
        assert_eq!("dense".parse::<FanIn>().unwrap(), FanIn::Dense);
        assert_eq!("5".parse::<FanIn>().unwrap(), FanIn::Count(5));
        assert!("0".parse::<FanIn>().is_err());
        assert!("x".parse::<FanIn>().is_err());
    }
}

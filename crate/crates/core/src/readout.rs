//! Linear ridge readout trained from running correlation matrices.
//!
//! Every state row `r` is augmented to `r̃ = [r, 1]`. The accumulator keeps
//! `K = Σ r̃ r̃ᵀ` and `P = Σ d r̃ᵀ`, so its memory depends only on the state and
//! output widths. `finalize` solves `(K + εI)·W_outᵀ = Pᵀ`; the ridge term is
//! applied to the intercept as well.

use nalgebra::DMatrix;

use crate::base::{gemm, Matrix};
use crate::error::{RcnError, Result};

/// Rows per block when forming the augmented state matrix.
const BLOCK_ROWS: usize = 2048;

/// Running sums for an incremental ridge regression.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeAccumulator {
    epsilon: f64,
    shape: Option<(usize, usize)>,
    k: Vec<f64>,
    p: Vec<f64>,
    count: usize,
}

impl RidgeAccumulator {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(RcnError::param("alpha", format!("must be finite and >= 0, got {epsilon}")));
        }
        Ok(Self {
            epsilon,
            shape: None,
            k: Vec::new(),
            p: Vec::new(),
            count: 0,
        })
    }

    /// Accumulator with widths fixed up front.
    pub fn with_shape(n_features: usize, n_outputs: usize, epsilon: f64) -> Result<Self> {
        let mut acc = Self::new(epsilon)?;
        acc.fix_shape(n_features, n_outputs);
        Ok(acc)
    }

    fn fix_shape(&mut self, n_features: usize, n_outputs: usize) {
        let d = n_features + 1;
        self.shape = Some((n_features, n_outputs));
        self.k = vec![0.0; d * d];
        self.p = vec![0.0; n_outputs * d];
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sample_count(&self) -> usize {
        self.count
    }

    /// `(state width, output width)` once known.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    /// Number of stored floats in `K` and `P`.
    pub fn storage_len(&self) -> usize {
        self.k.len() + self.p.len()
    }

    /// `K` as a `D_aug × D_aug` matrix.
    pub fn k_matrix(&self) -> Option<Matrix> {
        self.shape.map(|(f, _)| Matrix::from_raw(f + 1, f + 1, self.k.clone()))
    }

    /// `P` as an `N_out × D_aug` matrix.
    pub fn p_matrix(&self) -> Option<Matrix> {
        self.shape.map(|(f, o)| Matrix::from_raw(o, f + 1, self.p.clone()))
    }

    /// Adds the rows of `states` with their `targets`.
    pub fn partial_fit(&mut self, states: &Matrix, targets: &Matrix) -> Result<()> {
        if states.rows() != targets.rows() {
            return Err(RcnError::shape(
                "readout fit",
                format!("{} state rows but {} target rows", states.rows(), targets.rows()),
            ));
        }
        match self.shape {
            Some((f, o)) => {
                if states.cols() != f {
                    return Err(RcnError::width("readout states", f, states.cols()));
                }
                if targets.cols() != o {
                    return Err(RcnError::width("readout targets", o, targets.cols()));
                }
            }
            None if states.rows() == 0 => return Ok(()),
            None => self.fix_shape(states.cols(), targets.cols()),
        }
        if states.rows() == 0 {
            return Ok(());
        }
        if !states.is_finite() {
            return Err(RcnError::NonFinite("readout states".into()));
        }
        if !targets.is_finite() {
            return Err(RcnError::NonFinite("readout targets".into()));
        }
        let (f, o) = self.shape.expect("shape fixed above");
        let d = f + 1;
        let mut aug = vec![0.0; BLOCK_ROWS.min(states.rows()) * d];
        let mut start = 0;
        while start < states.rows() {
            let t = BLOCK_ROWS.min(states.rows() - start);
            for i in 0..t {
                let dst = &mut aug[i * d..(i + 1) * d];
                dst[..f].copy_from_slice(states.row(start + i));
                dst[f] = 1.0;
            }
            let block = &aug[..t * d];
            let y = &targets.as_slice()[start * o..(start + t) * o];
            // K += R̃ᵀ R̃ with R̃ᵀ read as a strided view of the same buffer.
            gemm(d, t, d, 1.0, (block, 1, d as isize), (block, d as isize, 1), 1.0, (&mut self.k, d as isize, 1));
            // P += Yᵀ R̃
            gemm(o, t, d, 1.0, (y, 1, o as isize), (block, d as isize, 1), 1.0, (&mut self.p, d as isize, 1));
            start += t;
        }
        self.symmetrize();
        self.count += states.rows();
        Ok(())
    }

    fn symmetrize(&mut self) {
        let d = match self.shape {
            Some((f, _)) => f + 1,
            None => return,
        };
        for i in 0..d {
            for j in i + 1..d {
                let avg = 0.5 * (self.k[i * d + j] + self.k[j * d + i]);
                self.k[i * d + j] = avg;
                self.k[j * d + i] = avg;
            }
        }
    }

    /// Adds the sums of an accumulator built over other data.
    pub fn merge(&mut self, other: &RidgeAccumulator) -> Result<()> {
        let Some((f, o)) = other.shape else {
            return Ok(());
        };
        match self.shape {
            None => self.fix_shape(f, o),
            Some((sf, so)) => {
                if sf != f {
                    return Err(RcnError::width("readout merge", sf, f));
                }
                if so != o {
                    return Err(RcnError::width("readout merge outputs", so, o));
                }
            }
        }
        self.k.iter_mut().zip(&other.k).for_each(|(a, b)| *a += b);
        self.p.iter_mut().zip(&other.p).for_each(|(a, b)| *a += b);
        self.count += other.count;
        Ok(())
    }

    /// Solves the regularized normal equations.
    pub fn finalize(&self) -> Result<Readout> {
        let (f, o) = match self.shape {
            Some(s) if self.count > 0 => s,
            _ => return Err(RcnError::Empty("readout fit".into())),
        };
        let d = f + 1;
        let mut a = DMatrix::from_row_slice(d, d, &self.k);
        for i in 0..d {
            a[(i, i)] += self.epsilon;
        }
        // Pᵀ is D_aug × N_out; P is stored row-major, i.e. Pᵀ column-major.
        let b = DMatrix::from_column_slice(d, o, &self.p);
        let diag_max = (0..d).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);

        let solution = match a.clone().cholesky() {
            Some(ch) => {
                let l_diag: Vec<f64> = (0..d).map(|i| ch.l_dirty()[(i, i)]).collect();
                let min_pivot = l_diag.iter().fold(f64::INFINITY, |m, v| m.min(v * v));
                let well_posed = min_pivot > (d as f64) * f64::EPSILON * diag_max;
                if self.epsilon == 0.0 && !well_posed {
                    return Err(singular());
                }
                let x = ch.solve(&b);
                if x.iter().all(|v| v.is_finite()) {
                    Some(x)
                } else {
                    None
                }
            }
            None => None,
        };
        let solution = match solution {
            Some(x) => x,
            None if self.epsilon > 0.0 => {
                let svd = a.svd(true, true);
                let tol = svd.singular_values.max() * (d as f64) * f64::EPSILON;
                svd.solve(&b, tol).map_err(|e| RcnError::Singular(e.to_string()))?
            }
            None => return Err(singular()),
        };
        if !solution.iter().all(|v| v.is_finite()) {
            return Err(singular());
        }
        // Row o of W_out is column o of the solution.
        let mut w = Vec::with_capacity(o * d);
        for j in 0..o {
            w.extend(solution.column(j).iter());
        }
        Ok(Readout {
            weights: Matrix::from_raw(o, d, w),
        })
    }
}

fn singular() -> RcnError {
    RcnError::Singular("the state correlation matrix is not positive definite".into())
}

/// Fitted linear map from states to outputs; the last column holds the
/// intercepts.
#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    weights: Matrix,
}

impl Readout {
    /// Wraps an `N_out × (D + 1)` weight matrix.
    pub fn from_weights(weights: Matrix) -> Result<Self> {
        if weights.cols() < 2 {
            return Err(RcnError::shape("readout weights", "need at least one feature column plus the intercept"));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn n_features(&self) -> usize {
        self.weights.cols() - 1
    }

    pub fn n_outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn intercepts(&self) -> Vec<f64> {
        self.weights.column(self.n_features())
    }

    /// `y[n] = W_out · [r[n], 1]`.
    pub fn predict(&self, states: &Matrix) -> Result<Matrix> {
        let f = self.n_features();
        let o = self.n_outputs();
        let d = f + 1;
        if states.cols() != f {
            return Err(RcnError::width("readout predict", f, states.cols()));
        }
        let t = states.rows();
        let b = self.intercepts();
        let mut out = Vec::with_capacity(t * o);
        for _ in 0..t {
            out.extend_from_slice(&b);
        }
        gemm(
            t,
            f,
            o,
            1.0,
            (states.as_slice(), f as isize, 1),
            (self.weights.as_slice(), 1, d as isize),
            1.0,
            (&mut out, o as isize, 1),
        );
        Ok(Matrix::from_raw(t, o, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Rng;

    fn random(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.normal()).collect()).unwrap()
    }

    /// Ridge solution via QR of the stacked system `[R̃; √ε I] W = [D; 0]`.
    fn oracle(r: &Matrix, y: &Matrix, eps: f64) -> DMatrix<f64> {
        let (t, f) = r.shape();
        let d = f + 1;
        let o = y.cols();
        let mut a = DMatrix::zeros(t + d, d);
        let mut b = DMatrix::zeros(t + d, o);
        for i in 0..t {
            for j in 0..f {
                a[(i, j)] = r.get(i, j);
            }
            a[(i, f)] = 1.0;
            for j in 0..o {
                b[(i, j)] = y.get(i, j);
            }
        }
        for i in 0..d {
            a[(t + i, i)] = eps.sqrt();
        }
        let qr = a.qr();
        let qtb = qr.q().transpose() * b;
        qr.r().solve_upper_triangular(&qtb).unwrap().transpose()
    }

    #[test]
    fn matches_direct_solve() {
        let mut rng = Rng::new(3);
        let r = random(200, 50, &mut rng);
        let y = random(200, 3, &mut rng);
        let mut acc = RidgeAccumulator::new(1e-5).unwrap();
        acc.partial_fit(&r, &y).unwrap();
        let w = acc.finalize().unwrap().weights().to_nalgebra();
        let expect = oracle(&r, &y, 1e-5);
        assert!((w - &expect).norm() / expect.norm() < 1e-8);
    }

    #[test]
    fn halves_equal_whole() {
        let mut rng = Rng::new(5);
        let r = random(300, 7, &mut rng);
        let y = random(300, 2, &mut rng);
        let mut whole = RidgeAccumulator::new(1e-3).unwrap();
        whole.partial_fit(&r, &y).unwrap();
        let mut halves = RidgeAccumulator::new(1e-3).unwrap();
        halves.partial_fit(&r.slice_rows(0..150), &y.slice_rows(0..150)).unwrap();
        halves.partial_fit(&r.slice_rows(150..300), &y.slice_rows(150..300)).unwrap();
        let k = whole.k_matrix().unwrap();
        let rel = k.max_abs_diff(&halves.k_matrix().unwrap()) / k.frobenius_norm();
        assert!(rel < 1e-12);
        let p = whole.p_matrix().unwrap();
        assert!(p.max_abs_diff(&halves.p_matrix().unwrap()) / p.frobenius_norm() < 1e-12);

        let mut merged = RidgeAccumulator::new(1e-3).unwrap();
        let mut other = RidgeAccumulator::new(1e-3).unwrap();
        merged.partial_fit(&r.slice_rows(0..100), &y.slice_rows(0..100)).unwrap();
        other.partial_fit(&r.slice_rows(100..300), &y.slice_rows(100..300)).unwrap();
        merged.merge(&other).unwrap();
        assert_eq!(merged.sample_count(), 300);
        assert!(k.max_abs_diff(&merged.k_matrix().unwrap()) / k.frobenius_norm() < 1e-12);
    }

    #[test]
    fn single_row_is_outer_product() {
        let r = Matrix::from_rows(&[[2.0, -3.0]]).unwrap();
        let y = Matrix::from_rows(&[[5.0]]).unwrap();
        let mut acc = RidgeAccumulator::new(0.0).unwrap();
        acc.partial_fit(&r, &y).unwrap();
        let k = acc.k_matrix().unwrap();
        assert_eq!(k, Matrix::from_rows(&[[4.0, -6.0, 2.0], [-6.0, 9.0, -3.0], [2.0, -3.0, 1.0]]).unwrap());
        assert_eq!(acc.p_matrix().unwrap(), Matrix::from_rows(&[[10.0, -15.0, 5.0]]).unwrap());
    }

    #[test]
    fn empty_update_is_noop() {
        let mut acc = RidgeAccumulator::new(1.0).unwrap();
        acc.partial_fit(&Matrix::zeros(0, 4), &Matrix::zeros(0, 1)).unwrap();
        assert_eq!(acc.shape(), None);
        assert!(matches!(acc.finalize(), Err(RcnError::Empty(_))));
        acc.partial_fit(&Matrix::zeros(2, 4), &Matrix::zeros(2, 1)).unwrap();
        let before = acc.clone();
        acc.partial_fit(&Matrix::zeros(0, 4), &Matrix::zeros(0, 1)).unwrap();
        assert_eq!(acc, before);
        assert!(acc.partial_fit(&Matrix::zeros(1, 3), &Matrix::zeros(1, 1)).is_err());
        assert!(acc.partial_fit(&Matrix::zeros(1, 4), &Matrix::zeros(1, 2)).is_err());
        assert!(acc.partial_fit(&Matrix::zeros(2, 4), &Matrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn zero_targets_give_zero_weights() {
        let mut rng = Rng::new(8);
        let mut acc = RidgeAccumulator::new(1e-4).unwrap();
        acc.partial_fit(&random(40, 6, &mut rng), &Matrix::zeros(40, 2)).unwrap();
        let w = acc.finalize().unwrap();
        assert!(w.weights().as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn epsilon_shrinks_weights() {
        let mut rng = Rng::new(9);
        let r = random(60, 10, &mut rng);
        let y = random(60, 2, &mut rng);
        let norms: Vec<f64> = [1e-6, 1e-2, 1e2]
            .iter()
            .map(|&e| {
                let mut acc = RidgeAccumulator::new(e).unwrap();
                acc.partial_fit(&r, &y).unwrap();
                acc.finalize().unwrap().weights().frobenius_norm()
            })
            .collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
    }

    #[test]
    fn exact_linear_map_is_reproduced() {
        let mut rng = Rng::new(10);
        let r = random(80, 6, &mut rng);
        let a = random(2, 7, &mut rng);
        let readout = Readout::from_weights(a.clone()).unwrap();
        let y = readout.predict(&r).unwrap();
        let mut acc = RidgeAccumulator::new(1e-12).unwrap();
        acc.partial_fit(&r, &y).unwrap();
        let fitted = acc.finalize().unwrap();
        let pred = fitted.predict(&r).unwrap();
        assert!(pred.max_abs_diff(&y) < 1e-8, "{}", pred.max_abs_diff(&y));
        assert!(fitted.weights().max_abs_diff(&a) < 1e-8);
    }

    #[test]
    fn singular_without_regularization() {
        // Duplicate columns make K singular.
        let mut rng = Rng::new(11);
        let base = random(30, 1, &mut rng);
        let r = Matrix::hstack(&[&base, &base]).unwrap();
        let mut acc = RidgeAccumulator::new(0.0).unwrap();
        acc.partial_fit(&r, &random(30, 1, &mut rng)).unwrap();
        let err = acc.finalize().unwrap_err();
        assert!(matches!(err, RcnError::Singular(_)));
        assert!(err.to_string().contains("alpha"));
        assert!(RidgeAccumulator::new(-1.0).is_err());
    }

    #[test]
    fn intercept_only_readout() {
        let w = Readout::from_weights(Matrix::from_rows(&[[0.0, 0.0, 2.5], [0.0, 0.0, -1.0]]).unwrap()).unwrap();
        let out = w.predict(&Matrix::filled(4, 2, 7.0)).unwrap();
        assert!(out.row_iter().all(|row| row == [2.5, -1.0]));
        assert!(w.predict(&Matrix::zeros(1, 3)).is_err());
    }
}

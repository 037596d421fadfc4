//! Dominant eigenvalue magnitude of sparse square matrices.
//!
//! Small matrices (`n ≤ 64`) are solved densely through a real Schur
//! decomposition. Larger ones use an Arnoldi process: the Krylov space of
//! repeated products `W·v` (the power sequence) is orthonormalized, and the
//! Ritz values of the projected Hessenberg matrix approximate the outer
//! eigenvalues. Complex conjugate dominant pairs are handled because the
//! Ritz values are computed in complex arithmetic. The process stops once
//! the residual of the dominant Ritz pair falls below `tolerance·|θ|`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::base::Rng;
use crate::blocks::SparseWeights;
use crate::error::{RcnError, Result};

/// Matrices up to this order are handled by the dense solver.
pub const DENSE_FALLBACK_MAX: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    /// Maximum Krylov dimension (number of matrix-vector products).
    pub max_iterations: usize,
    /// Relative residual tolerance for the dominant Ritz pair.
    pub tolerance: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
        }
    }
}

/// Largest absolute eigenvalue of the square matrix `w`.
pub fn spectral_radius(w: &SparseWeights) -> Result<f64> {
    spectral_radius_with(w, SpectralOptions::default())
}

pub fn spectral_radius_with(w: &SparseWeights, opts: SpectralOptions) -> Result<f64> {
    if !w.is_square() {
        return Err(RcnError::shape(
            "spectral radius",
            format!("matrix is {}x{}, not square", w.rows(), w.cols()),
        ));
    }
    let n = w.rows();
    if n == 0 || w.nnz() == 0 {
        return Ok(0.0);
    }
    if n <= DENSE_FALLBACK_MAX {
        return dense_spectral_radius(&w.to_dense().to_nalgebra());
    }
    arnoldi(w, opts)
}

/// Spectral radius through a full dense eigenvalue computation.
pub(crate) fn dense_spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let eig = dominant_eigenvalues(m).ok_or(RcnError::NoConvergence {
        iterations: 0,
        estimate: f64::NAN,
    })?;
    Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn dominant_eigenvalues(m: &DMatrix<f64>) -> Option<DVector<Complex<f64>>> {
    let n = m.nrows();
    m.clone()
        .try_schur(f64::EPSILON, 1000 * n.max(10))
        .map(|s| s.complex_eigenvalues())
}

fn checkpoints(limit: usize) -> impl Iterator<Item = usize> {
    let mut m = 10usize;
    std::iter::from_fn(move || {
        let current = m.min(limit);
        if current == 0 {
            return None;
        }
        m = ((m as f64) * 1.4).ceil() as usize;
        Some(current)
    })
}

fn arnoldi(w: &SparseWeights, opts: SpectralOptions) -> Result<f64> {
    let n = w.rows();
    let limit = opts.max_iterations.min(n).max(1);
    let scale = w.values().iter().map(|v| v.abs()).fold(0.0, f64::max);

    // Fixed pseudo-random start vector: deterministic, and almost surely not
    // orthogonal to any eigenvector.
    let mut rng = Rng::new(0x5eed_0f_a7_01d1);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.symmetric()).collect();
    normalize(&mut v0);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    // Column j of the Hessenberg matrix holds j + 2 entries.
    let mut hess: Vec<Vec<f64>> = Vec::new();
    let mut best = 0.0;
    let mut stops = checkpoints(limit).peekable();

    for j in 0..limit {
        let mut next = vec![0.0; n];
        w.mul_add(&basis[j], &mut next);
        let mut column = vec![0.0; j + 2];
        // Classical Gram-Schmidt, applied twice for orthogonality.
        for _ in 0..2 {
            for (i, b) in basis.iter().enumerate() {
                let c = dot(b, &next);
                column[i] += c;
                axpy(-c, b, &mut next);
            }
        }
        let beta = dot(&next, &next).sqrt();
        column[j + 1] = beta;
        hess.push(column);
        let m = j + 1;

        let breakdown = beta <= 1e-13 * scale.max(f64::MIN_POSITIVE);
        while stops.peek().is_some_and(|&s| s < m) {
            stops.next();
        }
        let at_checkpoint = stops.peek() == Some(&m);
        if breakdown || at_checkpoint || m == limit {
            let h = square_hessenberg(&hess, m);
            let ritz = dominant_eigenvalues(&h).ok_or(RcnError::NoConvergence {
                iterations: m,
                estimate: best,
            })?;
            let (theta, magnitude) = ritz
                .iter()
                .map(|z| (*z, z.norm()))
                .fold((Complex::new(0.0, 0.0), -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            best = magnitude;
            if breakdown || m == n {
                // Invariant subspace: Ritz values are exact eigenvalues.
                return Ok(magnitude);
            }
            let residual = beta * ritz_vector_tail(&h, theta);
            if residual <= opts.tolerance * magnitude.max(f64::MIN_POSITIVE) {
                return Ok(magnitude);
            }
        }
        if m == limit {
            break;
        }
        for x in next.iter_mut() {
            *x /= beta;
        }
        basis.push(next);
    }
    Err(RcnError::NoConvergence {
        iterations: limit,
        estimate: best,
    })
}

fn square_hessenberg(cols: &[Vec<f64>], m: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(m, m);
    for (j, col) in cols.iter().take(m).enumerate() {
        for (i, &v) in col.iter().enumerate().take(m) {
            h[(i, j)] = v;
        }
    }
    h
}

/// `|y_m| / ‖y‖` for the eigenvector `y` of `h` belonging to `theta`,
/// computed by two steps of complex inverse iteration.
fn ritz_vector_tail(h: &DMatrix<f64>, theta: Complex<f64>) -> f64 {
    let m = h.nrows();
    let shift = theta + Complex::new(1e-10 * theta.norm().max(1e-300), 0.0);
    let mut a: DMatrix<Complex<f64>> = h.map(|v| Complex::new(v, 0.0));
    for i in 0..m {
        a[(i, i)] -= shift;
    }
    let lu = a.lu();
    let mut y = DVector::from_element(m, Complex::new(1.0, 0.0));
    for _ in 0..2 {
        match lu.solve(&y) {
            Some(next) => {
                let norm = next.norm();
                if !norm.is_finite() || norm == 0.0 {
                    return f64::INFINITY;
                }
                y = next / Complex::new(norm, 0.0);
            }
            None => return f64::INFINITY,
        }
    }
    y[m - 1].norm()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

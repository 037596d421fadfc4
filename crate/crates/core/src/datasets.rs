//! Benchmark data: the Mackey-Glass series, the 8×8 digits in sequence
//! form, HAR volatility features, horizon shifting and the volatility fold
//! scheme.

use std::io::Read;
use std::path::Path;

use crate::base::csv_io::{read_csv, read_csv_from};
use crate::base::{Label, Matrix, Rng, SequenceDataset, SequenceTargets, Target};
use crate::error::{RcnError, Result};

/// Parameters of the delay differential equation
/// `dx/dt = a·x(t−τ) / (1 + x(t−τ)^p) − b·x(t)`.
///
/// The equation is integrated with classical Runge-Kutta at step `dt` and
/// sampled once per time unit. Delayed values at half steps come from cubic
/// Hermite interpolation of the stored trajectory and its derivative. The
/// history on `[−τ, 0]` is the constant `1.2 + δ` with a seeded offset
/// `|δ| ≤ 0.01`.
#[derive(Clone, Debug, PartialEq)]
pub struct MackeyGlassConfig {
    pub n_timesteps: usize,
    /// Delay in time units (one unit per sample).
    pub tau: usize,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    /// Integration step; `1/dt` must be a whole number.
    pub dt: f64,
    /// Leading samples dropped before the returned series starts.
    pub transient_discard: usize,
    /// Target offset: `y[n] = x[n + horizon]`.
    pub horizon: usize,
    pub seed: u64,
}

impl Default for MackeyGlassConfig {
    fn default() -> Self {
        Self {
            n_timesteps: 5000,
            tau: 17,
            a: 0.2,
            b: 0.1,
            p: 10.0,
            dt: 0.1,
            transient_discard: 1700,
            horizon: 1,
            seed: 42,
        }
    }
}

impl MackeyGlassConfig {
    fn steps_per_sample(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(RcnError::param("dt", "must lie in (0, 1]"));
        }
        let k = (1.0 / self.dt).round();
        if ((1.0 / self.dt) - k).abs() > 1e-9 {
            return Err(RcnError::param("dt", "1/dt must be a whole number"));
        }
        Ok(k as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_timesteps < 2 {
            return Err(RcnError::param("n_timesteps", "must be at least 2"));
        }
        if self.tau < 1 {
            return Err(RcnError::param("tau", "must be at least 1"));
        }
        if self.horizon < 1 {
            return Err(RcnError::param("horizon", "must be at least 1"));
        }
        self.steps_per_sample().map(|_| ())
    }
}

/// `len` consecutive samples after the transient.
pub fn mackey_glass_series(cfg: &MackeyGlassConfig, len: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let k = cfg.steps_per_sample()?;
    let h = cfg.dt;
    let d = cfg.tau * k;
    let total = (cfg.transient_discard + len) * k;
    let x0 = 1.2 + 0.01 * Rng::new(cfg.seed).symmetric();

    // x[j] and its derivative dx[j] at time (j − d)·h. The history is
    // constant, so its derivative is zero; dx[d] is the right derivative at
    // t = 0 where the solution leaves the history.
    let f = |xt: f64, xd: f64| cfg.a * xd / (1.0 + xd.powf(cfg.p)) - cfg.b * xt;
    let mut x = Vec::with_capacity(d + total + 1);
    let mut dx = Vec::with_capacity(d + total + 1);
    x.resize(d + 1, x0);
    dx.resize(d, 0.0);
    dx.push(f(x0, x0));
    for step in 0..total {
        let j = d + step;
        let lag = j - d;
        let (d0, d1) = (x[lag], x[lag + 1]);
        let s0 = dx[lag];
        let s1 = if lag + 1 == d { 0.0 } else { dx[lag + 1] };
        // Cubic Hermite value at the midpoint of the delayed step.
        let dm = 0.5 * (d0 + d1) + h / 8.0 * (s0 - s1);
        let xt = x[j];
        let k1 = f(xt, d0);
        let k2 = f(xt + 0.5 * h * k1, dm);
        let k3 = f(xt + 0.5 * h * k2, dm);
        let k4 = f(xt + h * k3, d1);
        let next = xt + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x.push(next);
        dx.push(f(next, d1));
    }
    let start = d + cfg.transient_discard * k;
    Ok((0..len).map(|i| x[start + i * k]).collect())
}

/// Series `X` and target `y[n] = X[n + horizon]`, both `n_timesteps × 1`.
pub fn mackey_glass(cfg: &MackeyGlassConfig) -> Result<(Matrix, Matrix)> {
    let series = mackey_glass_series(cfg, cfg.n_timesteps + cfg.horizon)?;
    let n = cfg.n_timesteps;
    Ok((
        Matrix::column_vector(&series[..n])?,
        Matrix::column_vector(&series[cfg.horizon..])?,
    ))
}

/// Number of items in the digits dataset.
pub const DIGITS_COUNT: usize = 1797;
const BUNDLED_DIGITS: &str = include_str!("../data/digits.csv");

/// 8×8 digit images with pixels mapped from 0..16 to −1..1.
#[derive(Clone, Debug, PartialEq)]
pub struct Digits {
    /// One image per row; pixel `(r, c)` sits in column `8r + c`.
    pub images: Matrix,
    pub labels: Vec<Label>,
}

impl Digits {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Image `i` as 8 time steps (image columns, left to right) of 8
    /// features (pixel rows, top to bottom).
    pub fn sequence(&self, i: usize) -> Matrix {
        let px = self.images.row(i);
        let mut data = Vec::with_capacity(64);
        for t in 0..8 {
            for f in 0..8 {
                data.push(px[f * 8 + t]);
            }
        }
        Matrix::from_raw(8, 8, data)
    }

    /// Sequence-to-label dataset over the items at `indices`.
    pub fn to_sequences(&self, indices: &[usize]) -> Result<SequenceDataset> {
        SequenceDataset::new(
            indices.iter().map(|&i| self.sequence(i)).collect(),
            SequenceTargets::PerSequence(Target::Labels(indices.iter().map(|&i| self.labels[i]).collect())),
        )
    }

    pub fn as_sequences(&self) -> Result<SequenceDataset> {
        self.to_sequences(&(0..self.len()).collect::<Vec<_>>())
    }
}

/// Reads the 65-column layout: 64 pixels valued 0–16 (row-major), then the
/// label.
pub fn load_digits_from<R: Read>(reader: R) -> Result<Digits> {
    let table = read_csv_from(reader)?;
    let offset = if table.header.is_some() { 2 } else { 1 };
    let data = table.data;
    if data.cols() != 65 {
        return Err(RcnError::Parse {
            line: offset,
            message: format!("expected 65 columns (64 pixels and a label), found {}", data.cols()),
        });
    }
    let mut images = Vec::with_capacity(data.rows() * 64);
    let mut labels = Vec::with_capacity(data.rows());
    for (i, row) in data.row_iter().enumerate() {
        let line = i + offset;
        for (j, &v) in row[..64].iter().enumerate() {
            if !(0.0..=16.0).contains(&v) {
                return Err(RcnError::Parse {
                    line,
                    message: format!("pixel {j} = {v} outside 0..16"),
                });
            }
            images.push(v / 8.0 - 1.0);
        }
        let label = row[64];
        if label.fract() != 0.0 || label < 0.0 {
            return Err(RcnError::Parse {
                line,
                message: format!("label {label} is not a non-negative integer"),
            });
        }
        labels.push(label as Label);
    }
    Ok(Digits {
        images: Matrix::new(labels.len(), 64, images)?,
        labels,
    })
}

pub fn load_digits(path: impl AsRef<Path>) -> Result<Digits> {
    load_digits_from(std::fs::File::open(path)?)
}

/// The digits fixture shipped with the library.
pub fn bundled_digits() -> Result<Digits> {
    load_digits_from(BUNDLED_DIGITS.as_bytes())
}

/// The bundled fixture as raw CSV text.
pub fn bundled_digits_csv() -> &'static str {
    BUNDLED_DIGITS
}

/// Moving-average windows of the HAR features.
pub const HAR_WINDOWS: [usize; 2] = [5, 22];

/// Expands a `T × 1` series to `[x, mean_5, mean_22]`. Windows at the start
/// of the series average the available history.
pub fn har_features(x: &Matrix) -> Result<Matrix> {
    if x.cols() != 1 {
        return Err(RcnError::width("har features", 1, x.cols()));
    }
    let v = x.as_slice();
    let mut out = Vec::with_capacity(v.len() * 3);
    for n in 0..v.len() {
        out.push(v[n]);
        for w in HAR_WINDOWS {
            let lo = (n + 1).saturating_sub(w);
            let window = &v[lo..=n];
            out.push(window.iter().sum::<f64>() / window.len() as f64);
        }
    }
    Matrix::new(v.len(), 3, out)
}

/// HAR features using only complete windows: the first 21 rows are dropped.
pub fn har_features_full(x: &Matrix) -> Result<Matrix> {
    let skip = HAR_WINDOWS[1] - 1;
    if x.rows() <= skip {
        return Err(RcnError::shape("har features", format!("need more than {skip} rows")));
    }
    Ok(har_features(x)?.slice_rows(skip..x.rows()))
}

/// Aligns features with a target `h` steps ahead: `X = x[0..T−h]`,
/// `y[n] = x[n + h, 0]`.
pub fn shift_target(x: &Matrix, h: usize) -> Result<(Matrix, Matrix)> {
    let t = x.rows();
    if h == 0 || t <= h {
        return Err(RcnError::shape("shift target", format!("horizon {h} needs more than {h} rows, got {t}")));
    }
    let y: Vec<f64> = (h..t).map(|n| x.get(n, 0)).collect();
    Ok((x.slice_rows(0..t - h), Matrix::column_vector(&y)?))
}

/// Stock series used by the volatility benchmark.
pub const VOLATILITY_SERIES: [&str; 3] = ["CAT", "EBAY", "MSFT"];
/// Forecast horizons of the volatility benchmark.
pub const VOLATILITY_HORIZONS: [usize; 3] = [1, 5, 22];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolatilityFold {
    pub train: &'static str,
    pub validation: &'static str,
    pub test: &'static str,
    pub horizon: usize,
}

/// Three folds rotating the series through the train, validation and test
/// roles.
pub fn volatility_folds(horizon: usize) -> [VolatilityFold; 3] {
    let [c, e, m] = VOLATILITY_SERIES;
    let fold = |train, validation, test| VolatilityFold {
        train,
        validation,
        test,
        horizon,
    };
    [fold(c, e, m), fold(e, m, c), fold(m, c, e)]
}

/// Reads a one-column series with an optional header.
pub fn load_series(path: impl AsRef<Path>) -> Result<Matrix> {
    let table = read_csv(path)?;
    if table.data.cols() != 1 {
        return Err(RcnError::width("series csv", 1, table.data.cols()));
    }
    Ok(table.data)
}

/// Loads `CAT.csv`, `EBAY.csv` and `MSFT.csv` from `dir`, in that order.
pub fn load_volatility_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, Matrix)>> {
    VOLATILITY_SERIES
        .iter()
        .map(|name| Ok((name.to_string(), load_series(dir.as_ref().join(format!("{name}.csv")))?)))
        .collect()
}

/// Stationary AR(1) series `x[n] = μ + φ·(x[n−1] − μ) + σ·ε[n]`, started
/// from `μ` after a 200-sample burn-in.
pub fn ar1_series(len: usize, mean: f64, phi: f64, sigma: f64, seed: u64) -> Result<Matrix> {
    if !(phi.abs() < 1.0) {
        return Err(RcnError::param("phi", "must satisfy |phi| < 1"));
    }
    let mut rng = Rng::new(seed);
    let mut v = mean;
    let mut out = Vec::with_capacity(len);
    for i in 0..len + 200 {
        v = mean + phi * (v - mean) + sigma * rng.normal();
        if i >= 200 {
            out.push(v);
        }
    }
    Matrix::column_vector(&out)
}

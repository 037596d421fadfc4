//! Acceptance checks AC1–AC10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rcnkit::base::{Activation, Dataset, Matrix, Prediction, Rng, Target};
use rcnkit::blocks::{spectral_radius, FanIn, NodeToNodeBlock, NodeToNodeConfig};
use rcnkit::datasets::{bundled_digits, load_volatility_dir, MackeyGlassConfig};
use rcnkit::estimators::{ElmEstimator, ElmParams, EsnEstimator, EsnParams, Estimator};
use rcnkit::metrics::{mse, sequence_metric, Metric};
use rcnkit::readout::RidgeAccumulator;
use rcnkit_cli::bench::{
    digits_params, digits_run, digits_split, mackey_glass_benchmark, mackey_glass_search, mean_r2_test,
    synthetic_volatility, volatility_benchmark, VolInput, VolModel,
};

type Check = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn noise(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.normal()).collect()).unwrap()
}

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

/// Incremental readout against a QR solve of the stacked system
/// `[R̃; √ε·I] W = [Y; 0]`.
fn ac1() -> Check {
    let start = Instant::now();
    let mut rng = Rng::new(1);
    let (t, d, o, eps) = (200, 50, 3, 1e-5);
    let r = noise(t, d, &mut rng);
    let y = noise(t, o, &mut rng);
    let mut acc = RidgeAccumulator::new(eps).map_err(err)?;
    for c in 0..4 {
        acc.partial_fit(&r.slice_rows(c * 50..(c + 1) * 50), &y.slice_rows(c * 50..(c + 1) * 50))
            .map_err(err)?;
    }
    let w = to_na(acc.finalize().map_err(err)?.weights());

    let mut a = DMatrix::zeros(t + d + 1, d + 1);
    let mut b = DMatrix::zeros(t + d + 1, o);
    for i in 0..t {
        for j in 0..d {
            a[(i, j)] = r.get(i, j);
        }
        a[(i, d)] = 1.0;
        for k in 0..o {
            b[(i, k)] = y.get(i, k);
        }
    }
    for j in 0..=d {
        a[(t + j, j)] = eps.sqrt();
    }
    let qr = a.qr();
    let rhs = qr.q().transpose() * b;
    let oracle = qr.r().solve_upper_triangular(&rhs).ok_or("oracle solve failed")?.transpose();
    let rel = (&w - &oracle).norm() / oracle.norm();
    let elapsed = start.elapsed();
    Ok((rel <= 1e-8 && within(elapsed, 1.0), format!("relative difference {rel:.2e}, {elapsed:.2?}")))
}

/// Rescaled reservoirs have the requested radius, cross-checked by a dense
/// eigensolve at N = 200.
fn ac2() -> Check {
    let start = Instant::now();
    let rhos = [0.5, 1.0, 1.2];
    let reservoir = |n: usize, i: usize| {
        NodeToNodeBlock::init(NodeToNodeConfig {
            hidden_layer_size: n,
            k_rec: FanIn::Count(10),
            spectral_radius: rhos[i % 3],
            seed: 1000 + i as u64,
            ..NodeToNodeConfig::default()
        })
    };
    let mut worst = 0.0f64;
    for i in 0..20 {
        let b = reservoir(500, i).map_err(err)?;
        let measured = spectral_radius(b.weights()).map_err(err)?;
        worst = worst.max((measured - rhos[i % 3]).abs() / rhos[i % 3]);
    }
    let mut worst_dense = 0.0f64;
    for i in 0..20 {
        let b = reservoir(200, i).map_err(err)?;
        let dense = to_na(&b.weights().to_dense());
        let eig = dense.complex_eigenvalues();
        let oracle = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst_dense = worst_dense.max((oracle - rhos[i % 3]).abs() / rhos[i % 3]);
    }
    let elapsed = start.elapsed();
    Ok((
        worst <= 1e-6 && worst_dense <= 1e-6 && within(elapsed, 10.0),
        format!("N=500 worst rel err {worst:.1e}; N=200 dense oracle worst {worst_dense:.1e}; {elapsed:.2?}"),
    ))
}

fn values(p: Prediction) -> Result<Matrix, String> {
    match p {
        Prediction::Instances(Target::Values(m)) => Ok(m),
        _ => Err("expected instance values".into()),
    }
}

fn ac3() -> Check {
    let mut rng = Rng::new(3);
    let x = noise(500, 3, &mut rng);
    let y = noise(500, 2, &mut rng);
    let data = Dataset::instances(x, Target::Values(y)).map_err(err)?;
    let mut esn = EsnEstimator::regressor(EsnParams {
        hidden_layer_size: 200,
        spectral_radius: 0.0,
        leakage: 1.0,
        input_activation: Activation::Identity,
        reservoir_activation: Activation::Tanh,
        ..EsnParams::default()
    })
    .map_err(err)?;
    let mut elm = ElmEstimator::regressor(ElmParams {
        hidden_layer_size: 200,
        input_activation: Activation::Tanh,
        ..ElmParams::default()
    })
    .map_err(err)?;
    esn.fit(&data).map_err(err)?;
    elm.fit(&data).map_err(err)?;
    let a = values(esn.predict(&data).map_err(err)?)?;
    let b = values(elm.predict(&data).map_err(err)?)?;
    let diff = a.max_abs_diff(&b);
    Ok((diff <= 1e-12, format!("max abs difference {diff:.1e}")))
}

fn ac4_ac5() -> (Check, Check) {
    let run = || -> Result<(Vec<(usize, f64)>, f64, usize, Duration), String> {
        let start = Instant::now();
        let digits = bundled_digits().map_err(err)?;
        let (train, test) = digits_split(&digits, 42).map_err(err)?;
        let mut uni = Vec::new();
        for n in [50, 200, 500] {
            uni.push((n, digits_run(&train, &test, digits_params(n, false)).map_err(err)?.test_accuracy));
        }
        let elapsed = start.elapsed();
        let bi = digits_run(&train, &test, digits_params(500, true)).map_err(err)?;
        Ok((uni, bi.test_accuracy, bi.state_width, elapsed))
    };
    match run() {
        Err(e) => (Err(e.clone()), Err(e)),
        Ok((uni, bi_acc, bi_width, elapsed)) => {
            let acc = |n: usize| uni.iter().find(|(m, _)| *m == n).map(|p| p.1).unwrap();
            let ok4 = acc(500) >= 0.95 && acc(200) >= 0.93 && acc(200) > acc(50) && within(elapsed, 120.0);
            let ok5 = bi_width == 1000 && (bi_acc - acc(500)).abs() <= 0.03;
            (
                Ok((
                    ok4,
                    format!("accuracy N=50 {:.4}, N=200 {:.4}, N=500 {:.4}; {elapsed:.2?}", acc(50), acc(200), acc(500)),
                )),
                Ok((ok5, format!("state width {bi_width}, bidirectional {bi_acc:.4} vs unidirectional {:.4}", acc(500)))),
            )
        }
    }
}

fn ac6() -> Check {
    let r = mackey_glass_benchmark(&MackeyGlassConfig::default(), EsnParams::default()).map_err(err)?;
    Ok((
        r.ratio() <= 0.1,
        format!(
            "ESN test MSE {:.3e} vs OLS {:.3e} (ratio {:.2e}); zero-state test start {:.3e}",
            r.esn_test_mse,
            r.ols_test_mse,
            r.ratio(),
            r.esn_test_mse_cold
        ),
    ))
}

fn ac7() -> Check {
    let start = Instant::now();
    let cfg = MackeyGlassConfig::default();
    let a = mackey_glass_search(&cfg, 50, 200, 7).map_err(err)?;
    let b = mackey_glass_search(&cfg, 50, 200, 7).map_err(err)?;
    let elapsed = start.elapsed();
    let bests = a.step_bests();
    let monotone = bests.windows(2).all(|w| w[1] >= w[0]);
    let identical = a.text_report() == b.text_report() && a.csv_report() == b.csv_report();
    Ok((
        monotone && identical && bests.len() == 4 && within(elapsed, 300.0),
        format!(
            "step bests {:?}, reruns identical: {identical}; {elapsed:.2?} for two runs",
            bests.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    ))
}

fn ac8() -> Check {
    if let Ok(dir) = std::env::var("RCNKIT_VOLATILITY_DIR") {
        let series = load_volatility_dir(&dir).map_err(err)?;
        let rows = volatility_benchmark(&series, &[1], 42).map_err(err)?;
        let har = mean_r2_test(&rows, 1, VolModel::Linear, VolInput::Har);
        let esn = mean_r2_test(&rows, 1, VolModel::Esn, VolInput::Raw);
        return Ok((
            (har - 0.636).abs() <= 0.05 && (esn - 0.644).abs() <= 0.05,
            format!("data {dir}: HAR linear R2 {har:.4} (target 0.636), ESN R2 {esn:.4} (target 0.644)"),
        ));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..5 {
        let series = synthetic_volatility(seed, 2745).map_err(err)?;
        let rows = volatility_benchmark(&series, &[1], 42).map_err(err)?;
        let har = mean_r2_test(&rows, 1, VolModel::Esn, VolInput::Har);
        let raw = mean_r2_test(&rows, 1, VolModel::Esn, VolInput::Raw);
        ok &= har > raw - 0.05;
        parts.push(format!("{har:.3}/{raw:.3}"));
    }
    Ok((ok, format!("no RCNKIT_VOLATILITY_DIR; synthetic AR(1) HAR/raw ESN R2 per seed: {}", parts.join(", "))))
}

fn ac9() -> Check {
    let mut rng = Rng::new(9);
    let n = 40;
    let run = |t: usize, rng: &mut Rng| -> Result<usize, String> {
        let mut acc = RidgeAccumulator::new(1e-5).map_err(err)?;
        for _ in 0..10 {
            acc.partial_fit(&noise(t, n, rng), &noise(t, 2, rng)).map_err(err)?;
        }
        Ok(acc.storage_len())
    };
    let small = run(100, &mut rng)?;
    let large = run(1000, &mut rng)?;
    Ok((small == large, format!("storage {small} values after 1000 steps, {large} after 10000")))
}

fn ac10() -> Check {
    let mut rng = Rng::new(10);
    for trial in 0..200 {
        let len = 2 + rng.below(300);
        let y = noise(len, 1, &mut rng);
        let p = noise(len, 1, &mut rng);
        let flat = mse(&y, &p).map_err(err)?;
        let mut cuts: Vec<usize> = (0..rng.below(len)).map(|_| 1 + rng.below(len - 1)).collect();
        cuts.extend([0, len]);
        cuts.sort_unstable();
        cuts.dedup();
        let (mut ty, mut tp) = (Vec::new(), Vec::new());
        for w in cuts.windows(2) {
            ty.push(Target::Values(y.slice_rows(w[0]..w[1])));
            tp.push(Target::Values(p.slice_rows(w[0]..w[1])));
        }
        let pooled = sequence_metric(Metric::Mse, &ty, &tp).map_err(err)?.value;
        if pooled != flat {
            return Ok((false, format!("trial {trial}: pooled {pooled} vs flat {flat}")));
        }
    }
    Ok((true, "200 random partitions, pooled MSE equals flat MSE exactly".into()))
}

fn main() {
    let (r4, r5) = ac4_ac5();
    let results = [
        ("AC1", "incremental readout equals batch solve", ac1()),
        ("AC2", "spectral radius calibration", ac2()),
        ("AC3", "ESN without recurrence equals ELM", ac3()),
        ("AC4", "digits accuracy", r4),
        ("AC5", "bidirectional digits", r5),
        ("AC6", "Mackey-Glass skill", ac6()),
        ("AC7", "sequential search", ac7()),
        ("AC8", "volatility", ac8()),
        ("AC9", "constant-memory accumulator", ac9()),
        ("AC10", "metric pooling", ac10()),
    ];
    let mut failed = 0;
    for (id, name, r) in results {
        let (ok, detail) = match r {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} {id} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

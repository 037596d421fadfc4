use rcnkit::base::{Activation, Dataset, Matrix, Prediction, Rng, SequenceDataset, SequenceTargets, Target};
use rcnkit::datasets::{bundled_digits, mackey_glass, MackeyGlassConfig};
use rcnkit::estimators::{ElmEstimator, ElmParams, EsnEstimator, EsnParams, Estimator, MinMaxScaled, SequenceMode};
use rcnkit::metrics::mse;
use rcnkit::RcnError;

fn noise(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = Rng::new(seed);
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.normal()).collect()).unwrap()
}

fn values(p: Prediction) -> Matrix {
    match p {
        Prediction::Instances(Target::Values(m)) => m,
        other => panic!("expected instance values, got {other:?}"),
    }
}

fn small_esn(n: usize) -> EsnParams {
    EsnParams {
        hidden_layer_size: n,
        spectral_radius: 0.9,
        leakage: 0.7,
        ..EsnParams::default()
    }
}

fn random_sequences(count: usize, width: usize, seed: u64) -> SequenceDataset {
    let mut rng = Rng::new(seed);
    let mut seqs = Vec::new();
    let mut targets = Vec::new();
    for i in 0..count {
        let t = 3 + rng.below(9);
        let x = noise(t, width, seed * 1000 + i as u64);
        // Target: running sum of the first feature.
        let mut acc = 0.0;
        let y: Vec<f64> = x.row_iter().map(|r| {
            acc += r[0];
            acc
        }).collect();
        seqs.push(x);
        targets.push(Target::Values(Matrix::column_vector(&y).unwrap()));
    }
    SequenceDataset::new(seqs, SequenceTargets::PerStep(targets)).unwrap()
}

#[test]
fn esn_without_recurrence_matches_elm() {
    let x = noise(500, 3, 1);
    let y = Matrix::column_vector(&x.row_iter().map(|r| r[0].sin() + r[1] * r[2]).collect::<Vec<_>>()).unwrap();
    let data = Dataset::instances(x, Target::Values(y)).unwrap();

    let mut esn = EsnEstimator::regressor(EsnParams {
        hidden_layer_size: 60,
        spectral_radius: 0.0,
        leakage: 1.0,
        input_activation: Activation::Identity,
        reservoir_activation: Activation::Tanh,
        ..EsnParams::default()
    })
    .unwrap();
    let mut elm = ElmEstimator::regressor(ElmParams {
        hidden_layer_size: 60,
        input_activation: Activation::Tanh,
        ..ElmParams::default()
    })
    .unwrap();
    esn.fit(&data).unwrap();
    elm.fit(&data).unwrap();
    let a = values(esn.predict(&data).unwrap());
    let b = values(elm.predict(&data).unwrap());
    assert!(a.max_abs_diff(&b) < 1e-12, "{}", a.max_abs_diff(&b));
}

#[test]
fn separated_blobs_are_classified_perfectly() {
    let mut rng = Rng::new(7);
    let centers = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..300 {
        let c = centers[i % 3];
        rows.push([c[0] + 0.5 * rng.normal(), c[1] + 0.5 * rng.normal()]);
        labels.push((i % 3) as i64 * 10 - 4);
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let data = Dataset::instances(x, Target::Labels(labels.clone())).unwrap();
    let mut elm = ElmEstimator::classifier(ElmParams {
        hidden_layer_size: 50,
        input_scaling: 0.3,
        ..ElmParams::default()
    })
    .unwrap();
    elm.fit(&data).unwrap();
    match elm.predict(&data).unwrap() {
        Prediction::Instances(Target::Labels(pred)) => assert_eq!(pred, labels),
        other => panic!("{other:?}"),
    }
    let proba = elm.model().predict_proba(data_x(&data)).unwrap();
    for r in proba.row_iter() {
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn data_x(d: &Dataset) -> &Matrix {
    match d {
        Dataset::Instances { x, .. } => x,
        _ => unreachable!(),
    }
}

#[test]
fn sequence_order_does_not_change_the_fit() {
    let train = random_sequences(75, 2, 3);
    let mut perm: Vec<usize> = (0..train.len()).collect();
    Rng::new(11).shuffle(&mut perm);
    let shuffled = train.subset(&perm);
    let test = Dataset::Sequences(random_sequences(6, 2, 4));

    let mut a = EsnEstimator::regressor(small_esn(40)).unwrap();
    let mut b = EsnEstimator::regressor(small_esn(40)).unwrap();
    a.fit(&Dataset::Sequences(train)).unwrap();
    b.fit(&Dataset::Sequences(shuffled)).unwrap();
    let (pa, pb) = match (a.predict(&test).unwrap(), b.predict(&test).unwrap()) {
        (Prediction::PerStep(x), Prediction::PerStep(y)) => (x, y),
        other => panic!("{other:?}"),
    };
    for (x, y) in pa.iter().zip(&pb) {
        match (x, y) {
            (Target::Values(x), Target::Values(y)) => assert!(x.max_abs_diff(y) < 1e-10),
            _ => panic!("expected values"),
        }
    }
}

#[test]
fn state_resets_between_sequences() {
    let train = random_sequences(20, 2, 5);
    let mut esn = EsnEstimator::regressor(small_esn(30)).unwrap();
    esn.fit(&Dataset::Sequences(train.clone())).unwrap();
    let together = match esn.predict(&Dataset::Sequences(train.clone())).unwrap() {
        Prediction::PerStep(p) => p,
        other => panic!("{other:?}"),
    };
    for i in [0, 7, 19] {
        let alone = match esn.predict(&Dataset::Sequences(train.subset(&[i]))).unwrap() {
            Prediction::PerStep(mut p) => p.remove(0),
            other => panic!("{other:?}"),
        };
        assert_eq!(alone, together[i]);
    }

    // Instance mode runs the concatenation continuously, so later sequences
    // see carried-over state.
    let mut cont = EsnEstimator::regressor(EsnParams {
        sequence_mode: SequenceMode::Instance,
        ..small_esn(30)
    })
    .unwrap();
    cont.fit(&Dataset::Sequences(train.clone())).unwrap();
    let states = esn.model().transform(&train.sequences()[1]).unwrap();
    let joined = Matrix::vstack(&[&train.sequences()[0], &train.sequences()[1]]).unwrap();
    let carried = cont.model().transform(&joined).unwrap();
    let t0 = train.sequences()[0].rows();
    assert!(carried.slice_rows(t0..t0 + 1).max_abs_diff(&states.slice_rows(0..1)) > 1e-6);
}

#[test]
fn refits_and_predictions_are_deterministic() {
    let data = Dataset::Sequences(random_sequences(40, 3, 8));
    let fit = || {
        let mut e = EsnEstimator::regressor(small_esn(50)).unwrap();
        e.fit(&data).unwrap();
        e
    };
    let (a, b) = (fit(), fit());
    assert_eq!(a.model().readout().unwrap(), b.model().readout().unwrap());
    assert_eq!(a.predict(&data).unwrap(), b.predict(&data).unwrap());
    assert_eq!(a.predict(&data).unwrap(), a.predict(&data).unwrap());
}

#[test]
fn predicting_before_fit_fails() {
    let esn = EsnEstimator::regressor(small_esn(10)).unwrap();
    let data = Dataset::Sequences(random_sequences(2, 2, 1));
    assert!(matches!(esn.predict(&data), Err(RcnError::NotFitted)));
    let elm = ElmEstimator::regressor(ElmParams::default()).unwrap();
    let d = Dataset::instances(noise(4, 2, 0), Target::Values(noise(4, 1, 1))).unwrap();
    assert!(matches!(elm.predict(&d), Err(RcnError::NotFitted)));
}

#[test]
fn width_mismatch_at_predict() {
    let mut esn = EsnEstimator::regressor(small_esn(10)).unwrap();
    esn.fit(&Dataset::Sequences(random_sequences(3, 2, 1))).unwrap();
    let err = esn.predict(&Dataset::Sequences(random_sequences(3, 3, 1))).unwrap_err();
    assert!(matches!(err, RcnError::WidthMismatch { expected: 2, found: 3, .. }), "{err}");
}

#[test]
fn mackey_glass_training_error_beats_variance() {
    let cfg = MackeyGlassConfig {
        n_timesteps: 1500,
        transient_discard: 200,
        ..MackeyGlassConfig::default()
    };
    let (x, y) = mackey_glass(&cfg).unwrap();
    let data = Dataset::instances(x, Target::Values(y.clone())).unwrap();
    let mut esn = EsnEstimator::regressor(EsnParams {
        hidden_layer_size: 100,
        input_scaling: 0.5,
        spectral_radius: 0.9,
        ..EsnParams::default()
    })
    .unwrap();
    esn.fit(&data).unwrap();
    let pred = values(esn.predict(&data).unwrap());
    let err = mse(&y, &pred).unwrap();
    let mean = y.as_slice().iter().sum::<f64>() / y.rows() as f64;
    let var = y.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.rows() as f64;
    assert!(err < 1e-2 * var, "mse {err} variance {var}");
}

#[test]
fn digit_sequences_map_to_known_labels() {
    let digits = bundled_digits().unwrap();
    let idx: Vec<usize> = (0..200).collect();
    let train = Dataset::Sequences(digits.to_sequences(&idx).unwrap());
    let mut esn = EsnEstimator::classifier(EsnParams {
        hidden_layer_size: 50,
        input_scaling: 0.1,
        spectral_radius: 1.2,
        leakage: 0.1,
        ..EsnParams::default()
    })
    .unwrap();
    esn.fit(&train).unwrap();
    let test = Dataset::Sequences(digits.to_sequences(&[500, 501, 502]).unwrap());
    match esn.predict(&test).unwrap() {
        Prediction::PerSequence(Target::Labels(l)) => {
            assert_eq!(l.len(), 3);
            assert!(l.iter().all(|v| (0..10).contains(v)));
        }
        other => panic!("{other:?}"),
    }
    let proba = esn.model().predict_sequence_proba(&digits.sequence(500)).unwrap();
    assert_eq!(proba.len(), 10);
    assert!((proba.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn scaler_is_learned_from_training_data_only() {
    let x = noise(200, 2, 21);
    let y = x.select_columns(&[0]).scale(3.0);
    let train = Dataset::instances(x.clone(), Target::Values(y)).unwrap();
    let mut est = MinMaxScaled::new(ElmEstimator::regressor(ElmParams {
        hidden_layer_size: 40,
        ..ElmParams::default()
    }).unwrap(), true);
    est.fit(&train).unwrap();
    let before = est.x_scaler().unwrap().clone();
    let lo: Vec<f64> = (0..2).map(|j| x.column(j).into_iter().fold(f64::INFINITY, f64::min)).collect();
    assert_eq!(before.min(), lo.as_slice());

    let far = noise(10, 2, 22).scale(100.0);
    let test = Dataset::instances(far.clone(), Target::Values(far.select_columns(&[0]))).unwrap();
    est.predict(&test).unwrap();
    assert_eq!(est.x_scaler().unwrap(), &before);

    // Predictions come back in the original target units.
    let p = values(est.predict(&train).unwrap());
    let truth = x.select_columns(&[0]).scale(3.0);
    assert!(mse(&truth, &p).unwrap() < 0.05 * 9.0, "{}", mse(&truth, &p).unwrap());
}

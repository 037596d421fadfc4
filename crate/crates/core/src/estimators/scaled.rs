use crate::base::{Dataset, Matrix, MinMaxScaler, Prediction, SequenceDataset, SequenceTargets, Target};
use crate::error::Result;
use crate::estimators::Estimator;

/// Wraps an estimator with min-max scaling of inputs and real-valued
/// targets. Scaler constants come from the training data passed to `fit`
/// only; predictions are mapped back to the original target scale.
#[derive(Clone, Debug)]
pub struct MinMaxScaled<E> {
    inner: E,
    scale_targets: bool,
    x_scaler: Option<MinMaxScaler>,
    y_scaler: Option<MinMaxScaler>,
}

impl<E: Estimator> MinMaxScaled<E> {
    pub fn new(inner: E, scale_targets: bool) -> Self {
        Self {
            inner,
            scale_targets,
            x_scaler: None,
            y_scaler: None,
        }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn x_scaler(&self) -> Option<&MinMaxScaler> {
        self.x_scaler.as_ref()
    }

    pub fn y_scaler(&self) -> Option<&MinMaxScaler> {
        self.y_scaler.as_ref()
    }

    /// Reassembles a fitted wrapper.
    pub fn from_parts(inner: E, x_scaler: Option<MinMaxScaler>, y_scaler: Option<MinMaxScaler>) -> Self {
        Self {
            inner,
            scale_targets: y_scaler.is_some(),
            x_scaler,
            y_scaler,
        }
    }
}

fn all_inputs(data: &Dataset) -> Result<Matrix> {
    match data {
        Dataset::Instances { x, .. } => Ok(x.clone()),
        Dataset::Sequences(s) => Matrix::vstack(&s.sequences().iter().collect::<Vec<_>>()),
    }
}

fn all_values(data: &Dataset) -> Result<Option<Matrix>> {
    match data {
        Dataset::Instances { y: Target::Values(m), .. } => Ok(Some(m.clone())),
        Dataset::Sequences(s) => match s.targets() {
            SequenceTargets::PerSequence(Target::Values(m)) => Ok(Some(m.clone())),
            SequenceTargets::PerStep(per) => {
                let mut mats = Vec::with_capacity(per.len());
                for t in per {
                    match t {
                        Target::Values(m) => mats.push(m),
                        Target::Labels(_) => return Ok(None),
                    }
                }
                Matrix::vstack(&mats).map(Some)
            }
            _ => Ok(None),
        },
        _ => Ok(None),
    }
}

fn map_target(t: &Target, s: Option<&MinMaxScaler>, inverse: bool) -> Result<Target> {
    match (t, s) {
        (Target::Values(m), Some(s)) => Ok(Target::Values(if inverse {
            s.inverse_transform(m)?
        } else {
            s.transform(m)?
        })),
        _ => Ok(t.clone()),
    }
}

fn scale_dataset(data: &Dataset, xs: Option<&MinMaxScaler>, ys: Option<&MinMaxScaler>) -> Result<Dataset> {
    let tx = |m: &Matrix| -> Result<Matrix> {
        match xs {
            Some(s) => s.transform(m),
            None => Ok(m.clone()),
        }
    };
    match data {
        Dataset::Instances { x, y } => Dataset::instances(tx(x)?, map_target(y, ys, false)?),
        Dataset::Sequences(s) => {
            let seqs = s.sequences().iter().map(tx).collect::<Result<Vec<_>>>()?;
            let targets = match s.targets() {
                SequenceTargets::PerStep(per) => SequenceTargets::PerStep(
                    per.iter().map(|t| map_target(t, ys, false)).collect::<Result<_>>()?,
                ),
                SequenceTargets::PerSequence(t) => SequenceTargets::PerSequence(map_target(t, ys, false)?),
            };
            Ok(Dataset::Sequences(SequenceDataset::new(seqs, targets)?))
        }
    }
}

impl<E: Estimator> Estimator for MinMaxScaled<E> {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let xs = MinMaxScaler::fit(&all_inputs(data)?)?;
        let ys = if self.scale_targets {
            all_values(data)?.map(|m| MinMaxScaler::fit(&m)).transpose()?
        } else {
            None
        };
        let scaled = scale_dataset(data, Some(&xs), ys.as_ref())?;
        self.inner.fit(&scaled)?;
        self.x_scaler = Some(xs);
        self.y_scaler = ys;
        Ok(())
    }

    fn predict(&self, data: &Dataset) -> Result<Prediction> {
        let scaled = scale_dataset(data, self.x_scaler.as_ref(), None)?;
        let ys = self.y_scaler.as_ref();
        Ok(match self.inner.predict(&scaled)? {
            Prediction::Instances(t) => Prediction::Instances(map_target(&t, ys, true)?),
            Prediction::PerSequence(t) => Prediction::PerSequence(map_target(&t, ys, true)?),
            Prediction::PerStep(per) => {
                Prediction::PerStep(per.iter().map(|t| map_target(t, ys, true)).collect::<Result<_>>()?)
            }
        })
    }
}

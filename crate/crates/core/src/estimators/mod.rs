//! ELM and ESN estimators.
//!
//! An estimator owns an unfitted graph description. `fit` builds the graph
//! for the data width, runs the training data through it and trains the
//! ridge readout on the resulting states:
//!
//! * ELM: input projection, then readout.
//! * ESN: input projection, recurrent reservoir, then readout.
//!
//! Sequence data resets the reservoir state to zero at the start of every
//! sequence. For sequence-to-label data the label of a sequence is used as
//! the target of each of its time steps, and predictions aggregate the
//! per-step outputs through a [`Projection`].

mod encoding;
mod model;
mod params;
mod scaled;

pub use encoding::{project, project_values, softmax, LabelEncoding, Projection};
pub use model::{ElmEstimator, EsnEstimator, ReservoirModel};
pub use params::{ElmParams, EsnParams, ParamValue, Params};
pub use scaled::MinMaxScaled;

use std::fmt;
use std::str::FromStr;

use crate::base::{Dataset, Prediction};
use crate::error::{RcnError, Result};

/// Common interface used by cross-validation and search.
pub trait Estimator: Send + Sync {
    fn fit(&mut self, data: &Dataset) -> Result<()>;

    /// Predicts for the inputs of `data`; its targets are ignored.
    fn predict(&self, data: &Dataset) -> Result<Prediction>;
}

impl<E: Estimator + ?Sized> Estimator for Box<E> {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        (**self).fit(data)
    }

    fn predict(&self, data: &Dataset) -> Result<Prediction> {
        (**self).predict(data)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Regression,
    Classification,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = RcnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(TaskKind::Regression),
            "classification" => Ok(TaskKind::Classification),
            other => Err(RcnError::param("task", format!("unknown task `{other}`"))),
        }
    }
}

/// How sequence structure is treated during fitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SequenceMode {
    /// Follow the dataset container: sequences for sequence data.
    Auto,
    /// Treat the data as independent sequences (an instance matrix is one
    /// sequence).
    Sequence,
    /// Treat all rows as one continuous series; sequence data is
    /// concatenated without state resets.
    Instance,
}

impl SequenceMode {
    pub fn name(self) -> &'static str {
        match self {
            SequenceMode::Auto => "auto",
            SequenceMode::Sequence => "sequence",
            SequenceMode::Instance => "instance",
        }
    }
}

impl fmt::Display for SequenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SequenceMode {
    type Err = RcnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SequenceMode::Auto),
            "sequence" => Ok(SequenceMode::Sequence),
            "instance" => Ok(SequenceMode::Instance),
            other => Err(RcnError::param("sequence_mode", format!("unknown mode `{other}`"))),
        }
    }
}

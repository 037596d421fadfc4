use crate::base::Matrix;
use crate::error::{RcnError, Result};

/// Class label.
pub type Label = i64;

/// Targets for a run of rows: real-valued outputs or class labels.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// One row of outputs per item.
    Values(Matrix),
    Labels(Vec<Label>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Values(m) => m.rows(),
            Target::Labels(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_labels(&self) -> bool {
        matches!(self, Target::Labels(_))
    }

    pub fn subset(&self, indices: &[usize]) -> Target {
        match self {
            Target::Values(m) => Target::Values(m.select_rows(indices)),
            Target::Labels(l) => Target::Labels(indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Concatenates targets of the same kind end to end.
    pub fn concat(parts: &[&Target]) -> Result<Target> {
        let Some(first) = parts.first() else {
            return Err(RcnError::Empty("target concatenation".into()));
        };
        match first {
            Target::Values(_) => {
                let mats = parts
                    .iter()
                    .map(|t| match t {
                        Target::Values(m) => Ok(m),
                        Target::Labels(_) => Err(mixed()),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Target::Values(Matrix::vstack(&mats)?))
            }
            Target::Labels(_) => {
                let mut out = Vec::new();
                for t in parts {
                    match t {
                        Target::Labels(l) => out.extend_from_slice(l),
                        Target::Values(_) => return Err(mixed()),
                    }
                }
                Ok(Target::Labels(out))
            }
        }
    }
}

fn mixed() -> RcnError {
    RcnError::shape("targets", "mixed label and value targets")
}

/// Targets of a sequence dataset.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceTargets {
    /// Sequence-to-sequence: one target row per time step of each sequence.
    PerStep(Vec<Target>),
    /// Sequence-to-label: one target per sequence.
    PerSequence(Target),
}

/// Variable-length sequences sharing one feature width.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceDataset {
    sequences: Vec<Matrix>,
    targets: SequenceTargets,
}

impl SequenceDataset {
    pub fn new(sequences: Vec<Matrix>, targets: SequenceTargets) -> Result<Self> {
        let Some(first) = sequences.first() else {
            return Err(RcnError::Empty("sequence dataset".into()));
        };
        let width = first.cols();
        for (i, s) in sequences.iter().enumerate() {
            if s.cols() != width {
                return Err(RcnError::width(format!("sequence {i}"), width, s.cols()));
            }
            if s.rows() == 0 {
                return Err(RcnError::Empty(format!("sequence {i}")));
            }
        }
        match &targets {
            SequenceTargets::PerStep(per) => {
                if per.len() != sequences.len() {
                    return Err(count_mismatch(sequences.len(), per.len()));
                }
                let kind = per[0].is_labels();
                for (i, (s, t)) in sequences.iter().zip(per).enumerate() {
                    if t.len() != s.rows() {
                        return Err(RcnError::shape(
                            format!("sequence {i}"),
                            format!("{} steps but {} targets", s.rows(), t.len()),
                        ));
                    }
                    if t.is_labels() != kind {
                        return Err(mixed());
                    }
                    if let (Target::Values(a), Target::Values(b)) = (&per[0], t) {
                        if a.cols() != b.cols() {
                            return Err(RcnError::width(format!("targets of sequence {i}"), a.cols(), b.cols()));
                        }
                    }
                }
            }
            SequenceTargets::PerSequence(t) => {
                if t.len() != sequences.len() {
                    return Err(count_mismatch(sequences.len(), t.len()));
                }
            }
        }
        Ok(Self { sequences, targets })
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn width(&self) -> usize {
        self.sequences[0].cols()
    }

    pub fn sequences(&self) -> &[Matrix] {
        &self.sequences
    }

    pub fn targets(&self) -> &SequenceTargets {
        &self.targets
    }

    /// Total number of time steps.
    pub fn total_steps(&self) -> usize {
        self.sequences.iter().map(Matrix::rows).sum()
    }

    pub fn subset(&self, indices: &[usize]) -> SequenceDataset {
        let sequences = indices.iter().map(|&i| self.sequences[i].clone()).collect();
        let targets = match &self.targets {
            SequenceTargets::PerStep(per) => SequenceTargets::PerStep(indices.iter().map(|&i| per[i].clone()).collect()),
            SequenceTargets::PerSequence(t) => SequenceTargets::PerSequence(t.subset(indices)),
        };
        SequenceDataset { sequences, targets }
    }
}

fn count_mismatch(sequences: usize, targets: usize) -> RcnError {
    RcnError::shape("sequence dataset", format!("{sequences} sequences but {targets} targets"))
}

/// Training or evaluation data in instance or sequence form.
#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    /// One time series (or independent instances); rows are time steps.
    Instances { x: Matrix, y: Target },
    Sequences(SequenceDataset),
}

impl Dataset {
    pub fn instances(x: Matrix, y: Target) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(RcnError::shape("dataset", format!("{} rows but {} targets", x.rows(), y.len())));
        }
        Ok(Dataset::Instances { x, y })
    }

    /// Number of splittable items: rows or sequences.
    pub fn len(&self) -> usize {
        match self {
            Dataset::Instances { x, .. } => x.rows(),
            Dataset::Sequences(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        match self {
            Dataset::Instances { x, .. } => x.cols(),
            Dataset::Sequences(s) => s.width(),
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        match self {
            Dataset::Instances { x, y } => Dataset::Instances {
                x: x.select_rows(indices),
                y: y.subset(indices),
            },
            Dataset::Sequences(s) => Dataset::Sequences(s.subset(indices)),
        }
    }
}

/// Estimator output, shaped like the data it was computed for.
#[derive(Clone, Debug, PartialEq)]
pub enum Prediction {
    /// One output per input row.
    Instances(Target),
    /// One output per time step of each sequence.
    PerStep(Vec<Target>),
    /// One output per sequence.
    PerSequence(Target),
}

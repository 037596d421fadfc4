use rayon::prelude::*;

use crate::base::{Dataset, Label, Matrix, Prediction, SequenceDataset, SequenceTargets, Target};
use crate::blocks::{BlockGraph, GraphSpec};
use crate::error::{RcnError, Result};
use crate::estimators::encoding::{project, project_values, softmax, LabelEncoding, Projection};
use crate::estimators::params::{ElmParams, EsnParams, Params};
use crate::estimators::{Estimator, SequenceMode, TaskKind};
use crate::readout::{Readout, RidgeAccumulator};

/// Sequences per accumulator during parallel fitting. Fixed so that the
/// merge order, and therefore the result, does not depend on thread count.
const SEQUENCE_CHUNK: usize = 32;

#[derive(Clone, Debug, PartialEq)]
struct Fitted {
    graph: BlockGraph,
    readout: Readout,
    encoding: Option<LabelEncoding>,
    per_sequence: bool,
}

/// Any block graph followed by a ridge readout.
#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirModel {
    spec: GraphSpec,
    alpha: f64,
    task: TaskKind,
    projection: Projection,
    sequence_mode: SequenceMode,
    fitted: Option<Fitted>,
}

impl ReservoirModel {
    pub fn new(spec: GraphSpec, alpha: f64, task: TaskKind) -> Result<Self> {
        RidgeAccumulator::new(alpha)?;
        Ok(Self {
            spec,
            alpha,
            task,
            projection: Projection::WinnerTakesAll,
            sequence_mode: SequenceMode::Auto,
            fitted: None,
        })
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    pub fn with_sequence_mode(mut self, mode: SequenceMode) -> Self {
        self.sequence_mode = mode;
        self
    }

    /// Rebuilds a fitted model from stored parts.
    #[allow(clippy::too_many_arguments)]
    pub fn from_fitted(
        graph: BlockGraph,
        readout: Readout,
        encoding: Option<LabelEncoding>,
        per_sequence: bool,
        task: TaskKind,
        projection: Projection,
        sequence_mode: SequenceMode,
        alpha: f64,
    ) -> Result<Self> {
        graph.validate()?;
        if readout.n_features() != graph.output_width() {
            return Err(RcnError::width("readout", graph.output_width(), readout.n_features()));
        }
        match (&encoding, task) {
            (Some(e), TaskKind::Classification) if e.width() == readout.n_outputs() => {}
            (None, TaskKind::Regression) => {}
            _ => return Err(RcnError::shape("model", "label encoding does not match the readout")),
        }
        let mut model = Self::new(fixed_spec(&graph), alpha, task)?;
        model.projection = projection;
        model.sequence_mode = sequence_mode;
        model.fitted = Some(Fitted {
            graph,
            readout,
            encoding,
            per_sequence,
        });
        Ok(model)
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn sequence_mode(&self) -> SequenceMode {
        self.sequence_mode
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    fn fitted(&self) -> Result<&Fitted> {
        self.fitted.as_ref().ok_or(RcnError::NotFitted)
    }

    pub fn graph(&self) -> Result<&BlockGraph> {
        Ok(&self.fitted()?.graph)
    }

    pub fn readout(&self) -> Result<&Readout> {
        Ok(&self.fitted()?.readout)
    }

    pub fn encoding(&self) -> Result<Option<&LabelEncoding>> {
        Ok(self.fitted()?.encoding.as_ref())
    }

    /// Whether the model was trained on sequence-to-label data.
    pub fn per_sequence(&self) -> Result<bool> {
        Ok(self.fitted()?.per_sequence)
    }

    /// Reservoir states of one sequence.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.fitted()?.graph.transform(x)
    }

    /// Linear readout outputs for one sequence.
    pub fn decision_function(&self, x: &Matrix) -> Result<Matrix> {
        let f = self.fitted()?;
        f.readout.predict(&f.graph.transform(x)?)
    }

    /// Row-wise softmax of the linear outputs.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        let out = self.decision_function(x)?;
        let data = out.row_iter().flat_map(softmax).collect();
        Matrix::new(out.rows(), out.cols(), data)
    }

    /// Softmax of the aggregated outputs of one sequence.
    pub fn predict_sequence_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        let out = self.decision_function(x)?;
        let agg = project_values(&out, self.projection)?;
        Ok(softmax(&agg))
    }

    fn resolve_mode(&self, data: &Dataset) -> SequenceMode {
        match (self.sequence_mode, data) {
            (SequenceMode::Auto, Dataset::Instances { .. }) => SequenceMode::Instance,
            (SequenceMode::Auto, Dataset::Sequences(_)) => SequenceMode::Sequence,
            (m, _) => m,
        }
    }

    fn target_matrix(&self, y: &Target, encoding: Option<&LabelEncoding>) -> Result<Matrix> {
        match (y, encoding) {
            (Target::Labels(l), Some(e)) => e.encode(l),
            (Target::Values(m), None) => Ok(m.clone()),
            (Target::Values(_), Some(_)) => Err(RcnError::param("task", "classification needs label targets")),
            (Target::Labels(_), None) => Err(RcnError::param("task", "regression needs real-valued targets")),
        }
    }

    /// Step targets of sequence `i`, broadcasting sequence-level targets.
    fn sequence_targets(&self, s: &SequenceDataset, i: usize, encoding: Option<&LabelEncoding>) -> Result<Matrix> {
        let steps = s.sequences()[i].rows();
        match s.targets() {
            SequenceTargets::PerStep(per) => self.target_matrix(&per[i], encoding),
            SequenceTargets::PerSequence(Target::Labels(l)) => match encoding {
                Some(e) => e.encode_repeated(l[i], steps),
                None => Err(RcnError::param("task", "regression needs real-valued targets")),
            },
            SequenceTargets::PerSequence(Target::Values(m)) => match encoding {
                None => {
                    let row = m.row(i);
                    Matrix::new(steps, row.len(), row.repeat(steps))
                }
                Some(_) => Err(RcnError::param("task", "classification needs label targets")),
            },
        }
    }

    fn fit_encoding(&self, data: &Dataset) -> Result<Option<LabelEncoding>> {
        if self.task == TaskKind::Regression {
            return Ok(None);
        }
        let labels: Vec<Label> = match data {
            Dataset::Instances { y: Target::Labels(l), .. } => l.clone(),
            Dataset::Sequences(s) => match s.targets() {
                SequenceTargets::PerSequence(Target::Labels(l)) => l.clone(),
                SequenceTargets::PerStep(per) => {
                    let mut all = Vec::new();
                    for t in per {
                        match t {
                            Target::Labels(l) => all.extend_from_slice(l),
                            Target::Values(_) => return Err(RcnError::param("task", "classification needs label targets")),
                        }
                    }
                    all
                }
                _ => return Err(RcnError::param("task", "classification needs label targets")),
            },
            _ => return Err(RcnError::param("task", "classification needs label targets")),
        };
        LabelEncoding::fit(&labels).map(Some)
    }

    fn output_width(&self, data: &Dataset, encoding: Option<&LabelEncoding>) -> usize {
        if let Some(e) = encoding {
            return e.width();
        }
        match data {
            Dataset::Instances { y, .. } => target_width(y),
            Dataset::Sequences(s) => match s.targets() {
                SequenceTargets::PerStep(per) => target_width(&per[0]),
                SequenceTargets::PerSequence(t) => target_width(t),
            },
        }
    }

    fn fit_dataset(&mut self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(RcnError::Empty("training data".into()));
        }
        let graph = self.spec.build(data.width())?;
        let encoding = self.fit_encoding(data)?;
        let n_out = self.output_width(data, encoding.as_ref());
        let mut acc = RidgeAccumulator::with_shape(graph.output_width(), n_out, self.alpha)?;
        let mode = self.resolve_mode(data);
        let per_sequence = matches!(data, Dataset::Sequences(s) if matches!(s.targets(), SequenceTargets::PerSequence(_)));

        match (data, mode) {
            (Dataset::Instances { x, y }, _) => {
                let states = graph.transform(x)?;
                acc.partial_fit(&states, &self.target_matrix(y, encoding.as_ref())?)?;
            }
            (Dataset::Sequences(s), SequenceMode::Instance) => {
                let x = Matrix::vstack(&s.sequences().iter().collect::<Vec<_>>())?;
                let targets = (0..s.len())
                    .map(|i| self.sequence_targets(s, i, encoding.as_ref()))
                    .collect::<Result<Vec<_>>>()?;
                let states = graph.transform(&x)?;
                acc.partial_fit(&states, &Matrix::vstack(&targets.iter().collect::<Vec<_>>())?)?;
            }
            (Dataset::Sequences(s), _) => {
                let indices: Vec<usize> = (0..s.len()).collect();
                let chunks: Vec<&[usize]> = indices.chunks(SEQUENCE_CHUNK).collect();
                let workers = rayon::current_num_threads().max(1) * 2;
                for group in chunks.chunks(workers) {
                    let parts = group
                        .par_iter()
                        .map(|chunk| {
                            let mut states = Vec::with_capacity(chunk.len());
                            let mut targets = Vec::with_capacity(chunk.len());
                            for &i in chunk.iter() {
                                states.push(graph.transform(&s.sequences()[i])?);
                                targets.push(self.sequence_targets(s, i, encoding.as_ref())?);
                            }
                            let mut part = RidgeAccumulator::with_shape(graph.output_width(), n_out, self.alpha)?;
                            part.partial_fit(
                                &Matrix::vstack(&states.iter().collect::<Vec<_>>())?,
                                &Matrix::vstack(&targets.iter().collect::<Vec<_>>())?,
                            )?;
                            Ok(part)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    for part in &parts {
                        acc.merge(part)?;
                    }
                }
            }
        }
        let readout = acc.finalize()?;
        self.fitted = Some(Fitted {
            graph,
            readout,
            encoding,
            per_sequence,
        });
        Ok(())
    }

    fn step_target(&self, f: &Fitted, out: Matrix) -> Result<Target> {
        match &f.encoding {
            Some(e) => Ok(Target::Labels(e.decode_rows(&out)?)),
            None => Ok(Target::Values(out)),
        }
    }

    fn predict_dataset(&self, data: &Dataset) -> Result<Prediction> {
        let f = self.fitted()?;
        let s = match data {
            Dataset::Instances { x, .. } => {
                let out = f.readout.predict(&f.graph.transform(x)?)?;
                return Ok(Prediction::Instances(self.step_target(f, out)?));
            }
            Dataset::Sequences(s) => s,
        };
        let outputs: Vec<Matrix> = if self.resolve_mode(data) == SequenceMode::Instance {
            let x = Matrix::vstack(&s.sequences().iter().collect::<Vec<_>>())?;
            let all = f.readout.predict(&f.graph.transform(&x)?)?;
            let mut start = 0;
            s.sequences()
                .iter()
                .map(|seq| {
                    let part = all.slice_rows(start..start + seq.rows());
                    start += seq.rows();
                    part
                })
                .collect()
        } else {
            s.sequences()
                .par_iter()
                .map(|seq| f.readout.predict(&f.graph.transform(seq)?))
                .collect::<Result<_>>()?
        };
        if !f.per_sequence {
            return Ok(Prediction::PerStep(
                outputs.into_iter().map(|o| self.step_target(f, o)).collect::<Result<_>>()?,
            ));
        }
        match &f.encoding {
            Some(e) => {
                let labels = outputs
                    .iter()
                    .map(|o| e.decode(project(o, self.projection)?))
                    .collect::<Result<_>>()?;
                Ok(Prediction::PerSequence(Target::Labels(labels)))
            }
            None => {
                let width = f.readout.n_outputs();
                let mut data = Vec::with_capacity(outputs.len() * width);
                for o in &outputs {
                    data.extend(project_values(o, self.projection)?);
                }
                Ok(Prediction::PerSequence(Target::Values(Matrix::new(outputs.len(), width, data)?)))
            }
        }
    }
}

fn target_width(t: &Target) -> usize {
    match t {
        Target::Values(m) => m.cols(),
        Target::Labels(_) => 1,
    }
}

fn fixed_spec(graph: &BlockGraph) -> GraphSpec {
    match graph {
        BlockGraph::Block(b) => GraphSpec::Fixed(b.clone()),
        BlockGraph::Cascade(s) => GraphSpec::Cascade(s.iter().map(fixed_spec).collect()),
        BlockGraph::Parallel(s) => GraphSpec::Parallel(s.iter().map(fixed_spec).collect()),
    }
}

impl Estimator for ReservoirModel {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        self.fit_dataset(data)
    }

    fn predict(&self, data: &Dataset) -> Result<Prediction> {
        self.predict_dataset(data)
    }
}

/// Echo state network: input projection, reservoir, ridge readout.
#[derive(Clone, Debug, PartialEq)]
pub struct EsnEstimator {
    params: EsnParams,
    model: ReservoirModel,
}

impl EsnEstimator {
    pub fn new(task: TaskKind, params: EsnParams) -> Result<Self> {
        params.validate()?;
        let spec = GraphSpec::Cascade(vec![
            GraphSpec::InputToNode(params.input_config()),
            GraphSpec::NodeToNode(params.reservoir_config()),
        ]);
        let model = ReservoirModel::new(spec, params.alpha, task)?
            .with_projection(params.decision_strategy)
            .with_sequence_mode(params.sequence_mode);
        Ok(Self { params, model })
    }

    pub fn regressor(params: EsnParams) -> Result<Self> {
        Self::new(TaskKind::Regression, params)
    }

    pub fn classifier(params: EsnParams) -> Result<Self> {
        Self::new(TaskKind::Classification, params)
    }

    pub fn from_params(task: TaskKind, params: &Params) -> Result<Self> {
        Self::new(task, EsnParams::from_params(params)?)
    }

    pub fn params(&self) -> &EsnParams {
        &self.params
    }

    pub fn model(&self) -> &ReservoirModel {
        &self.model
    }

    pub fn into_model(self) -> ReservoirModel {
        self.model
    }
}

impl Estimator for EsnEstimator {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        self.model.fit(data)
    }

    fn predict(&self, data: &Dataset) -> Result<Prediction> {
        self.model.predict(data)
    }
}

/// Extreme learning machine: input projection, ridge readout.
#[derive(Clone, Debug, PartialEq)]
pub struct ElmEstimator {
    params: ElmParams,
    model: ReservoirModel,
}

impl ElmEstimator {
    pub fn new(task: TaskKind, params: ElmParams) -> Result<Self> {
        params.validate()?;
        let spec = GraphSpec::InputToNode(params.input_config());
        let model = ReservoirModel::new(spec, params.alpha, task)?.with_projection(params.decision_strategy);
        Ok(Self { params, model })
    }

    pub fn regressor(params: ElmParams) -> Result<Self> {
        Self::new(TaskKind::Regression, params)
    }

    pub fn classifier(params: ElmParams) -> Result<Self> {
        Self::new(TaskKind::Classification, params)
    }

    pub fn from_params(task: TaskKind, params: &Params) -> Result<Self> {
        Self::new(task, ElmParams::from_params(params)?)
    }

    pub fn params(&self) -> &ElmParams {
        &self.params
    }

    pub fn model(&self) -> &ReservoirModel {
        &self.model
    }

    pub fn into_model(self) -> ReservoirModel {
        self.model
    }
}

impl Estimator for ElmEstimator {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        self.model.fit(data)
    }

    fn predict(&self, data: &Dataset) -> Result<Prediction> {
        self.model.predict(data)
    }
}

//! Binary model container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "RCNKIT01"  u32 version
//! u8 task  u8 projection  u8 sequence_mode  u8 per_sequence  f64 alpha
//! graph       tagged tree of blocks (see `write_graph`)
//! readout     u64 rows, u64 cols, rows·cols f64 (row-major)
//! labels      u8 present [u64 n, n × i64]
//! x scaler    u8 present [u64 width, width × f64 min, width × f64 max]
//! y scaler    same as x scaler
//! ```
//!
//! Sparse matrices are stored as `u64 rows, u64 cols, u64 nnz` followed by
//! `nnz` triples `(u64 row, u64 col, f64 value)`.

use std::path::Path;

use anyhow::{Context, Result};
use rcnkit::base::{Activation, Matrix, MinMaxScaler};
use rcnkit::blocks::{
    Block, BlockGraph, FanIn, InputToNodeBlock, InputToNodeConfig, NodeToNodeBlock, NodeToNodeConfig, SparseWeights,
};
use rcnkit::estimators::{LabelEncoding, MinMaxScaled, Projection, ReservoirModel, SequenceMode, TaskKind};
use rcnkit::readout::Readout;

use crate::error::data;

pub const MAGIC: &[u8; 8] = b"RCNKIT01";
pub const FORMAT_VERSION: u32 = 1;

const TAG_INPUT: u8 = 0;
const TAG_RESERVOIR: u8 = 1;
const TAG_CASCADE: u8 = 2;
const TAG_PARALLEL: u8 = 3;

/// A fitted model together with the scalers learned around it.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub model: ReservoirModel,
    pub x_scaler: Option<MinMaxScaler>,
    pub y_scaler: Option<MinMaxScaler>,
}

impl ModelFile {
    pub fn new(model: ReservoirModel, x_scaler: Option<MinMaxScaler>, y_scaler: Option<MinMaxScaler>) -> Self {
        Self { model, x_scaler, y_scaler }
    }

    /// Estimator applying the stored scalers around the model.
    pub fn predictor(&self) -> MinMaxScaled<ReservoirModel> {
        MinMaxScaled::from_parts(self.model.clone(), self.x_scaler.clone(), self.y_scaler.clone())
    }

    pub fn input_width(&self) -> Result<usize> {
        Ok(self.model.graph()?.input_width())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let m = &self.model;
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(FORMAT_VERSION);
        w.u8(match m.task() {
            TaskKind::Regression => 0,
            TaskKind::Classification => 1,
        });
        w.u8(projection_code(m.projection()));
        w.u8(mode_code(m.sequence_mode()));
        w.u8(m.per_sequence()? as u8);
        w.f64(m.alpha());
        write_graph(&mut w, m.graph()?);
        write_dense(&mut w, m.readout()?.weights());
        match m.encoding()? {
            Some(e) => {
                w.u8(1);
                w.u64(e.classes().len() as u64);
                e.classes().iter().for_each(|&c| w.i64(c));
            }
            None => w.u8(0),
        }
        write_scaler(&mut w, self.x_scaler.as_ref());
        write_scaler(&mut w, self.y_scaler.as_ref());
        Ok(w.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(data("not an rcnkit model file (bad magic)"));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(data(format!("unsupported model format version {version}")));
        }
        let task = match r.u8()? {
            0 => TaskKind::Regression,
            1 => TaskKind::Classification,
            t => return Err(data(format!("unknown task code {t}"))),
        };
        let projection = projection_from(r.u8()?)?;
        let mode = mode_from(r.u8()?)?;
        let per_sequence = r.bool()?;
        let alpha = r.f64()?;
        let graph = read_graph(&mut r, 0)?;
        let readout = Readout::from_weights(read_dense(&mut r)?)?;
        let encoding = if r.bool()? {
            let n = r.len(8)?;
            let classes = (0..n).map(|_| r.i64()).collect::<Result<Vec<_>>>()?;
            Some(LabelEncoding::from_classes(classes)?)
        } else {
            None
        };
        let x_scaler = read_scaler(&mut r)?;
        let y_scaler = read_scaler(&mut r)?;
        if r.pos != bytes.len() {
            return Err(data(format!("{} trailing bytes in model file", bytes.len() - r.pos)));
        }
        let model = ReservoirModel::from_fitted(graph, readout, encoding, per_sequence, task, projection, mode, alpha)?;
        Ok(Self { model, x_scaler, y_scaler })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).with_context(|| format!("writing model {}", path.display()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).with_context(|| format!("reading model {}", path.display()))?;
        Self::from_bytes(&bytes).with_context(|| format!("loading model {}", path.display()))
    }
}

fn projection_code(p: Projection) -> u8 {
    match p {
        Projection::WinnerTakesAll => 0,
        Projection::LastValue => 1,
        Projection::MeanValue => 2,
    }
}

fn projection_from(c: u8) -> Result<Projection> {
    Ok(match c {
        0 => Projection::WinnerTakesAll,
        1 => Projection::LastValue,
        2 => Projection::MeanValue,
        _ => return Err(data(format!("unknown projection code {c}"))),
    })
}

fn mode_code(m: SequenceMode) -> u8 {
    match m {
        SequenceMode::Auto => 0,
        SequenceMode::Sequence => 1,
        SequenceMode::Instance => 2,
    }
}

fn mode_from(c: u8) -> Result<SequenceMode> {
    Ok(match c {
        0 => SequenceMode::Auto,
        1 => SequenceMode::Sequence,
        2 => SequenceMode::Instance,
        _ => return Err(data(format!("unknown sequence mode code {c}"))),
    })
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn fan_in(&mut self, f: FanIn) {
        match f {
            FanIn::Dense => {
                self.u8(0);
                self.u64(0);
            }
            FanIn::Count(k) => {
                self.u8(1);
                self.u64(k as u64);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(data(format!("model file truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(data(format!("invalid flag byte {b} at byte {}", self.pos - 1))),
        }
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| data("size does not fit in memory"))
    }
    /// Element count, checked against the bytes left so corrupt files fail
    /// before allocating.
    fn len(&mut self, item_bytes: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.saturating_mul(item_bytes) > self.buf.len() - self.pos {
            return Err(data(format!("model file truncated: {n} items announced at byte {}", self.pos)));
        }
        Ok(n)
    }
    fn fan_in(&mut self) -> Result<FanIn> {
        let kind = self.u8()?;
        let k = self.usize()?;
        match kind {
            0 => Ok(FanIn::Dense),
            1 => Ok(FanIn::Count(k)),
            _ => Err(data(format!("unknown fan-in code {kind}"))),
        }
    }
    fn activation(&mut self) -> Result<Activation> {
        let c = self.u8()?;
        Activation::from_code(c).ok_or_else(|| data(format!("unknown activation code {c}")))
    }
}

fn write_sparse(w: &mut Writer, s: &SparseWeights) {
    w.u64(s.rows() as u64);
    w.u64(s.cols() as u64);
    w.u64(s.nnz() as u64);
    for (i, j, v) in s.triples() {
        w.u64(i as u64);
        w.u64(j as u64);
        w.f64(v);
    }
}

fn read_sparse(r: &mut Reader) -> Result<SparseWeights> {
    let rows = r.usize()?;
    let cols = r.usize()?;
    let nnz = r.len(24)?;
    let triples = (0..nnz)
        .map(|_| Ok((r.usize()?, r.usize()?, r.f64()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseWeights::from_triples(rows, cols, &triples)?)
}

fn write_dense(w: &mut Writer, m: &Matrix) {
    w.u64(m.rows() as u64);
    w.u64(m.cols() as u64);
    m.as_slice().iter().for_each(|&v| w.f64(v));
}

fn read_dense(r: &mut Reader) -> Result<Matrix> {
    let rows = r.usize()?;
    let cols = r.usize()?;
    let n = rows.checked_mul(cols).ok_or_else(|| data("matrix size overflows"))?;
    if n.saturating_mul(8) > r.buf.len() - r.pos {
        return Err(data("model file truncated inside a matrix"));
    }
    let values = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    Ok(Matrix::new(rows, cols, values)?)
}

fn write_scaler(w: &mut Writer, s: Option<&MinMaxScaler>) {
    match s {
        Some(s) => {
            w.u8(1);
            w.u64(s.width() as u64);
            s.min().iter().chain(s.max()).for_each(|&v| w.f64(v));
        }
        None => w.u8(0),
    }
}

fn read_scaler(r: &mut Reader) -> Result<Option<MinMaxScaler>> {
    if !r.bool()? {
        return Ok(None);
    }
    let n = r.len(16)?;
    let min = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let max = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    Ok(Some(MinMaxScaler::from_parts(min, max)?))
}

/// Pre-order tree: a tag byte, then either block data or a child count
/// followed by the children.
fn write_graph(w: &mut Writer, g: &BlockGraph) {
    match g {
        BlockGraph::Block(Block::InputToNode(b)) => {
            let c = b.config();
            w.u8(TAG_INPUT);
            w.u64(c.hidden_layer_size as u64);
            w.fan_in(c.k_in);
            w.u8(c.input_activation.code());
            w.f64(c.input_scaling);
            w.f64(c.bias_scaling);
            w.u64(c.seed);
            w.u8(b.is_predefined() as u8);
            write_sparse(w, b.weights());
            w.u64(b.bias().len() as u64);
            b.bias().iter().for_each(|&v| w.f64(v));
        }
        BlockGraph::Block(Block::NodeToNode(b)) => {
            let c = b.config();
            w.u8(TAG_RESERVOIR);
            w.u64(c.hidden_layer_size as u64);
            w.fan_in(c.k_rec);
            w.f64(c.spectral_radius);
            w.f64(c.leakage);
            w.u8(c.reservoir_activation.code());
            w.u8(c.bidirectional as u8);
            w.u64(c.seed);
            w.u8(b.is_predefined() as u8);
            write_sparse(w, b.weights());
        }
        BlockGraph::Cascade(children) | BlockGraph::Parallel(children) => {
            w.u8(if matches!(g, BlockGraph::Cascade(_)) { TAG_CASCADE } else { TAG_PARALLEL });
            w.u64(children.len() as u64);
            children.iter().for_each(|c| write_graph(w, c));
        }
    }
}

const MAX_GRAPH_DEPTH: usize = 64;

fn read_graph(r: &mut Reader, depth: usize) -> Result<BlockGraph> {
    if depth > MAX_GRAPH_DEPTH {
        return Err(data("block graph nested too deeply"));
    }
    match r.u8()? {
        TAG_INPUT => {
            let config = InputToNodeConfig {
                hidden_layer_size: r.usize()?,
                k_in: r.fan_in()?,
                input_activation: r.activation()?,
                input_scaling: r.f64()?,
                bias_scaling: r.f64()?,
                seed: r.u64()?,
            };
            let predefined = r.bool()?;
            let weights = read_sparse(r)?;
            let n = r.len(8)?;
            let bias = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            Ok(Block::InputToNode(InputToNodeBlock::from_parts(config, weights, bias, predefined)?).into())
        }
        TAG_RESERVOIR => {
            let config = NodeToNodeConfig {
                hidden_layer_size: r.usize()?,
                k_rec: r.fan_in()?,
                spectral_radius: r.f64()?,
                leakage: r.f64()?,
                reservoir_activation: r.activation()?,
                bidirectional: r.bool()?,
                seed: r.u64()?,
            };
            let predefined = r.bool()?;
            let weights = read_sparse(r)?;
            Ok(Block::NodeToNode(NodeToNodeBlock::from_parts(config, weights, predefined)?).into())
        }
        tag @ (TAG_CASCADE | TAG_PARALLEL) => {
            let n = r.len(1)?;
            let children = (0..n).map(|_| read_graph(r, depth + 1)).collect::<Result<Vec<_>>>()?;
            Ok(if tag == TAG_CASCADE {
                BlockGraph::cascade(children)?
            } else {
                BlockGraph::parallel(children)?
            })
        }
        tag => Err(data(format!("unknown block tag {tag}"))),
    }
}

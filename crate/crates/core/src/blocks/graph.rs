use crate::base::Matrix;
use crate::blocks::{InputToNodeBlock, InputToNodeConfig, NodeToNodeBlock, NodeToNodeConfig};
use crate::error::{RcnError, Result};

/// A fitted building block.
#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    InputToNode(InputToNodeBlock),
    NodeToNode(NodeToNodeBlock),
}

impl Block {
    pub fn input_width(&self) -> usize {
        match self {
            Block::InputToNode(b) => b.input_width(),
            Block::NodeToNode(b) => b.input_width(),
        }
    }

    pub fn output_width(&self) -> usize {
        match self {
            Block::InputToNode(b) => b.output_width(),
            Block::NodeToNode(b) => b.output_width(),
        }
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Block::InputToNode(b) => b.transform(x),
            Block::NodeToNode(b) => b.transform(x),
        }
    }
}

impl From<InputToNodeBlock> for Block {
    fn from(b: InputToNodeBlock) -> Self {
        Block::InputToNode(b)
    }
}

impl From<NodeToNodeBlock> for Block {
    fn from(b: NodeToNodeBlock) -> Self {
        Block::NodeToNode(b)
    }
}

/// Composition of fitted blocks.
///
/// A cascade feeds each stage into the next. A parallel group feeds the same
/// input to every member and concatenates their outputs feature-wise in
/// member order.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockGraph {
    Block(Block),
    Cascade(Vec<BlockGraph>),
    Parallel(Vec<BlockGraph>),
}

impl BlockGraph {
    pub fn cascade(stages: Vec<BlockGraph>) -> Result<Self> {
        let g = BlockGraph::Cascade(stages);
        g.validate()?;
        Ok(g)
    }

    pub fn parallel(members: Vec<BlockGraph>) -> Result<Self> {
        let g = BlockGraph::Parallel(members);
        g.validate()?;
        Ok(g)
    }

    pub fn input_width(&self) -> usize {
        match self {
            BlockGraph::Block(b) => b.input_width(),
            BlockGraph::Cascade(s) | BlockGraph::Parallel(s) => s.first().map_or(0, |g| g.input_width()),
        }
    }

    pub fn output_width(&self) -> usize {
        match self {
            BlockGraph::Block(b) => b.output_width(),
            BlockGraph::Cascade(s) => s.last().map_or(0, |g| g.output_width()),
            BlockGraph::Parallel(s) => s.iter().map(BlockGraph::output_width).sum(),
        }
    }

    /// Checks the width invariants of every cascade and parallel group.
    pub fn validate(&self) -> Result<()> {
        self.validate_at("graph")
    }

    fn validate_at(&self, path: &str) -> Result<()> {
        match self {
            BlockGraph::Block(_) => Ok(()),
            BlockGraph::Cascade(stages) => {
                if stages.is_empty() {
                    return Err(RcnError::Empty(format!("{path}: cascade")));
                }
                for (i, s) in stages.iter().enumerate() {
                    s.validate_at(&format!("{path}/cascade[{i}]"))?;
                }
                for (i, pair) in stages.windows(2).enumerate() {
                    if pair[0].output_width() != pair[1].input_width() {
                        return Err(RcnError::width(
                            format!("{path}/cascade[{}]", i + 1),
                            pair[0].output_width(),
                            pair[1].input_width(),
                        ));
                    }
                }
                Ok(())
            }
            BlockGraph::Parallel(members) => {
                if members.is_empty() {
                    return Err(RcnError::Empty(format!("{path}: parallel group")));
                }
                let width = members[0].input_width();
                for (i, m) in members.iter().enumerate() {
                    m.validate_at(&format!("{path}/parallel[{i}]"))?;
                    if m.input_width() != width {
                        return Err(RcnError::width(
                            format!("{path}/parallel[{i}]"),
                            width,
                            m.input_width(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Applies the graph to one sequence.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.transform_at(x, "graph")
    }

    fn transform_at(&self, x: &Matrix, path: &str) -> Result<Matrix> {
        if x.cols() != self.input_width() {
            return Err(RcnError::width(path.to_string(), self.input_width(), x.cols()));
        }
        match self {
            BlockGraph::Block(b) => b.transform(x),
            BlockGraph::Cascade(stages) => {
                let mut current = std::borrow::Cow::Borrowed(x);
                for (i, s) in stages.iter().enumerate() {
                    let next = s.transform_at(&current, &format!("{path}/cascade[{i}]"))?;
                    current = std::borrow::Cow::Owned(next);
                }
                Ok(current.into_owned())
            }
            BlockGraph::Parallel(members) => {
                let outs = members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.transform_at(x, &format!("{path}/parallel[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                Matrix::hstack(&outs.iter().collect::<Vec<_>>())
            }
        }
    }

    /// Every block in depth-first order.
    pub fn blocks(&self) -> Vec<&Block> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Block>) {
        match self {
            BlockGraph::Block(b) => out.push(b),
            BlockGraph::Cascade(s) | BlockGraph::Parallel(s) => s.iter().for_each(|g| g.collect(out)),
        }
    }
}

impl From<Block> for BlockGraph {
    fn from(b: Block) -> Self {
        BlockGraph::Block(b)
    }
}

impl From<InputToNodeBlock> for BlockGraph {
    fn from(b: InputToNodeBlock) -> Self {
        BlockGraph::Block(b.into())
    }
}

impl From<NodeToNodeBlock> for BlockGraph {
    fn from(b: NodeToNodeBlock) -> Self {
        BlockGraph::Block(b.into())
    }
}

/// Unfitted graph description; `build` initializes every block once the
/// input width is known.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSpec {
    InputToNode(InputToNodeConfig),
    NodeToNode(NodeToNodeConfig),
    Fixed(Block),
    Cascade(Vec<GraphSpec>),
    Parallel(Vec<GraphSpec>),
}

impl GraphSpec {
    pub fn build(&self, n_in: usize) -> Result<BlockGraph> {
        self.build_at(n_in, "graph")
    }

    fn build_at(&self, n_in: usize, path: &str) -> Result<BlockGraph> {
        let graph = match self {
            GraphSpec::InputToNode(cfg) => InputToNodeBlock::init(cfg.clone(), n_in)?.into(),
            GraphSpec::NodeToNode(cfg) => {
                if cfg.hidden_layer_size != n_in {
                    return Err(RcnError::width(path.to_string(), cfg.hidden_layer_size, n_in));
                }
                NodeToNodeBlock::init(cfg.clone())?.into()
            }
            GraphSpec::Fixed(block) => {
                if block.input_width() != n_in {
                    return Err(RcnError::width(path.to_string(), block.input_width(), n_in));
                }
                BlockGraph::Block(block.clone())
            }
            GraphSpec::Cascade(stages) => {
                let mut built = Vec::with_capacity(stages.len());
                let mut width = n_in;
                for (i, s) in stages.iter().enumerate() {
                    let g = s.build_at(width, &format!("{path}/cascade[{i}]"))?;
                    width = g.output_width();
                    built.push(g);
                }
                BlockGraph::Cascade(built)
            }
            GraphSpec::Parallel(members) => BlockGraph::Parallel(
                members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.build_at(n_in, &format!("{path}/parallel[{i}]")))
                    .collect::<Result<_>>()?,
            ),
        };
        graph.validate_at(path)?;
        Ok(graph)
    }
}

/// Applies `graph` to `u`.
pub fn compose(graph: &BlockGraph, u: &Matrix) -> Result<Matrix> {
    graph.transform(u)
}

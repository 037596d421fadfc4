//! Input-to-Node and Node-to-Node building blocks, their random weight
//! initialization, and cascade/parallel composition.

mod graph;
mod input_to_node;
mod node_to_node;
pub mod spectral;
mod weights;

pub use graph::{compose, Block, BlockGraph, GraphSpec};
pub use input_to_node::{InputToNodeBlock, InputToNodeConfig};
pub use node_to_node::{NodeToNodeBlock, NodeToNodeConfig};
pub use spectral::{spectral_radius, spectral_radius_with, SpectralOptions};
pub use weights::{FanIn, SparseWeights};

//! Reservoir computing building blocks and estimators.
//!
//! Networks are assembled from Input-to-Node and Node-to-Node blocks,
//! composed in cascades or parallel groups, and read out by a linear ridge
//! regression that is trained incrementally.

pub mod base;
pub mod blocks;
pub mod datasets;
pub mod error;
pub mod estimators;
pub mod metrics;
pub mod model_selection;
pub mod readout;

pub use error::{ErrorClass, RcnError, Result};

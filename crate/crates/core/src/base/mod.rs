//! Numeric foundations: matrices, activations, seeded randomness, scaling
//! and CSV I/O.

mod activation;
pub mod csv_io;
mod dataset;
mod matrix;
mod rng;
mod scaler;

pub use activation::{apply_activation, Activation};
pub use dataset::{Dataset, Label, Prediction, SequenceDataset, SequenceTargets, Target};
pub use matrix::Matrix;
pub(crate) use matrix::gemm;
pub use rng::{Rng, RNG_ALGORITHM};
pub use scaler::MinMaxScaler;

//! Spectral laboratory for sparse random-graph adjacency matrices.

pub mod error;
pub mod exact;
pub mod experiments;
pub mod io;
pub mod matrix;
pub mod models;
pub mod rng;
pub(crate) mod serde_inf;
pub mod spectral;
pub mod structure;
pub mod vectors;

pub use error::{Error, Result};
pub use matrix::SparseBinaryMatrix;
pub use models::{GraphModel, MeanMatrix, ModelKind};
pub use rng::SeededRng;

//! Dense-tensor reverse-mode differentiation. The graph is rebuilt on every
//! forward pass (define-by-run), which keeps variable-length documents
//! trivial to handle, and everything is 64-bit so finite-difference checks
//! have the precision they need.

mod adam;
pub mod checkpoint;
mod graph;
mod params;
mod tensor;

pub use adam::{adam_step, clip_global_norm, AdamOptimizer, AdamState};
pub use graph::{Graph, TensorId};
pub use params::ParamStore;
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("{op}: shape mismatch between {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{op}: expected a matrix, got shape {shape:?}")]
    NotAMatrix { op: &'static str, shape: Vec<usize> },
    #[error("softmax: input must have at least one element")]
    EmptySoftmax,
    #[error("max-over-time pooling: feature map has zero columns; pad the sentence so every width has at least one window")]
    EmptyPooling,
    #[error("concat: no inputs given")]
    EmptyConcat,
    #[error("backward: loss must be a scalar, got shape {shape:?}")]
    NonScalarLoss { shape: Vec<usize> },
    #[error("row {row} out of range for shape {shape:?}")]
    RowOutOfRange { row: usize, shape: Vec<usize> },
    #[error("embedding lookup: id {id} out of range for {rows} rows")]
    EmbedIndexOutOfRange { id: usize, rows: usize },
    #[error("parameter `{0}` not found")]
    UnknownParam(String),
    #[error("parameter `{0}` has no gradient; run backward before stepping")]
    MissingGrad(String),
    #[error("optimizer state for `{name}` has length {state_len}, parameter has {param_len}")]
    StateSizeMismatch {
        name: String,
        state_len: usize,
        param_len: usize,
    },
}

//! From-scratch extractive summarizer: a convolutional sentence encoder, a
//! recurrent + memory-attention document encoder, and a sequential sentence
//! decoder, built on a small dense-tensor library with reverse-mode
//! differentiation. Ships with the text pipeline, Adam training loop,
//! bit-exact checkpointing, and ROUGE evaluation needed to run the whole
//! thing end to end.

pub mod autodiff;
pub mod eval;
pub mod model;
pub mod text;
pub mod train;

pub use autodiff::{Graph, ParamStore, Tensor, TensorId};
pub use text::{Corpus, Document, Vocabulary};
pub use train::{TrainConfig, TrainReport};

//! The summarization network: convolutional sentence encoding, recurrent +
//! memory-attention document encoding with fusion, and the sequential
//! sentence decoder, assembled over the autodiff graph.

mod decoder;
mod document;
mod sentence;

pub use decoder::decode;
pub use document::{encode_recurrent, fuse, lstm_cell, memnet_encode, MemnetEncoding};
pub use sentence::encode_sentence;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, Graph, ParamStore, Tensor, TensorId};
use crate::text::PAD_ID;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("sentence encoder: sequence has no non-pad tokens")]
    EmptySentence,
    #[error("document encoder: document has no sentences")]
    EmptyDocument,
    #[error("decoder: {what} has length {left}, expected {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("bidirectional encoder needs an even document dimension, got {0}")]
    OddDocDim(usize),
    #[error("at least one kernel width is required")]
    NoKernelWidths,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderMode {
    Lstm,
    #[default]
    Blstm,
}

impl std::fmt::Display for EncoderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EncoderMode::Lstm => write!(f, "lstm"),
            EncoderMode::Blstm => write!(f, "blstm"),
        }
    }
}

impl std::str::FromStr for EncoderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lstm" => Ok(EncoderMode::Lstm),
            "blstm" => Ok(EncoderMode::Blstm),
            other => Err(format!("unknown encoder mode `{other}`; use lstm or blstm")),
        }
    }
}

/// Every dimension the network needs, resolved against a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDims {
    pub vocab: usize,
    pub word_dim: usize,
    pub sent_dim: usize,
    pub doc_dim: usize,
    pub kernel_widths: Vec<usize>,
    pub hops: usize,
    pub mlp_hidden: usize,
    pub encoder_mode: EncoderMode,
}

impl ModelDims {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.kernel_widths.is_empty() {
            return Err(ModelError::NoKernelWidths);
        }
        if self.encoder_mode == EncoderMode::Blstm && self.doc_dim % 2 != 0 {
            return Err(ModelError::OddDocDim(self.doc_dim));
        }
        Ok(())
    }

    /// Hidden size of one recurrent direction.
    pub fn enc_hidden(&self) -> usize {
        match self.encoder_mode {
            EncoderMode::Lstm => self.doc_dim,
            EncoderMode::Blstm => self.doc_dim / 2,
        }
    }
}

/// Stable parameter names used for checkpoints and graph binding.
pub mod names {
    pub const WORD_EMBEDDING: &str = "embed.words";
    pub const MEM_QUERY: &str = "mem.query";
    pub const DEC_INIT_W: &str = "dec.init.w";
    pub const DEC_INIT_B: &str = "dec.init.b";
    pub const DEC_MLP_W1: &str = "dec.mlp.w1";
    pub const DEC_MLP_B1: &str = "dec.mlp.b1";
    pub const DEC_MLP_W2: &str = "dec.mlp.w2";
    pub const DEC_MLP_B2: &str = "dec.mlp.b2";
    pub const ENC_FWD: &str = "enc.fwd";
    pub const ENC_BWD: &str = "enc.bwd";
    pub const DEC_LSTM: &str = "dec.lstm";
    pub const GATES: [&str; 4] = ["input", "forget", "cell", "output"];

    pub fn conv_weight(width: usize) -> String {
        format!("conv.w{width}")
    }

    pub fn conv_bias(width: usize) -> String {
        format!("conv.b{width}")
    }

    pub fn gate_wx(prefix: &str, gate: &str) -> String {
        format!("{prefix}.{gate}.wx")
    }

    pub fn gate_wh(prefix: &str, gate: &str) -> String {
        format!("{prefix}.{gate}.wh")
    }

    pub fn gate_b(prefix: &str, gate: &str) -> String {
        format!("{prefix}.{gate}.b")
    }

    pub fn mem_input(hop: usize) -> String {
        format!("mem.hop{hop}.a")
    }

    pub fn mem_output(hop: usize) -> String {
        format!("mem.hop{hop}.c")
    }
}

/// Initialize every learnable tensor i.i.d. uniform on
/// `[-init_range, init_range]` from a seeded generator, in a fixed creation
/// order, then zero the PAD embedding row. Identical seeds give bit-identical
/// parameters.
pub fn init_params(dims: &ModelDims, init_range: f64, seed: u64) -> Result<ParamStore, ModelError> {
    dims.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();

    draw(&mut store, &mut rng, init_range, names::WORD_EMBEDDING, vec![dims.vocab, dims.word_dim]);
    for &width in &dims.kernel_widths {
        draw(
            &mut store,
            &mut rng,
            init_range,
            names::conv_weight(width),
            vec![dims.sent_dim, width * dims.word_dim],
        );
        draw(&mut store, &mut rng, init_range, names::conv_bias(width), vec![dims.sent_dim]);
    }

    let hidden = dims.enc_hidden();
    draw_lstm(&mut store, &mut rng, init_range, names::ENC_FWD, dims.sent_dim, hidden);
    if dims.encoder_mode == EncoderMode::Blstm {
        draw_lstm(&mut store, &mut rng, init_range, names::ENC_BWD, dims.sent_dim, hidden);
    }

    if dims.hops > 0 {
        draw(
            &mut store,
            &mut rng,
            init_range,
            names::MEM_QUERY,
            vec![dims.doc_dim, dims.doc_dim],
        );
        for hop in 1..=dims.hops {
            draw(
                &mut store,
                &mut rng,
                init_range,
                names::mem_input(hop),
                vec![dims.doc_dim, dims.sent_dim],
            );
            draw(
                &mut store,
                &mut rng,
                init_range,
                names::mem_output(hop),
                vec![dims.doc_dim, dims.sent_dim],
            );
        }
    }

    draw_lstm(&mut store, &mut rng, init_range, names::DEC_LSTM, dims.sent_dim, dims.doc_dim);
    draw(
        &mut store,
        &mut rng,
        init_range,
        names::DEC_INIT_W,
        vec![dims.doc_dim, dims.doc_dim],
    );
    draw(&mut store, &mut rng, init_range, names::DEC_INIT_B, vec![dims.doc_dim]);
    draw(
        &mut store,
        &mut rng,
        init_range,
        names::DEC_MLP_W1,
        vec![dims.mlp_hidden, 2 * dims.doc_dim],
    );
    draw(&mut store, &mut rng, init_range, names::DEC_MLP_B1, vec![dims.mlp_hidden]);
    draw(&mut store, &mut rng, init_range, names::DEC_MLP_W2, vec![1, dims.mlp_hidden]);
    draw(&mut store, &mut rng, init_range, names::DEC_MLP_B2, vec![1]);

    // PAD embeds to zero and stays there; training masks its gradient.
    let embedding = store.get_mut(names::WORD_EMBEDDING).expect("just inserted");
    let cols = dims.word_dim;
    embedding.data_mut()[PAD_ID * cols..(PAD_ID + 1) * cols]
        .iter_mut()
        .for_each(|v| *v = 0.0);

    Ok(store)
}

fn draw(
    store: &mut ParamStore,
    rng: &mut ChaCha8Rng,
    range: f64,
    name: impl Into<String>,
    shape: Vec<usize>,
) {
    let numel: usize = shape.iter().product();
    let data: Vec<f64> = (0..numel).map(|_| rng.random_range(-range..=range)).collect();
    store.insert(name, Tensor::new(shape, data));
}

fn draw_lstm(
    store: &mut ParamStore,
    rng: &mut ChaCha8Rng,
    range: f64,
    prefix: &str,
    input: usize,
    hidden: usize,
) {
    for gate in names::GATES {
        draw(store, rng, range, names::gate_wx(prefix, gate), vec![hidden, input]);
        draw(store, rng, range, names::gate_wh(prefix, gate), vec![hidden, hidden]);
        draw(store, rng, range, names::gate_b(prefix, gate), vec![hidden]);
    }
}

/// Everything one teacher-forced or free-running pass produces.
pub struct DocForward {
    pub sentvecs: Vec<TensorId>,
    pub states: Vec<TensorId>,
    pub d_prime: TensorId,
    pub d_double_prime: TensorId,
    pub d_f: TensorId,
    /// Attention distribution per memory hop, recorded during the pass.
    pub attention: Vec<Vec<f64>>,
    pub scores: Vec<TensorId>,
}

/// Full forward pass over one document's token-id sentences. With `teacher`
/// given, the decoder consumes gold labels as its previous-step certainty;
/// otherwise it feeds back its own scores.
pub fn forward_document(
    g: &mut Graph,
    store: &ParamStore,
    dims: &ModelDims,
    sentences: &[Vec<usize>],
    teacher: Option<&[u8]>,
) -> Result<DocForward, ModelError> {
    if sentences.is_empty() {
        return Err(ModelError::EmptyDocument);
    }
    let sentvecs: Vec<TensorId> = sentences
        .iter()
        .map(|tokens| encode_sentence(g, store, dims, tokens))
        .collect::<Result<_, _>>()?;
    let (states, d_prime) = encode_recurrent(g, store, dims, &sentvecs)?;
    let memory = memnet_encode(g, store, dims, &sentvecs, d_prime)?;
    let d_f = fuse(g, d_prime, memory.output)?;
    let scores = decode(g, store, dims, &sentvecs, &states, d_f, teacher)?;
    Ok(DocForward {
        sentvecs,
        states,
        d_prime,
        d_double_prime: memory.output,
        d_f,
        attention: memory.attention,
        scores,
    })
}

/// Inference-mode sentence scores for one document.
pub fn score_document(
    store: &ParamStore,
    dims: &ModelDims,
    sentences: &[Vec<usize>],
) -> Result<Vec<f64>, ModelError> {
    let mut g = Graph::new();
    let forward = forward_document(&mut g, store, dims, sentences, None)?;
    Ok(forward
        .scores
        .iter()
        .map(|&id| g.scalar_value(id))
        .collect())
}

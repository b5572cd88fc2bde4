use super::{names, EncoderMode, ModelDims, ModelError};
use crate::autodiff::{Graph, ParamStore, TensorId};

/// One step of the standard LSTM cell using the named gate parameters under
/// `prefix`: sigmoid input/forget/output gates, tanh candidate,
/// `c' = f*c + i*g`, `h' = o * tanh(c')`.
pub fn lstm_cell(
    g: &mut Graph,
    store: &ParamStore,
    prefix: &str,
    x: TensorId,
    h: TensorId,
    c: TensorId,
) -> Result<(TensorId, TensorId), ModelError> {
    let input = gate(g, store, prefix, "input", x, h, true)?;
    let forget = gate(g, store, prefix, "forget", x, h, true)?;
    let candidate = gate(g, store, prefix, "cell", x, h, false)?;
    let output = gate(g, store, prefix, "output", x, h, true)?;
    let kept = g.mul(forget, c)?;
    let written = g.mul(input, candidate)?;
    let new_c = g.add(kept, written)?;
    let squashed = g.tanh(new_c);
    let new_h = g.mul(output, squashed)?;
    Ok((new_h, new_c))
}

fn gate(
    g: &mut Graph,
    store: &ParamStore,
    prefix: &str,
    gate: &str,
    x: TensorId,
    h: TensorId,
    sigmoid: bool,
) -> Result<TensorId, ModelError> {
    let wx = g.param(store, &names::gate_wx(prefix, gate))?;
    let wh = g.param(store, &names::gate_wh(prefix, gate))?;
    let b = g.param(store, &names::gate_b(prefix, gate))?;
    let from_input = g.matvec(wx, x)?;
    let from_state = g.matvec(wh, h)?;
    let summed = g.add(from_input, from_state)?;
    let pre = g.add(summed, b)?;
    Ok(if sigmoid { g.sigmoid(pre) } else { g.tanh(pre) })
}

/// Run the recurrent document encoder over the sentence vectors. In `lstm`
/// mode the per-step states have the full document dimension and the summary
/// is the final hidden state. In `blstm` mode a forward and a backward pass
/// each carry half the dimension; step states are `concat(fwd_t, bwd_t)` and
/// the summary is `concat(final fwd, final bwd)`. Initial states are zero.
pub fn encode_recurrent(
    g: &mut Graph,
    store: &ParamStore,
    dims: &ModelDims,
    sentvecs: &[TensorId],
) -> Result<(Vec<TensorId>, TensorId), ModelError> {
    if sentvecs.is_empty() {
        return Err(ModelError::EmptyDocument);
    }
    match dims.encoder_mode {
        EncoderMode::Lstm => {
            let states = run_direction(g, store, names::ENC_FWD, dims.enc_hidden(), sentvecs)?;
            let summary = *states.last().expect("non-empty");
            Ok((states, summary))
        }
        EncoderMode::Blstm => {
            let n = sentvecs.len();
            let forward = run_direction(g, store, names::ENC_FWD, dims.enc_hidden(), sentvecs)?;
            let reversed: Vec<TensorId> = sentvecs.iter().rev().copied().collect();
            let backward = run_direction(g, store, names::ENC_BWD, dims.enc_hidden(), &reversed)?;
            let mut states = Vec::with_capacity(n);
            for t in 0..n {
                states.push(g.concat(&[forward[t], backward[n - 1 - t]])?);
            }
            let summary = g.concat(&[forward[n - 1], backward[n - 1]])?;
            Ok((states, summary))
        }
    }
}

fn run_direction(
    g: &mut Graph,
    store: &ParamStore,
    prefix: &str,
    hidden: usize,
    inputs: &[TensorId],
) -> Result<Vec<TensorId>, ModelError> {
    let mut h = g.zeros(vec![hidden]);
    let mut c = g.zeros(vec![hidden]);
    let mut states = Vec::with_capacity(inputs.len());
    for &x in inputs {
        let (nh, nc) = lstm_cell(g, store, prefix, x, h, c)?;
        h = nh;
        c = nc;
        states.push(h);
    }
    Ok(states)
}

/// Result of the stacked memory hops: the last hop's aggregated output and
/// the attention distribution recorded at every hop.
pub struct MemnetEncoding {
    pub output: TensorId,
    pub attention: Vec<Vec<f64>>,
}

/// Memory-attention document encoding. The query transform maps the
/// recurrent summary into the first internal state; each hop transforms the
/// sentence vectors into memory and output vectors, matches the state
/// against every memory by inner product + softmax, aggregates the output
/// vectors under that distribution, and adds the aggregate into the state.
/// The encoding is the last hop's aggregate. With zero hops the encoding is
/// the zero vector and fusion reduces to the recurrent summary alone.
pub fn memnet_encode(
    g: &mut Graph,
    store: &ParamStore,
    dims: &ModelDims,
    sentvecs: &[TensorId],
    d_prime: TensorId,
) -> Result<MemnetEncoding, ModelError> {
    if sentvecs.is_empty() {
        return Err(ModelError::EmptyDocument);
    }
    if dims.hops == 0 {
        return Ok(MemnetEncoding {
            output: g.zeros(vec![dims.doc_dim]),
            attention: Vec::new(),
        });
    }
    let query = g.param(store, names::MEM_QUERY)?;
    let mut state = g.matvec(query, d_prime)?;
    let mut attention = Vec::with_capacity(dims.hops);
    let mut aggregate = state;
    for hop in 1..=dims.hops {
        let input_embed = g.param(store, &names::mem_input(hop))?;
        let output_embed = g.param(store, &names::mem_output(hop))?;
        let mut logits = Vec::with_capacity(sentvecs.len());
        let mut outputs = Vec::with_capacity(sentvecs.len());
        for &s in sentvecs {
            let memory = g.matvec(input_embed, s)?;
            logits.push(g.dot(state, memory)?);
            outputs.push(g.matvec(output_embed, s)?);
        }
        let logit_vec = g.concat(&logits)?;
        let probs = g.softmax(logit_vec)?;
        attention.push(g.data(probs).to_vec());
        let output_stack = g.stack_cols(&outputs)?;
        aggregate = g.matvec(output_stack, probs)?;
        state = g.add(state, aggregate)?;
    }
    Ok(MemnetEncoding {
        output: aggregate,
        attention,
    })
}

/// Elementwise fusion of the recurrent and memory document embeddings.
pub fn fuse(g: &mut Graph, d_prime: TensorId, d_double_prime: TensorId) -> Result<TensorId, ModelError> {
    Ok(g.add(d_prime, d_double_prime)?)
}

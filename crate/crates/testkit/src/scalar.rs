//! Loop-based reference forward passes for every model fragment, written
//! against plain nested `Vec` matrices. Each function mirrors the published
//! equations step by step so the main tensor path can be checked against an
//! implementation with no shared machinery.

use crate::OracleError;

/// Row-major matrix as nested vectors: `m[row][col]`.
pub type Mat = Vec<Vec<f64>>;

#[derive(Debug, Clone, Default)]
pub struct GateParams {
    pub wx: Mat,
    pub wh: Mat,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct LstmParams {
    pub input: GateParams,
    pub forget: GateParams,
    pub cell: GateParams,
    pub output: GateParams,
}

#[derive(Debug, Clone)]
pub struct ConvBank {
    pub width: usize,
    /// `m x (width * word_dim)` filter matrix.
    pub weight: Mat,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MemnetHop {
    /// Maps a sentence vector to its memory vector.
    pub input_embed: Mat,
    /// Maps a sentence vector to its output vector.
    pub output_embed: Mat,
}

#[derive(Debug, Clone, Default)]
pub struct MemnetParams {
    /// Query transform applied to the recurrent document embedding.
    pub query: Mat,
    pub hops: Vec<MemnetHop>,
}

#[derive(Debug, Clone, Default)]
pub struct DecoderParams {
    pub lstm: LstmParams,
    pub init_w: Mat,
    pub init_b: Vec<f64>,
    pub hidden_w: Mat,
    pub hidden_b: Vec<f64>,
    pub out_w: Vec<f64>,
    pub out_b: f64,
}

/// Inputs and parameters for one [`scalar_forward`] call. Populate the fields
/// the chosen fragment needs and leave the rest at their defaults.
#[derive(Debug, Clone, Default)]
pub struct FragmentCase {
    pub tokens: Vec<usize>,
    pub pad_id: usize,
    pub embedding: Option<Mat>,
    pub banks: Vec<ConvBank>,
    pub lstm: Option<LstmParams>,
    pub lstm_bwd: Option<LstmParams>,
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub memnet: Option<MemnetParams>,
    pub decoder: Option<DecoderParams>,
    pub sentvecs: Vec<Vec<f64>>,
    pub enc_states: Vec<Vec<f64>>,
    pub d_prime: Vec<f64>,
    pub d_f: Vec<f64>,
    pub teacher: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FragmentOutput {
    Vector(Vec<f64>),
    CellState { hidden: Vec<f64>, cell: Vec<f64> },
    Sequence { hidden: Vec<Vec<f64>>, summary: Vec<f64> },
    Memory { output: Vec<f64>, attention: Vec<Vec<f64>> },
    Scores(Vec<f64>),
}

/// Dispatch a fragment evaluation by name. Known ids: `sentence_encoder`,
/// `lstm_cell`, `recurrent_lstm`, `recurrent_blstm`, `memnet`, `decoder`.
pub fn scalar_forward(fragment: &str, case: &FragmentCase) -> Result<FragmentOutput, OracleError> {
    match fragment {
        "sentence_encoder" => {
            let embedding = require(case.embedding.as_ref(), "sentence_encoder", "embedding")?;
            Ok(FragmentOutput::Vector(sentence_encoder(
                embedding,
                &case.banks,
                &case.tokens,
                case.pad_id,
            )))
        }
        "lstm_cell" => {
            let lstm = require(case.lstm.as_ref(), "lstm_cell", "lstm")?;
            let (hidden, cell) = lstm_cell(lstm, &case.x, &case.h, &case.c);
            Ok(FragmentOutput::CellState { hidden, cell })
        }
        "recurrent_lstm" => {
            let lstm = require(case.lstm.as_ref(), "recurrent_lstm", "lstm")?;
            let (hidden, summary) = lstm_sequence(lstm, &case.sentvecs);
            Ok(FragmentOutput::Sequence { hidden, summary })
        }
        "recurrent_blstm" => {
            let fwd = require(case.lstm.as_ref(), "recurrent_blstm", "lstm")?;
            let bwd = require(case.lstm_bwd.as_ref(), "recurrent_blstm", "lstm_bwd")?;
            let (hidden, summary) = blstm_sequence(fwd, bwd, &case.sentvecs);
            Ok(FragmentOutput::Sequence { hidden, summary })
        }
        "memnet" => {
            let memnet = require(case.memnet.as_ref(), "memnet", "memnet")?;
            let (output, attention) = memnet_encode(memnet, &case.sentvecs, &case.d_prime);
            Ok(FragmentOutput::Memory { output, attention })
        }
        "decoder" => {
            let decoder = require(case.decoder.as_ref(), "decoder", "decoder")?;
            Ok(FragmentOutput::Scores(decode(
                decoder,
                &case.sentvecs,
                &case.enc_states,
                &case.d_f,
                case.teacher.as_deref(),
            )))
        }
        other => Err(OracleError::UnknownFragment(other.to_string())),
    }
}

fn require<'a, T>(
    value: Option<&'a T>,
    fragment: &'static str,
    field: &'static str,
) -> Result<&'a T, OracleError> {
    value.ok_or(OracleError::IncompleteCase { fragment, field })
}

/// Multi-width convolutional sentence encoder: for every bank, slide a window
/// over the padded token sequence, apply `tanh(W . window + b)`, take the
/// per-feature maximum over window positions, and sum the pooled vectors.
///
/// Trailing `pad_id` tokens are stripped first, then the sequence is
/// right-padded to the widest bank so every width has at least one window.
pub fn sentence_encoder(embedding: &Mat, banks: &[ConvBank], tokens: &[usize], pad_id: usize) -> Vec<f64> {
    let mut ids: Vec<usize> = tokens.to_vec();
    while ids.last() == Some(&pad_id) {
        ids.pop();
    }
    assert!(!ids.is_empty(), "sentence has no non-pad tokens");
    let max_width = banks.iter().map(|b| b.width).max().unwrap_or(1);
    while ids.len() < max_width {
        ids.push(pad_id);
    }

    let feature_dim = banks[0].bias.len();
    let mut sentence = vec![0.0; feature_dim];
    for bank in banks {
        let positions = ids.len() - bank.width + 1;
        let mut pooled = vec![f64::NEG_INFINITY; feature_dim];
        for start in 0..positions {
            let window: Vec<f64> = ids[start..start + bank.width]
                .iter()
                .flat_map(|&id| embedding[id].iter().copied())
                .collect();
            for row in 0..feature_dim {
                let mut acc = bank.bias[row];
                for (wj, xj) in bank.weight[row].iter().zip(&window) {
                    acc += wj * xj;
                }
                let feature = acc.tanh();
                if feature > pooled[row] {
                    pooled[row] = feature;
                }
            }
        }
        for (s, p) in sentence.iter_mut().zip(&pooled) {
            *s += p;
        }
    }
    sentence
}

/// One step of the standard LSTM cell.
pub fn lstm_cell(p: &LstmParams, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let i = gate(&p.input, x, h, sigmoid);
    let f = gate(&p.forget, x, h, sigmoid);
    let g = gate(&p.cell, x, h, f64::tanh);
    let o = gate(&p.output, x, h, sigmoid);
    let mut new_c = vec![0.0; c.len()];
    let mut new_h = vec![0.0; c.len()];
    for j in 0..c.len() {
        new_c[j] = f[j] * c[j] + i[j] * g[j];
        new_h[j] = o[j] * new_c[j].tanh();
    }
    (new_h, new_c)
}

fn gate(p: &GateParams, x: &[f64], h: &[f64], act: fn(f64) -> f64) -> Vec<f64> {
    let hidden = p.b.len();
    let mut out = vec![0.0; hidden];
    for row in 0..hidden {
        let mut acc = p.b[row];
        for (w, v) in p.wx[row].iter().zip(x) {
            acc += w * v;
        }
        for (w, v) in p.wh[row].iter().zip(h) {
            acc += w * v;
        }
        out[row] = act(acc);
    }
    out
}

/// Unidirectional pass with zero initial states. Returns the per-step hidden
/// states and the final hidden state.
pub fn lstm_sequence(p: &LstmParams, inputs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let hidden_dim = p.input.b.len();
    let mut h = vec![0.0; hidden_dim];
    let mut c = vec![0.0; hidden_dim];
    let mut states = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (nh, nc) = lstm_cell(p, x, &h, &c);
        h = nh;
        c = nc;
        states.push(h.clone());
    }
    (states.clone(), states.last().cloned().unwrap_or(h))
}

/// Bidirectional pass: per-step states are `concat(fwd_t, bwd_t)` and the
/// summary is `concat(final fwd, final bwd)`.
pub fn blstm_sequence(
    fwd: &LstmParams,
    bwd: &LstmParams,
    inputs: &[Vec<f64>],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (fwd_states, _) = lstm_sequence(fwd, inputs);
    let reversed: Vec<Vec<f64>> = inputs.iter().rev().cloned().collect();
    let (bwd_rev, _) = lstm_sequence(bwd, &reversed);
    let n = inputs.len();
    let mut states = Vec::with_capacity(n);
    for t in 0..n {
        let mut joint = fwd_states[t].clone();
        joint.extend_from_slice(&bwd_rev[n - 1 - t]);
        states.push(joint);
    }
    let mut summary = fwd_states[n - 1].clone();
    summary.extend_from_slice(&bwd_rev[n - 1]);
    (states, summary)
}

/// Stacked memory hops: transform sentences into memory/output vectors, match
/// the query against each memory by inner product and softmax, aggregate the
/// output vectors by those weights, and add the result into the query. The
/// returned vector is the last hop's aggregate; attention weights for every
/// hop ride along.
pub fn memnet_encode(
    p: &MemnetParams,
    sentvecs: &[Vec<f64>],
    d_prime: &[f64],
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut u = matvec(&p.query, d_prime);
    let mut attention = Vec::with_capacity(p.hops.len());
    let mut output = vec![0.0; d_prime.len()];
    for hop in &p.hops {
        let memories: Vec<Vec<f64>> = sentvecs.iter().map(|s| matvec(&hop.input_embed, s)).collect();
        let outputs: Vec<Vec<f64>> = sentvecs.iter().map(|s| matvec(&hop.output_embed, s)).collect();
        let logits: Vec<f64> = memories.iter().map(|m| dot(&u, m)).collect();
        let probs = softmax(&logits);
        output = vec![0.0; u.len()];
        for (pi, ci) in probs.iter().zip(&outputs) {
            for (acc, cj) in output.iter_mut().zip(ci) {
                *acc += pi * cj;
            }
        }
        for (uj, oj) in u.iter_mut().zip(&output) {
            *uj += oj;
        }
        attention.push(probs);
    }
    (output, attention)
}

/// Sequential sentence scorer. The step-t input is the previous certainty
/// times the previous sentence vector; with `teacher` given the certainty is
/// the gold label, otherwise the previous predicted score.
pub fn decode(
    p: &DecoderParams,
    sentvecs: &[Vec<f64>],
    enc_states: &[Vec<f64>],
    d_f: &[f64],
    teacher: Option<&[u8]>,
) -> Vec<f64> {
    let hidden_dim = p.init_b.len();
    let sent_dim = sentvecs.first().map_or(0, Vec::len);
    let mut h: Vec<f64> = matvec(&p.init_w, d_f)
        .iter()
        .zip(&p.init_b)
        .map(|(v, b)| (v + b).tanh())
        .collect();
    let mut c = vec![0.0; hidden_dim];
    let mut prev_certainty = 1.0;
    let mut prev_sentence = vec![0.0; sent_dim];
    let mut scores = Vec::with_capacity(sentvecs.len());
    for (t, (s_t, enc)) in sentvecs.iter().zip(enc_states).enumerate() {
        let x: Vec<f64> = prev_sentence.iter().map(|v| v * prev_certainty).collect();
        let (nh, nc) = lstm_cell(&p.lstm, &x, &h, &c);
        h = nh;
        c = nc;
        let mut joint = h.clone();
        joint.extend_from_slice(enc);
        let hidden: Vec<f64> = matvec(&p.hidden_w, &joint)
            .iter()
            .zip(&p.hidden_b)
            .map(|(v, b)| (v + b).tanh())
            .collect();
        let logit = dot(&p.out_w, &hidden) + p.out_b;
        let score = sigmoid(logit);
        scores.push(score);
        prev_certainty = match teacher {
            Some(labels) => labels[t] as f64,
            None => score,
        };
        prev_sentence = s_t.clone();
    }
    scores
}

fn matvec(m: &Mat, v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_lstm(input: usize, hidden: usize) -> LstmParams {
        let gate = GateParams {
            wx: vec![vec![0.0; input]; hidden],
            wh: vec![vec![0.0; hidden]; hidden],
            b: vec![0.0; hidden],
        };
        LstmParams {
            input: gate.clone(),
            forget: gate.clone(),
            cell: gate.clone(),
            output: gate,
        }
    }

    #[test]
    fn unknown_fragment_is_an_error() {
        let err = scalar_forward("nonsense", &FragmentCase::default()).unwrap_err();
        assert!(matches!(err, OracleError::UnknownFragment(_)));
    }

    #[test]
    fn zero_weight_lstm_cell_gives_zero_hidden() {
        let case = FragmentCase {
            lstm: Some(zero_lstm(3, 2)),
            x: vec![0.4, -0.2, 0.9],
            h: vec![0.0, 0.0],
            c: vec![0.0, 0.0],
            ..Default::default()
        };
        match scalar_forward("lstm_cell", &case).unwrap() {
            FragmentOutput::CellState { hidden, cell } => {
                assert_eq!(hidden, vec![0.0, 0.0]);
                assert_eq!(cell, vec![0.0, 0.0]);
            }
            other => panic!("unexpected output {other:?}"),
        }
    }

    #[test]
    fn memnet_single_sentence_attends_fully() {
        let p = MemnetParams {
            query: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            hops: vec![MemnetHop {
                input_embed: vec![vec![0.3, -0.1], vec![0.2, 0.5]],
                output_embed: vec![vec![1.0, 2.0], vec![-1.0, 0.5]],
            }],
        };
        let (output, attention) = memnet_encode(&p, &[vec![0.7, -0.4]], &[0.1, 0.2]);
        assert_eq!(attention, vec![vec![1.0]]);
        // p = [1], so the hop output is just the transformed sentence.
        assert!((output[0] - (0.7 - 0.8)).abs() < 1e-15);
        assert!((output[1] - (-0.7 - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn decoder_zero_mlp_scores_half() {
        let p = DecoderParams {
            lstm: zero_lstm(2, 2),
            init_w: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            init_b: vec![0.0, 0.0],
            hidden_w: vec![vec![0.0; 4]; 3],
            hidden_b: vec![0.0; 3],
            out_w: vec![0.0; 3],
            out_b: 0.0,
        };
        let sentvecs = vec![vec![0.5, -0.5], vec![0.2, 0.8]];
        let states = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        let scores = decode(&p, &sentvecs, &states, &[0.0, 0.0], None);
        assert_eq!(scores, vec![0.5, 0.5]);
    }
}

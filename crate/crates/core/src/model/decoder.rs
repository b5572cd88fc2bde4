use super::{names, ModelDims, ModelError};
use crate::autodiff::{Graph, ParamStore, TensorId};

/// Sequential sentence scorer. The decoder LSTM starts from
/// `tanh(W_init . d_f + b_init)` with a zero cell state; its step-t input is
/// the previous certainty times the previous sentence vector, with certainty
/// 1 and a zero vector before the first sentence. Each score is
/// `sigmoid(MLP(decoder_state : encoder_state))` with one tanh hidden layer.
/// Teacher forcing uses the gold labels as certainties; otherwise the
/// previous predicted score feeds back.
pub fn decode(
    g: &mut Graph,
    store: &ParamStore,
    dims: &ModelDims,
    sentvecs: &[TensorId],
    enc_states: &[TensorId],
    d_f: TensorId,
    teacher: Option<&[u8]>,
) -> Result<Vec<TensorId>, ModelError> {
    if sentvecs.len() != enc_states.len() {
        return Err(ModelError::LengthMismatch {
            what: "encoder states",
            left: enc_states.len(),
            right: sentvecs.len(),
        });
    }
    if let Some(labels) = teacher {
        if labels.len() != sentvecs.len() {
            return Err(ModelError::LengthMismatch {
                what: "teacher labels",
                left: labels.len(),
                right: sentvecs.len(),
            });
        }
    }

    let init_w = g.param(store, names::DEC_INIT_W)?;
    let init_b = g.param(store, names::DEC_INIT_B)?;
    let projected = g.matvec(init_w, d_f)?;
    let shifted = g.add(projected, init_b)?;
    let mut h = g.tanh(shifted);
    let mut c = g.zeros(vec![dims.doc_dim]);

    let mlp_w1 = g.param(store, names::DEC_MLP_W1)?;
    let mlp_b1 = g.param(store, names::DEC_MLP_B1)?;
    let mlp_w2 = g.param(store, names::DEC_MLP_W2)?;
    let mlp_b2 = g.param(store, names::DEC_MLP_B2)?;

    let mut scores: Vec<TensorId> = Vec::with_capacity(sentvecs.len());
    for t in 0..sentvecs.len() {
        let x = if t == 0 {
            // certainty 1 times the zero vector before the first sentence
            g.zeros(vec![dims.sent_dim])
        } else {
            match teacher {
                Some(labels) => g.scale(sentvecs[t - 1], labels[t - 1] as f64),
                None => g.scale_by(scores[t - 1], sentvecs[t - 1])?,
            }
        };
        let (nh, nc) = super::lstm_cell(g, store, names::DEC_LSTM, x, h, c)?;
        h = nh;
        c = nc;
        let joint = g.concat(&[h, enc_states[t]])?;
        let hidden_pre = g.matvec(mlp_w1, joint)?;
        let hidden_shifted = g.add(hidden_pre, mlp_b1)?;
        let hidden = g.tanh(hidden_shifted);
        let logit_pre = g.matvec(mlp_w2, hidden)?;
        let logit = g.add(logit_pre, mlp_b2)?;
        scores.push(g.sigmoid(logit));
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;
    use crate::model::{init_params, EncoderMode};

    fn dims() -> ModelDims {
        ModelDims {
            vocab: 6,
            word_dim: 3,
            sent_dim: 4,
            doc_dim: 4,
            kernel_widths: vec![1, 2],
            hops: 1,
            mlp_hidden: 3,
            encoder_mode: EncoderMode::Lstm,
        }
    }

    fn inputs(g: &mut Graph, n: usize, seed: f64) -> (Vec<TensorId>, Vec<TensorId>, TensorId) {
        let sentvecs: Vec<TensorId> = (0..n)
            .map(|i| {
                let base = seed + i as f64 * 0.1;
                g.constant(Tensor::vector(vec![base, -base, base / 2.0, 0.3]))
            })
            .collect();
        let states: Vec<TensorId> = (0..n)
            .map(|i| {
                let base = 0.05 + i as f64 * 0.07;
                g.constant(Tensor::vector(vec![base, base, -base, base]))
            })
            .collect();
        let d_f = g.constant(Tensor::vector(vec![0.4, -0.2, 0.1, 0.6]));
        (sentvecs, states, d_f)
    }

    #[test]
    fn zero_mlp_weights_score_half_everywhere() {
        let d = dims();
        let mut store = init_params(&d, 0.05, 11).unwrap();
        for name in [names::DEC_MLP_W1, names::DEC_MLP_B1, names::DEC_MLP_W2, names::DEC_MLP_B2] {
            store
                .get_mut(name)
                .unwrap()
                .data_mut()
                .iter_mut()
                .for_each(|v| *v = 0.0);
        }
        let mut g = Graph::new();
        let (sentvecs, states, d_f) = inputs(&mut g, 3, 0.2);
        let scores = decode(&mut g, &store, &d, &sentvecs, &states, d_f, None).unwrap();
        for id in scores {
            assert_eq!(g.scalar_value(id), 0.5);
        }
    }

    #[test]
    fn all_zero_teacher_labels_ignore_sentence_vectors() {
        // With p_{t-1} = 0 the decoder input is the zero vector at every
        // step, so swapping the sentence vectors cannot change the scores.
        let d = dims();
        let store = init_params(&d, 0.05, 12).unwrap();
        let labels = vec![0u8; 3];

        let mut g1 = Graph::new();
        let (sv1, st1, df1) = inputs(&mut g1, 3, 0.2);
        let s1 = decode(&mut g1, &store, &d, &sv1, &st1, df1, Some(&labels)).unwrap();

        let mut g2 = Graph::new();
        let (sv2, st2, df2) = inputs(&mut g2, 3, 0.9);
        // Keep states and d_f identical; only sentence vectors differ.
        let (_, st1b, df1b) = inputs(&mut g2, 3, 0.2);
        let _ = (st2, df2);
        let s2 = decode(&mut g2, &store, &d, &sv2, &st1b, df1b, Some(&labels)).unwrap();

        for (a, b) in s1.iter().zip(&s2) {
            assert_eq!(g1.scalar_value(*a).to_bits(), g2.scalar_value(*b).to_bits());
        }
    }

    #[test]
    fn scores_depend_only_on_the_prefix_in_teacher_mode() {
        let d = dims();
        let store = init_params(&d, 0.05, 13).unwrap();
        let labels = vec![1u8, 0, 1, 1];

        let mut g1 = Graph::new();
        let (sv, st, df) = inputs(&mut g1, 4, 0.3);
        let full = decode(&mut g1, &store, &d, &sv, &st, df, Some(&labels)).unwrap();

        let mut g2 = Graph::new();
        let (sv2, st2, df2) = inputs(&mut g2, 4, 0.3);
        let truncated =
            decode(&mut g2, &store, &d, &sv2[..2], &st2[..2], df2, Some(&labels[..2])).unwrap();

        for t in 0..2 {
            assert_eq!(
                g1.scalar_value(full[t]).to_bits(),
                g2.scalar_value(truncated[t]).to_bits()
            );
        }
    }

    #[test]
    fn scores_stay_in_unit_interval_under_scaled_embeddings() {
        let d = dims();
        let store = init_params(&d, 0.05, 14).unwrap();
        for factor in [1e3, -1e3] {
            let mut g = Graph::new();
            let (sv, st, _) = inputs(&mut g, 3, 0.25);
            let d_f = g.constant(Tensor::vector(vec![0.4 * factor, -0.2 * factor, 0.1, 0.6]));
            let scores = decode(&mut g, &store, &d, &sv, &st, d_f, None).unwrap();
            for id in scores {
                let v = g.scalar_value(id);
                assert!(v.is_finite() && v > 0.0 && v < 1.0, "score {v}");
            }
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let d = dims();
        let store = init_params(&d, 0.05, 15).unwrap();
        let mut g = Graph::new();
        let (sv, st, df) = inputs(&mut g, 3, 0.2);
        let err = decode(&mut g, &store, &d, &sv, &st[..2], df, None).unwrap_err();
        assert!(matches!(err, ModelError::LengthMismatch { what: "encoder states", .. }));
        let err = decode(&mut g, &store, &d, &sv, &st, df, Some(&[1u8, 0])).unwrap_err();
        assert!(matches!(err, ModelError::LengthMismatch { what: "teacher labels", .. }));
    }
}

use super::{names, ModelDims, ModelError};
use crate::autodiff::{Graph, ParamStore, TensorId};
use crate::text::PAD_ID;

/// Convolutional sentence encoder. For every kernel width, each window of
/// concatenated word vectors goes through `tanh(W . window + b)`, the feature
/// map is max-pooled over window positions, and the per-width pooled vectors
/// are summed elementwise into one sentence vector.
///
/// Trailing PAD tokens are stripped, then the sequence is right-padded with
/// PAD to the widest kernel so every width has at least one window. The PAD
/// embedding row is zero by construction.
pub fn encode_sentence(
    g: &mut Graph,
    store: &ParamStore,
    dims: &ModelDims,
    tokens: &[usize],
) -> Result<TensorId, ModelError> {
    let mut ids: Vec<usize> = tokens.to_vec();
    while ids.last() == Some(&PAD_ID) {
        ids.pop();
    }
    if ids.is_empty() {
        return Err(ModelError::EmptySentence);
    }
    let max_width = dims.kernel_widths.iter().copied().max().unwrap_or(1);
    while ids.len() < max_width {
        ids.push(PAD_ID);
    }
    let length = ids.len();

    let embedding = g.param(store, names::WORD_EMBEDDING)?;
    let embedded = g.embed_rows(embedding, &ids)?;
    let word_vecs: Vec<TensorId> = (0..length)
        .map(|i| g.row(embedded, i))
        .collect::<Result<_, _>>()?;

    let mut sentence: Option<TensorId> = None;
    for &width in &dims.kernel_widths {
        let weight = g.param(store, &names::conv_weight(width))?;
        let bias = g.param(store, &names::conv_bias(width))?;
        let mut features = Vec::with_capacity(length - width + 1);
        for start in 0..=(length - width) {
            let window = if width == 1 {
                word_vecs[start]
            } else {
                g.concat(&word_vecs[start..start + width])?
            };
            let affine = g.matvec(weight, window)?;
            let shifted = g.add(affine, bias)?;
            features.push(g.tanh(shifted));
        }
        let feature_map = g.stack_cols(&features)?;
        let pooled = g.max_over_time(feature_map)?;
        sentence = Some(match sentence {
            None => pooled,
            Some(acc) => g.add(acc, pooled)?,
        });
    }
    Ok(sentence.expect("at least one kernel width"))
}

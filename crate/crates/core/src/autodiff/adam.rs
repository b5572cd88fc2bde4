use indexmap::IndexMap;

use super::params::ParamStore;
use super::tensor::Tensor;
use super::AutodiffError;

/// Per-parameter Adam accumulators plus the shared hyperparameters. The step
/// counter starts at zero and increases by one per update.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    pub fn new(len: usize, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> AdamState {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            beta1,
            beta2,
            epsilon,
            learning_rate,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update. The parameter's gradient is read but left
/// untouched; the caller resets gradients explicitly.
pub fn adam_step(
    name: &str,
    param: &mut Tensor,
    state: &mut AdamState,
) -> Result<(), AutodiffError> {
    let grad = param
        .grad
        .as_ref()
        .ok_or_else(|| AutodiffError::MissingGrad(name.to_string()))?;
    if state.m.len() != grad.len() {
        return Err(AutodiffError::StateSizeMismatch {
            name: name.to_string(),
            state_len: state.m.len(),
            param_len: grad.len(),
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let bias1 = 1.0 - state.beta1.powi(t);
    let bias2 = 1.0 - state.beta2.powi(t);
    let grad = grad.clone();
    for (((value, g), m), v) in param
        .data_mut()
        .iter_mut()
        .zip(&grad)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *value -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

/// Adam over a whole [`ParamStore`], creating per-parameter state lazily in
/// store order.
#[derive(Debug, Clone)]
pub struct AdamOptimizer {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    states: IndexMap<String, AdamState>,
}

impl AdamOptimizer {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> AdamOptimizer {
        AdamOptimizer {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            states: IndexMap::new(),
        }
    }

    pub fn step(&mut self, store: &mut ParamStore) -> Result<(), AutodiffError> {
        for (name, tensor) in store.iter_mut() {
            let state = self.states.entry(name.to_string()).or_insert_with(|| {
                AdamState::new(
                    tensor.numel(),
                    self.learning_rate,
                    self.beta1,
                    self.beta2,
                    self.epsilon,
                )
            });
            adam_step(name, tensor, state)?;
        }
        Ok(())
    }
}

/// Scale all gradients so the global L2 norm does not exceed `max_norm`.
/// Returns the pre-clip norm. Parameters without gradients contribute zero.
pub fn clip_global_norm(store: &mut ParamStore, max_norm: f64) -> f64 {
    let mut squared = 0.0;
    for (_, tensor) in store.iter() {
        if let Some(grad) = &tensor.grad {
            squared += grad.iter().map(|g| g * g).sum::<f64>();
        }
    }
    let norm = squared.sqrt();
    if norm > max_norm && norm > 0.0 {
        let factor = max_norm / norm;
        for (_, tensor) in store.iter_mut() {
            if let Some(grad) = &mut tensor.grad {
                grad.iter_mut().for_each(|g| *g *= factor);
            }
        }
    }
    norm
}

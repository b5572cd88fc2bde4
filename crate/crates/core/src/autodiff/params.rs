use indexmap::IndexMap;

use super::tensor::Tensor;
use super::AutodiffError;

/// Named collection of learnable tensors. Insertion order is stable, which
/// makes flattening, checkpointing, and seeded initialization deterministic.
/// Gradients accumulate across backward passes until [`ParamStore::reset_grads`]
/// is called.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: IndexMap<String, Tensor>,
}

impl ParamStore {
    pub fn new() -> ParamStore {
        ParamStore::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, mut tensor: Tensor) {
        let name = name.into();
        tensor.requires_grad = true;
        let previous = self.entries.insert(name.clone(), tensor);
        assert!(previous.is_none(), "duplicate parameter `{name}`");
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.entries.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar values across all parameters.
    pub fn numel(&self) -> usize {
        self.entries.values().map(Tensor::numel).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.entries.iter_mut().map(|(n, t)| (n.as_str(), t))
    }

    pub fn accumulate_grad(&mut self, name: &str, grad: &[f64]) -> Result<(), AutodiffError> {
        let tensor = self
            .entries
            .get_mut(name)
            .ok_or_else(|| AutodiffError::UnknownParam(name.to_string()))?;
        debug_assert_eq!(tensor.numel(), grad.len());
        for (slot, &g) in tensor.grad_mut().iter_mut().zip(grad) {
            *slot += g;
        }
        Ok(())
    }

    /// Explicit gradient reset: zero every allocated slot. Parameters that
    /// have never received a gradient keep `grad == None`.
    pub fn reset_grads(&mut self) {
        for tensor in self.entries.values_mut() {
            tensor.reset_grad();
        }
    }

    /// Zero the gradient of one row of a matrix parameter, keeping that row
    /// out of optimizer updates.
    pub fn zero_grad_row(&mut self, name: &str, row: usize) -> Result<(), AutodiffError> {
        let tensor = self
            .entries
            .get_mut(name)
            .ok_or_else(|| AutodiffError::UnknownParam(name.to_string()))?;
        let (rows, cols) = tensor.dims2().ok_or(AutodiffError::NotAMatrix {
            op: "zero_grad_row",
            shape: tensor.shape().to_vec(),
        })?;
        if row >= rows {
            return Err(AutodiffError::RowOutOfRange {
                row,
                shape: vec![rows, cols],
            });
        }
        if let Some(grad) = &mut tensor.grad {
            grad[row * cols..(row + 1) * cols]
                .iter_mut()
                .for_each(|g| *g = 0.0);
        }
        Ok(())
    }

    /// All parameter values concatenated in insertion order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.numel());
        for tensor in self.entries.values() {
            out.extend_from_slice(tensor.data());
        }
        out
    }

    /// All gradients concatenated in insertion order; missing slots read as
    /// zeros.
    pub fn flatten_grads(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.numel());
        for tensor in self.entries.values() {
            match &tensor.grad {
                Some(g) => out.extend_from_slice(g),
                None => out.extend(std::iter::repeat_n(0.0, tensor.numel())),
            }
        }
        out
    }

    /// Overwrite all parameter values from a flat slice laid out as
    /// [`ParamStore::flatten`] produces.
    pub fn unflatten(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.numel(), "flat length mismatch");
        let mut offset = 0;
        for tensor in self.entries.values_mut() {
            let n = tensor.numel();
            tensor.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
    }
}

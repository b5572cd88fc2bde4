use std::collections::HashMap;

use super::params::ParamStore;
use super::tensor::Tensor;
use super::AutodiffError;

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorId(pub(crate) usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Matmul(TensorId, TensorId),
    Matvec(TensorId, TensorId),
    Dot(TensorId, TensorId),
    Add(TensorId, TensorId),
    Sub(TensorId, TensorId),
    Mul(TensorId, TensorId),
    Tanh(TensorId),
    Sigmoid(TensorId),
    Ln(TensorId),
    Clamp { input: TensorId, lo: f64, hi: f64 },
    Scale { input: TensorId, factor: f64 },
    ScaleBy { scalar: TensorId, input: TensorId },
    Softmax(TensorId),
    MaxOverTime(TensorId),
    Concat(Vec<TensorId>),
    StackCols(Vec<TensorId>),
    EmbedRows { matrix: TensorId, ids: Vec<usize> },
    Row { matrix: TensorId, row: usize },
    Sum(TensorId),
}

struct Node {
    op: Op,
    tensor: Tensor,
    param: Option<String>,
}

/// Define-by-run computation record. Nodes are appended in execution order,
/// so every node's inputs precede it and one reverse sweep visits each node
/// exactly once. A graph is built per forward pass and confined to a single
/// execution context.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    bound: HashMap<String, TensorId>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Register a tensor as a leaf. Its `requires_grad` flag decides whether
    /// backward fills its gradient.
    pub fn input(&mut self, tensor: Tensor) -> TensorId {
        self.push(Op::Leaf, tensor, None)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, tensor: Tensor) -> TensorId {
        let mut t = tensor;
        t.requires_grad = false;
        self.push(Op::Leaf, t, None)
    }

    pub fn zeros(&mut self, shape: Vec<usize>) -> TensorId {
        self.constant(Tensor::zeros(shape))
    }

    /// Bind a named parameter from the store as a differentiable leaf. The
    /// same name binds to the same node within one graph, so fan-out
    /// gradients accumulate correctly.
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Result<TensorId, AutodiffError> {
        if let Some(&id) = self.bound.get(name) {
            return Ok(id);
        }
        let tensor = store
            .get(name)
            .ok_or_else(|| AutodiffError::UnknownParam(name.to_string()))?;
        let mut leaf = tensor.clone();
        leaf.requires_grad = true;
        leaf.grad = None;
        let id = self.push(Op::Leaf, leaf, Some(name.to_string()));
        self.bound.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn tensor(&self, id: TensorId) -> &Tensor {
        &self.nodes[id.0].tensor
    }

    pub fn data(&self, id: TensorId) -> &[f64] {
        self.nodes[id.0].tensor.data()
    }

    pub fn shape(&self, id: TensorId) -> &[usize] {
        self.nodes[id.0].tensor.shape()
    }

    /// Value of a single-element tensor.
    pub fn scalar_value(&self, id: TensorId) -> f64 {
        debug_assert!(self.nodes[id.0].tensor.is_scalar());
        self.nodes[id.0].tensor.data()[0]
    }

    pub fn grad(&self, id: TensorId) -> Option<&[f64]> {
        self.nodes[id.0].tensor.grad.as_deref()
    }

    fn push(&mut self, op: Op, tensor: Tensor, param: Option<String>) -> TensorId {
        let id = TensorId(self.nodes.len());
        self.nodes.push(Node { op, tensor, param });
        id
    }

    fn derive(&mut self, op: Op, shape: Vec<usize>, data: Vec<f64>, inputs: &[TensorId]) -> TensorId {
        let requires = inputs
            .iter()
            .any(|i| self.nodes[i.0].tensor.requires_grad);
        let mut tensor = Tensor::new(shape, data);
        tensor.requires_grad = requires;
        self.push(op, tensor, None)
    }

    fn dims2(&self, op: &'static str, id: TensorId) -> Result<(usize, usize), AutodiffError> {
        self.nodes[id.0].tensor.dims2().ok_or(AutodiffError::NotAMatrix {
            op,
            shape: self.shape(id).to_vec(),
        })
    }

    fn check_same_shape(
        &self,
        op: &'static str,
        a: TensorId,
        b: TensorId,
    ) -> Result<(), AutodiffError> {
        if self.shape(a) != self.shape(b) {
            return Err(AutodiffError::ShapeMismatch {
                op,
                lhs: self.shape(a).to_vec(),
                rhs: self.shape(b).to_vec(),
            });
        }
        Ok(())
    }

    // ---- forward operations -------------------------------------------------

    /// Matrix product `[m x k] . [k x n] -> [m x n]`. The gradient rules
    /// `da = g . b^T` and `db = a^T . g` are applied in backward.
    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, AutodiffError> {
        let (m, k) = self.dims2("matmul", a)?;
        let (k2, n) = self.dims2("matmul", b)?;
        if k != k2 {
            return Err(AutodiffError::ShapeMismatch {
                op: "matmul",
                lhs: vec![m, k],
                rhs: vec![k2, n],
            });
        }
        let ad = self.data(a);
        let bd = self.data(b);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let arow = &ad[i * k..(i + 1) * k];
            let orow = &mut out[i * n..(i + 1) * n];
            for (p, &av) in arow.iter().enumerate() {
                if av != 0.0 {
                    let brow = &bd[p * n..(p + 1) * n];
                    for (o, &bv) in orow.iter_mut().zip(brow) {
                        *o += av * bv;
                    }
                }
            }
        }
        Ok(self.derive(Op::Matmul(a, b), vec![m, n], out, &[a, b]))
    }

    /// Matrix-vector product `[m x k] . [k] -> [m]`.
    pub fn matvec(&mut self, a: TensorId, x: TensorId) -> Result<TensorId, AutodiffError> {
        let (m, k) = self.dims2("matvec", a)?;
        let xs = self.shape(x);
        if xs != [k] {
            return Err(AutodiffError::ShapeMismatch {
                op: "matvec",
                lhs: vec![m, k],
                rhs: xs.to_vec(),
            });
        }
        let ad = self.data(a);
        let xd = self.data(x);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let row = &ad[i * k..(i + 1) * k];
            out[i] = row.iter().zip(xd).map(|(w, v)| w * v).sum();
        }
        Ok(self.derive(Op::Matvec(a, x), vec![m], out, &[a, x]))
    }

    /// Inner product of two equal-length vectors, producing a scalar.
    pub fn dot(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, AutodiffError> {
        self.check_same_shape("dot", a, b)?;
        let value: f64 = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x * y).sum();
        Ok(self.derive(Op::Dot(a, b), vec![1], vec![value], &[a, b]))
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, AutodiffError> {
        self.check_same_shape("add", a, b)?;
        let data = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(x, y)| x + y)
            .collect();
        Ok(self.derive(Op::Add(a, b), self.shape(a).to_vec(), data, &[a, b]))
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, AutodiffError> {
        self.check_same_shape("sub", a, b)?;
        let data = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(x, y)| x - y)
            .collect();
        Ok(self.derive(Op::Sub(a, b), self.shape(a).to_vec(), data, &[a, b]))
    }

    /// Pointwise product of equal-shape tensors.
    pub fn mul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, AutodiffError> {
        self.check_same_shape("mul", a, b)?;
        let data = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(x, y)| x * y)
            .collect();
        Ok(self.derive(Op::Mul(a, b), self.shape(a).to_vec(), data, &[a, b]))
    }

    pub fn tanh(&mut self, a: TensorId) -> TensorId {
        let data = self.data(a).iter().map(|x| x.tanh()).collect();
        self.derive(Op::Tanh(a), self.shape(a).to_vec(), data, &[a])
    }

    pub fn sigmoid(&mut self, a: TensorId) -> TensorId {
        let data = self.data(a).iter().map(|x| 1.0 / (1.0 + (-x).exp())).collect();
        self.derive(Op::Sigmoid(a), self.shape(a).to_vec(), data, &[a])
    }

    pub fn ln(&mut self, a: TensorId) -> TensorId {
        let data = self.data(a).iter().map(|x| x.ln()).collect();
        self.derive(Op::Ln(a), self.shape(a).to_vec(), data, &[a])
    }

    /// Pointwise clamp into `[lo, hi]`; gradient passes through wherever the
    /// input is inside the interval.
    pub fn clamp(&mut self, a: TensorId, lo: f64, hi: f64) -> TensorId {
        let data = self.data(a).iter().map(|x| x.clamp(lo, hi)).collect();
        self.derive(
            Op::Clamp { input: a, lo, hi },
            self.shape(a).to_vec(),
            data,
            &[a],
        )
    }

    pub fn scale(&mut self, a: TensorId, factor: f64) -> TensorId {
        let data = self.data(a).iter().map(|x| x * factor).collect();
        self.derive(
            Op::Scale { input: a, factor },
            self.shape(a).to_vec(),
            data,
            &[a],
        )
    }

    /// Multiply a tensor by a scalar node (single-element tensor).
    pub fn scale_by(&mut self, scalar: TensorId, a: TensorId) -> Result<TensorId, AutodiffError> {
        if !self.nodes[scalar.0].tensor.is_scalar() {
            return Err(AutodiffError::ShapeMismatch {
                op: "scale_by",
                lhs: self.shape(scalar).to_vec(),
                rhs: vec![1],
            });
        }
        let s = self.data(scalar)[0];
        let data = self.data(a).iter().map(|x| x * s).collect();
        Ok(self.derive(
            Op::ScaleBy { scalar, input: a },
            self.shape(a).to_vec(),
            data,
            &[scalar, a],
        ))
    }

    /// Numerically stable softmax over a vector: the max is subtracted before
    /// exponentiation, and the gradient applies the Jacobian
    /// `diag(p) - p p^T`.
    pub fn softmax(&mut self, a: TensorId) -> Result<TensorId, AutodiffError> {
        if self.data(a).is_empty() {
            return Err(AutodiffError::EmptySoftmax);
        }
        let input = self.data(a);
        let max = input.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = input.iter().map(|x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let data = exps.into_iter().map(|e| e / sum).collect();
        Ok(self.derive(Op::Softmax(a), self.shape(a).to_vec(), data, &[a]))
    }

    /// Per-row maximum of an `[m x t]` feature map. Gradient flows to each
    /// row's first maximal column only.
    pub fn max_over_time(&mut self, a: TensorId) -> Result<TensorId, AutodiffError> {
        let (m, t) = self.dims2("max_over_time", a)?;
        if t == 0 {
            return Err(AutodiffError::EmptyPooling);
        }
        let ad = self.data(a);
        let mut out = vec![0.0; m];
        for r in 0..m {
            out[r] = ad[r * t..(r + 1) * t]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
        }
        Ok(self.derive(Op::MaxOverTime(a), vec![m], out, &[a]))
    }

    /// Join vectors end to end.
    pub fn concat(&mut self, parts: &[TensorId]) -> Result<TensorId, AutodiffError> {
        if parts.is_empty() {
            return Err(AutodiffError::EmptyConcat);
        }
        let mut data = Vec::new();
        for &p in parts {
            data.extend_from_slice(self.data(p));
        }
        let len = data.len();
        Ok(self.derive(Op::Concat(parts.to_vec()), vec![len], data, parts))
    }

    /// Stack `t` vectors of length `m` as the columns of an `[m x t]` matrix.
    pub fn stack_cols(&mut self, cols: &[TensorId]) -> Result<TensorId, AutodiffError> {
        if cols.is_empty() {
            return Err(AutodiffError::EmptyConcat);
        }
        let m = self.data(cols[0]).len();
        for &c in cols {
            if self.data(c).len() != m {
                return Err(AutodiffError::ShapeMismatch {
                    op: "stack_cols",
                    lhs: vec![m],
                    rhs: self.shape(c).to_vec(),
                });
            }
        }
        let t = cols.len();
        let mut data = vec![0.0; m * t];
        for (j, &c) in cols.iter().enumerate() {
            for (r, &v) in self.data(c).iter().enumerate() {
                data[r * t + j] = v;
            }
        }
        Ok(self.derive(Op::StackCols(cols.to_vec()), vec![m, t], data, cols))
    }

    /// Gather rows of a `[v x d]` matrix into an `[n x d]` matrix. Gradients
    /// scatter back into the gathered rows, accumulating duplicates.
    pub fn embed_rows(&mut self, matrix: TensorId, ids: &[usize]) -> Result<TensorId, AutodiffError> {
        let (rows, d) = self.dims2("embed_rows", matrix)?;
        for &id in ids {
            if id >= rows {
                return Err(AutodiffError::EmbedIndexOutOfRange { id, rows });
            }
        }
        let md = self.data(matrix);
        let mut data = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            data.extend_from_slice(&md[id * d..(id + 1) * d]);
        }
        Ok(self.derive(
            Op::EmbedRows {
                matrix,
                ids: ids.to_vec(),
            },
            vec![ids.len(), d],
            data,
            &[matrix],
        ))
    }

    /// Select one row of a matrix as a vector.
    pub fn row(&mut self, matrix: TensorId, row: usize) -> Result<TensorId, AutodiffError> {
        let (rows, d) = self.dims2("row", matrix)?;
        if row >= rows {
            return Err(AutodiffError::RowOutOfRange {
                row,
                shape: vec![rows, d],
            });
        }
        let data = self.data(matrix)[row * d..(row + 1) * d].to_vec();
        Ok(self.derive(Op::Row { matrix, row }, vec![d], data, &[matrix]))
    }

    /// Sum of all elements, as a scalar node.
    pub fn sum(&mut self, a: TensorId) -> TensorId {
        let total: f64 = self.data(a).iter().sum();
        self.derive(Op::Sum(a), vec![1], vec![total], &[a])
    }

    // ---- backward -----------------------------------------------------------

    /// Reverse sweep from a scalar loss. Every `requires_grad` tensor
    /// reachable from the loss gets its gradient filled; fan-out accumulates
    /// with `+=`. Gradients persist until the graph is dropped.
    pub fn backward(&mut self, loss: TensorId) -> Result<(), AutodiffError> {
        if !self.nodes[loss.0].tensor.is_scalar() {
            return Err(AutodiffError::NonScalarLoss {
                shape: self.shape(loss).to_vec(),
            });
        }
        self.nodes[loss.0].tensor.grad_mut()[0] += 1.0;
        for id in (0..=loss.0).rev() {
            if self.nodes[id].tensor.grad.is_none() {
                continue;
            }
            let g = self.nodes[id].tensor.grad.clone().unwrap();
            let op = self.nodes[id].op.clone();
            self.pull_back(id, &op, &g);
        }
        // A leaf that requires a gradient but never received one still gets a
        // zero-filled slot, so callers can read it uniformly.
        for node in &mut self.nodes[..=loss.0] {
            if node.tensor.requires_grad && node.tensor.grad.is_none() {
                node.tensor.grad_mut();
            }
        }
        Ok(())
    }

    fn requires(&self, id: TensorId) -> bool {
        self.nodes[id.0].tensor.requires_grad
    }

    fn accumulate(&mut self, id: TensorId, f: impl FnOnce(&mut [f64])) {
        if self.requires(id) {
            f(self.nodes[id.0].tensor.grad_mut());
        }
    }

    fn pull_back(&mut self, out: usize, op: &Op, g: &[f64]) {
        match *op {
            Op::Leaf => {}
            Op::Matmul(a, b) => {
                let (m, k) = self.nodes[a.0].tensor.dims2().unwrap();
                let n = self.nodes[b.0].tensor.dims2().unwrap().1;
                let (need_a, need_b) = (self.requires(a), self.requires(b));
                if !(need_a || need_b) {
                    return;
                }
                let [na, nb] = self.nodes.get_disjoint_mut([a.0, b.0]).unwrap();
                if need_a {
                    let bd = nb.tensor.data();
                    let ga = na.tensor.grad_mut();
                    for i in 0..m {
                        for p in 0..k {
                            let mut acc = 0.0;
                            for j in 0..n {
                                acc += g[i * n + j] * bd[p * n + j];
                            }
                            ga[i * k + p] += acc;
                        }
                    }
                }
                if need_b {
                    let ad = na.tensor.data();
                    let gb = nb.tensor.grad_mut();
                    for p in 0..k {
                        for j in 0..n {
                            let mut acc = 0.0;
                            for i in 0..m {
                                acc += ad[i * k + p] * g[i * n + j];
                            }
                            gb[p * n + j] += acc;
                        }
                    }
                }
            }
            Op::Matvec(a, x) => {
                let (m, k) = self.nodes[a.0].tensor.dims2().unwrap();
                let (need_a, need_x) = (self.requires(a), self.requires(x));
                if !(need_a || need_x) {
                    return;
                }
                let [na, nx] = self.nodes.get_disjoint_mut([a.0, x.0]).unwrap();
                if need_a {
                    let xd = nx.tensor.data();
                    let ga = na.tensor.grad_mut();
                    for i in 0..m {
                        let gi = g[i];
                        if gi != 0.0 {
                            let grow = &mut ga[i * k..(i + 1) * k];
                            for (gw, &xv) in grow.iter_mut().zip(xd) {
                                *gw += gi * xv;
                            }
                        }
                    }
                }
                if need_x {
                    let ad = na.tensor.data();
                    let gx = nx.tensor.grad_mut();
                    for i in 0..m {
                        let gi = g[i];
                        if gi != 0.0 {
                            let arow = &ad[i * k..(i + 1) * k];
                            for (gv, &av) in gx.iter_mut().zip(arow) {
                                *gv += gi * av;
                            }
                        }
                    }
                }
            }
            Op::Dot(a, b) => {
                let g0 = g[0];
                let bd = self.nodes[b.0].tensor.data().to_vec();
                self.accumulate(a, |ga| {
                    for (gv, &bv) in ga.iter_mut().zip(&bd) {
                        *gv += g0 * bv;
                    }
                });
                let ad = self.nodes[a.0].tensor.data().to_vec();
                self.accumulate(b, |gb| {
                    for (gv, &av) in gb.iter_mut().zip(&ad) {
                        *gv += g0 * av;
                    }
                });
            }
            Op::Add(a, b) => {
                self.accumulate(a, |ga| {
                    for (gv, &gu) in ga.iter_mut().zip(g) {
                        *gv += gu;
                    }
                });
                self.accumulate(b, |gb| {
                    for (gv, &gu) in gb.iter_mut().zip(g) {
                        *gv += gu;
                    }
                });
            }
            Op::Sub(a, b) => {
                self.accumulate(a, |ga| {
                    for (gv, &gu) in ga.iter_mut().zip(g) {
                        *gv += gu;
                    }
                });
                self.accumulate(b, |gb| {
                    for (gv, &gu) in gb.iter_mut().zip(g) {
                        *gv -= gu;
                    }
                });
            }
            Op::Mul(a, b) => {
                let bd = self.nodes[b.0].tensor.data().to_vec();
                self.accumulate(a, |ga| {
                    for ((gv, &gu), &bv) in ga.iter_mut().zip(g).zip(&bd) {
                        *gv += gu * bv;
                    }
                });
                let ad = self.nodes[a.0].tensor.data().to_vec();
                self.accumulate(b, |gb| {
                    for ((gv, &gu), &av) in gb.iter_mut().zip(g).zip(&ad) {
                        *gv += gu * av;
                    }
                });
            }
            Op::Tanh(a) => {
                let yd = self.nodes[out].tensor.data().to_vec();
                self.accumulate(a, |ga| {
                    for ((gv, &gu), &y) in ga.iter_mut().zip(g).zip(&yd) {
                        *gv += gu * (1.0 - y * y);
                    }
                });
            }
            Op::Sigmoid(a) => {
                let yd = self.nodes[out].tensor.data().to_vec();
                self.accumulate(a, |ga| {
                    for ((gv, &gu), &y) in ga.iter_mut().zip(g).zip(&yd) {
                        *gv += gu * y * (1.0 - y);
                    }
                });
            }
            Op::Ln(a) => {
                let xd = self.nodes[a.0].tensor.data().to_vec();
                self.accumulate(a, |ga| {
                    for ((gv, &gu), &x) in ga.iter_mut().zip(g).zip(&xd) {
                        *gv += gu / x;
                    }
                });
            }
            Op::Clamp { input, lo, hi } => {
                let xd = self.nodes[input.0].tensor.data().to_vec();
                self.accumulate(input, |ga| {
                    for ((gv, &gu), &x) in ga.iter_mut().zip(g).zip(&xd) {
                        if x >= lo && x <= hi {
                            *gv += gu;
                        }
                    }
                });
            }
            Op::Scale { input, factor } => {
                self.accumulate(input, |ga| {
                    for (gv, &gu) in ga.iter_mut().zip(g) {
                        *gv += factor * gu;
                    }
                });
            }
            Op::ScaleBy { scalar, input } => {
                let s = self.nodes[scalar.0].tensor.data()[0];
                let xd = self.nodes[input.0].tensor.data().to_vec();
                self.accumulate(scalar, |gs| {
                    gs[0] += g.iter().zip(&xd).map(|(&gu, &x)| gu * x).sum::<f64>();
                });
                self.accumulate(input, |ga| {
                    for (gv, &gu) in ga.iter_mut().zip(g) {
                        *gv += s * gu;
                    }
                });
            }
            Op::Softmax(a) => {
                let p = self.nodes[out].tensor.data().to_vec();
                let inner: f64 = p.iter().zip(g).map(|(&pi, &gi)| pi * gi).sum();
                self.accumulate(a, |ga| {
                    for ((gv, &pi), &gi) in ga.iter_mut().zip(&p).zip(g) {
                        *gv += pi * (gi - inner);
                    }
                });
            }
            Op::MaxOverTime(a) => {
                let (m, t) = self.nodes[a.0].tensor.dims2().unwrap();
                let xd = self.nodes[a.0].tensor.data().to_vec();
                self.accumulate(a, |ga| {
                    for r in 0..m {
                        let row = &xd[r * t..(r + 1) * t];
                        let mut best = 0;
                        for (j, &v) in row.iter().enumerate() {
                            if v > row[best] {
                                best = j;
                            }
                        }
                        ga[r * t + best] += g[r];
                    }
                });
            }
            Op::Concat(ref parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.nodes[p.0].tensor.numel();
                    let slice = &g[offset..offset + len];
                    self.accumulate(p, |gp| {
                        for (gv, &gu) in gp.iter_mut().zip(slice) {
                            *gv += gu;
                        }
                    });
                    offset += len;
                }
            }
            Op::StackCols(ref cols) => {
                let t = cols.len();
                for (j, &c) in cols.iter().enumerate() {
                    let m = self.nodes[c.0].tensor.numel();
                    self.accumulate(c, |gc| {
                        for (r, gv) in gc.iter_mut().enumerate().take(m) {
                            *gv += g[r * t + j];
                        }
                    });
                }
            }
            Op::EmbedRows { matrix, ref ids } => {
                let d = self.nodes[matrix.0].tensor.dims2().unwrap().1;
                self.accumulate(matrix, |gm| {
                    for (j, &id) in ids.iter().enumerate() {
                        let src = &g[j * d..(j + 1) * d];
                        let dst = &mut gm[id * d..(id + 1) * d];
                        for (gv, &gu) in dst.iter_mut().zip(src) {
                            *gv += gu;
                        }
                    }
                });
            }
            Op::Row { matrix, row } => {
                let d = self.nodes[matrix.0].tensor.dims2().unwrap().1;
                self.accumulate(matrix, |gm| {
                    let dst = &mut gm[row * d..(row + 1) * d];
                    for (gv, &gu) in dst.iter_mut().zip(g) {
                        *gv += gu;
                    }
                });
            }
            Op::Sum(a) => {
                let g0 = g[0];
                self.accumulate(a, |ga| {
                    for gv in ga.iter_mut() {
                        *gv += g0;
                    }
                });
            }
        }
    }

    /// Accumulate the gradients of named parameter leaves into the store.
    pub fn export_grads(&self, store: &mut ParamStore) -> Result<(), AutodiffError> {
        for node in &self.nodes {
            if let (Some(name), Some(grad)) = (&node.param, &node.tensor.grad) {
                store.accumulate_grad(name, grad)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::AutodiffError;

    fn vector(g: &mut Graph, data: Vec<f64>) -> TensorId {
        g.input(Tensor::vector(data).with_grad())
    }

    #[test]
    fn matmul_identity() {
        let mut g = Graph::new();
        let eye = g.constant(Tensor::matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
        let m = g.constant(Tensor::matrix(vec![vec![1.0, 2.0], vec![3.0, 4.0]]));
        let out = g.matmul(eye, m).unwrap();
        assert_eq!(g.data(out), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn matmul_row_times_column() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::matrix(vec![vec![1.0, 2.0]]));
        let b = g.constant(Tensor::matrix(vec![vec![3.0], vec![4.0]]));
        let out = g.matmul(a, b).unwrap();
        assert_eq!(g.shape(out), &[1, 1]);
        assert_eq!(g.data(out), &[11.0]);
    }

    #[test]
    fn matmul_gradient_of_sum() {
        let mut g = Graph::new();
        let a = g.input(Tensor::matrix(vec![vec![1.0, 1.0]]).with_grad());
        let b = g.constant(Tensor::matrix(vec![vec![2.0], vec![5.0]]));
        let prod = g.matmul(a, b).unwrap();
        let loss = g.sum(prod);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(a).unwrap(), &[2.0, 5.0]);
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::matrix(vec![vec![1.0, 2.0]]));
        let b = g.constant(Tensor::matrix(vec![vec![1.0, 2.0]]));
        let err = g.matmul(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[1, 2]") && msg.contains("matmul"), "{msg}");
    }

    #[test]
    fn elementwise_trivials() {
        let mut g = Graph::new();
        let zeros = g.constant(Tensor::vector(vec![0.0, 0.0]));
        let t = g.tanh(zeros);
        assert_eq!(g.data(t), &[0.0, 0.0]);

        let zero = g.constant(Tensor::vector(vec![0.0]));
        let s = g.sigmoid(zero);
        assert_eq!(g.data(s), &[0.5]);

        let a = g.constant(Tensor::vector(vec![1.0, 2.0]));
        let b = g.constant(Tensor::vector(vec![3.0, 4.0]));
        let sum = g.add(a, b).unwrap();
        assert_eq!(g.data(sum), &[4.0, 6.0]);
        let prod = g.mul(a, b).unwrap();
        assert_eq!(g.data(prod), &[3.0, 8.0]);
    }

    #[test]
    fn elementwise_shape_mismatch() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::vector(vec![1.0]));
        let b = g.constant(Tensor::vector(vec![1.0, 2.0]));
        let err = g.add(a, b).unwrap_err();
        assert!(matches!(err, AutodiffError::ShapeMismatch { op: "add", .. }));
    }

    #[test]
    fn softmax_uniform_inputs() {
        for c in [-3.0, 0.0, 17.5] {
            let mut g = Graph::new();
            let z = g.constant(Tensor::vector(vec![c; 4]));
            let p = g.softmax(z).unwrap();
            for &v in g.data(p) {
                assert!((v - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn softmax_matches_direct_formula() {
        let mut g = Graph::new();
        let z = g.constant(Tensor::vector(vec![1.0_f64.ln(), 3.0_f64.ln()]));
        let p = g.softmax(z).unwrap();
        assert!((g.data(p)[0] - 0.25).abs() < 1e-15);
        assert!((g.data(p)[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn softmax_is_shift_stable() {
        let mut g = Graph::new();
        let z = g.constant(Tensor::vector(vec![1000.0, 1000.0]));
        let p = g.softmax(z).unwrap();
        assert_eq!(g.data(p), &[0.5, 0.5]);
        let sum: f64 = g.data(p).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_empty_input_is_an_error() {
        let mut g = Graph::new();
        let z = g.constant(Tensor::vector(vec![]));
        assert!(matches!(g.softmax(z), Err(AutodiffError::EmptySoftmax)));
    }

    #[test]
    fn max_over_time_basics() {
        let mut g = Graph::new();
        let f = g.constant(Tensor::matrix(vec![vec![1.0, 5.0, 3.0], vec![2.0, 2.0, 2.0]]));
        let pooled = g.max_over_time(f).unwrap();
        assert_eq!(g.data(pooled), &[5.0, 2.0]);

        let single = g.constant(Tensor::matrix(vec![vec![4.0], vec![-1.0]]));
        let out = g.max_over_time(single).unwrap();
        assert_eq!(g.data(out), &[4.0, -1.0]);
    }

    #[test]
    fn max_over_time_gradient_is_a_one_hot_mask() {
        let mut g = Graph::new();
        let f = g.input(Tensor::matrix(vec![vec![1.0, 5.0, 3.0]]).with_grad());
        let pooled = g.max_over_time(f).unwrap();
        let loss = g.sum(pooled);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(f).unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn max_over_time_tie_goes_to_first_occurrence() {
        let mut g = Graph::new();
        let f = g.input(Tensor::matrix(vec![vec![7.0, 7.0, 7.0]]).with_grad());
        let pooled = g.max_over_time(f).unwrap();
        let loss = g.sum(pooled);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(f).unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn max_over_time_zero_columns_is_an_error() {
        let mut g = Graph::new();
        let f = g.constant(Tensor::new(vec![3, 0], vec![]));
        let err = g.max_over_time(f).unwrap_err();
        assert!(err.to_string().contains("pad the sentence"));
    }

    #[test]
    fn backward_through_sum_gives_ones() {
        let mut g = Graph::new();
        let x = vector(&mut g, vec![1.0, 2.0, 3.0]);
        let loss = g.sum(x);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(x).unwrap(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn backward_through_square() {
        let mut g = Graph::new();
        let x = vector(&mut g, vec![2.0]);
        let sq = g.mul(x, x).unwrap();
        let loss = g.sum(sq);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(x).unwrap(), &[4.0]);
    }

    #[test]
    fn fan_out_accumulates() {
        let mut g = Graph::new();
        let x = vector(&mut g, vec![1.0]);
        let y = g.add(x, x).unwrap();
        let loss = g.sum(y);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(x).unwrap(), &[2.0]);
    }

    #[test]
    fn double_consumption_equals_sum_of_single_consumer_gradients() {
        // f(x) = sum(tanh(x)) + sum(x * c): the gradient must equal the sum
        // of the two paths computed separately.
        let run = |with_tanh: bool, with_mul: bool| -> Vec<f64> {
            let mut g = Graph::new();
            let x = g.input(Tensor::vector(vec![0.3, -0.8]).with_grad());
            let c = g.constant(Tensor::vector(vec![2.0, -1.0]));
            let mut parts = Vec::new();
            if with_tanh {
                let t = g.tanh(x);
                parts.push(g.sum(t));
            }
            if with_mul {
                let m = g.mul(x, c).unwrap();
                parts.push(g.sum(m));
            }
            let loss = match parts.as_slice() {
                [only] => *only,
                [a, b] => g.add(*a, *b).unwrap(),
                _ => unreachable!(),
            };
            g.backward(loss).unwrap();
            g.grad(x).unwrap().to_vec()
        };
        let both = run(true, true);
        let tanh_only = run(true, false);
        let mul_only = run(false, true);
        for i in 0..2 {
            assert!((both[i] - (tanh_only[i] + mul_only[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn backward_on_non_scalar_is_an_error() {
        let mut g = Graph::new();
        let x = vector(&mut g, vec![1.0, 2.0]);
        let y = g.tanh(x);
        let err = g.backward(y).unwrap_err();
        assert!(matches!(err, AutodiffError::NonScalarLoss { .. }));
    }

    #[test]
    fn embed_rows_scatters_and_accumulates() {
        let mut g = Graph::new();
        let table = g.input(
            Tensor::matrix(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).with_grad(),
        );
        let gathered = g.embed_rows(table, &[2, 0, 2]).unwrap();
        assert_eq!(g.data(gathered), &[5.0, 6.0, 1.0, 2.0, 5.0, 6.0]);
        let loss = g.sum(gathered);
        g.backward(loss).unwrap();
        // Row 2 was gathered twice, so its gradient doubles.
        assert_eq!(g.grad(table).unwrap(), &[1.0, 1.0, 0.0, 0.0, 2.0, 2.0]);
    }

    #[test]
    fn concat_splits_gradient_back() {
        let mut g = Graph::new();
        let a = vector(&mut g, vec![1.0, 2.0]);
        let b = vector(&mut g, vec![3.0]);
        let joined = g.concat(&[a, b]).unwrap();
        assert_eq!(g.data(joined), &[1.0, 2.0, 3.0]);
        let c = g.constant(Tensor::vector(vec![10.0, 20.0, 30.0]));
        let weighted = g.mul(joined, c).unwrap();
        let loss = g.sum(weighted);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(a).unwrap(), &[10.0, 20.0]);
        assert_eq!(g.grad(b).unwrap(), &[30.0]);
    }

    #[test]
    fn stack_cols_round_trips_gradient() {
        let mut g = Graph::new();
        let c0 = vector(&mut g, vec![1.0, 2.0]);
        let c1 = vector(&mut g, vec![3.0, 4.0]);
        let stacked = g.stack_cols(&[c0, c1]).unwrap();
        assert_eq!(g.shape(stacked), &[2, 2]);
        assert_eq!(g.data(stacked), &[1.0, 3.0, 2.0, 4.0]);
        let pooled = g.max_over_time(stacked).unwrap();
        let loss = g.sum(pooled);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(c0).unwrap(), &[0.0, 0.0]);
        assert_eq!(g.grad(c1).unwrap(), &[1.0, 1.0]);
    }

    #[test]
    fn identical_graphs_are_bit_identical() {
        let build = || {
            let mut g = Graph::new();
            let x = g.input(Tensor::vector(vec![0.123, -0.456, 0.789]).with_grad());
            let t = g.tanh(x);
            let s = g.softmax(t).unwrap();
            let loss = g.sum(s);
            g.backward(loss).unwrap();
            (g.data(s).to_vec(), g.grad(x).unwrap().to_vec())
        };
        let (v1, g1) = build();
        let (v2, g2) = build();
        for (a, b) in v1.iter().zip(&v2).chain(g1.iter().zip(&g2)) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

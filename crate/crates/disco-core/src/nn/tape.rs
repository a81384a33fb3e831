use alloc::vec::Vec;

use super::scalar::Scalar;
use super::tensor::Tensor;
use super::NnError;

/// Handle to one node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

/// A define-by-run reverse-mode tape over 2-D values.
///
/// Every operation appends a node holding its forward value; `backward`
/// walks the nodes in reverse creation order and accumulates gradients.
/// Tapes are cheap and meant to be rebuilt per step; parameters live
/// outside as [`Tensor`]s and enter through [`Tape::leaf`].
pub struct Tape<S: Scalar> {
    nodes: Vec<Node<S>>,
}

struct Node<S: Scalar> {
    rows: usize,
    cols: usize,
    value: Vec<S>,
    grad: Vec<S>,
    op: Op<S>,
}

#[derive(Clone)]
enum Op<S: Scalar> {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, S),
    AddScalar(Var, S),
    MatMul(Var, Var),
    Transpose(Var),
    /// Matrix plus a `1xc` row vector, broadcast over rows.
    AddRow(Var, Var),
    /// Matrix times a `1xc` row vector, broadcast over rows.
    MulRow(Var, Var),
    Relu(Var),
    LeakyRelu(Var, S),
    Elu(Var, S),
    Sigmoid(Var),
    /// Softmax over all elements (shape preserved).
    Softmax(Var),
    Sum(Var),
    Mean(Var),
    /// Column sums: `rxc -> 1xc`.
    SumRows(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    GatherRows(Var, Vec<usize>),
    /// Row i of the input accumulates into output row `targets[i]`.
    ScatterAddRows(Var, Vec<usize>),
    /// Per-column softmax within contiguous runs of equal segment ids.
    SegmentSoftmax(Var, Vec<usize>),
    /// Sum over column blocks of the given width: `rx(b*m) -> rxm`.
    RowBlockSum(Var, usize),
    /// Scale column block h (width b) of `a` by column h of `s`.
    ScaleColBlocks(Var, Var, usize),
    /// Per-row normalization to mean 0, variance 1 (no affine part).
    LayerNorm(Var, S),
    /// Multiply by a fixed mask of `0` / `1/keep` values.
    Dropout(Var, Vec<S>),
}

impl<S: Scalar> Default for Tape<S> {
    fn default() -> Self {
        Tape::new()
    }
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<S>, op: Op<S>) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        let grad = alloc::vec![S::zero(); value.len()];
        self.nodes.push(Node {
            rows,
            cols,
            value,
            grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    /// Insert a tensor as a leaf node (input, constant, or parameter).
    pub fn leaf(&mut self, t: &Tensor<S>) -> Var {
        self.push(t.rows(), t.cols(), t.data().to_vec(), Op::Leaf)
    }

    /// Leaf from raw parts.
    pub fn leaf_from(&mut self, rows: usize, cols: usize, data: Vec<S>) -> Result<Var, NnError> {
        if data.len() != rows * cols {
            return Err(shape(
                "leaf_from",
                alloc::format!("{rows}x{cols} vs {}", data.len()),
            ));
        }
        Ok(self.push(rows, cols, data, Op::Leaf))
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> Var {
        self.push(rows, cols, alloc::vec![S::zero(); rows * cols], Op::Leaf)
    }

    pub fn shape(&self, v: Var) -> [usize; 2] {
        let n = &self.nodes[v.0];
        [n.rows, n.cols]
    }

    pub fn value(&self, v: Var) -> &[S] {
        &self.nodes[v.0].value
    }

    pub fn grad(&self, v: Var) -> &[S] {
        &self.nodes[v.0].grad
    }

    pub fn value_tensor(&self, v: Var) -> Tensor<S> {
        let n = &self.nodes[v.0];
        let mut t =
            Tensor::from_vec(n.rows, n.cols, n.value.clone()).expect("node shapes are consistent");
        t.set_grad(n.grad.clone());
        t
    }

    // ---- element-wise -------------------------------------------------

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.same_shape("add", a, b)?;
        let value = zip(self.value(a), self.value(b), |x, y| x + y);
        let [r, c] = self.shape(a);
        Ok(self.push(r, c, value, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.same_shape("sub", a, b)?;
        let value = zip(self.value(a), self.value(b), |x, y| x - y);
        let [r, c] = self.shape(a);
        Ok(self.push(r, c, value, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.same_shape("mul", a, b)?;
        let value = zip(self.value(a), self.value(b), |x, y| x * y);
        let [r, c] = self.shape(a);
        Ok(self.push(r, c, value, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, k: S) -> Var {
        let value = map(self.value(a), |x| x * k);
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::Scale(a, k))
    }

    pub fn add_scalar(&mut self, a: Var, k: S) -> Var {
        let value = map(self.value(a), |x| x + k);
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::AddScalar(a, k))
    }

    // ---- linear algebra ------------------------------------------------

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        let [ar, ac] = self.shape(a);
        let [br, bc] = self.shape(b);
        if ac != br {
            return Err(shape("matmul", alloc::format!("{ar}x{ac} . {br}x{bc}")));
        }
        let value = matmul_nn(self.value(a), self.value(b), ar, ac, bc);
        Ok(self.push(ar, bc, value, Op::MatMul(a, b)))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let [r, c] = self.shape(a);
        let src = self.value(a);
        let mut value = alloc::vec![S::zero(); r * c];
        for i in 0..r {
            for j in 0..c {
                value[j * r + i] = src[i * c + j];
            }
        }
        self.push(c, r, value, Op::Transpose(a))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, NnError> {
        let [r, c] = self.shape(a);
        let [rr, rc] = self.shape(row);
        if rr != 1 || rc != c {
            return Err(shape("add_row", alloc::format!("{r}x{c} + {rr}x{rc}")));
        }
        let (av, rv) = (self.value(a), self.value(row));
        let mut value = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                value.push(av[i * c + j] + rv[j]);
            }
        }
        Ok(self.push(r, c, value, Op::AddRow(a, row)))
    }

    pub fn mul_row(&mut self, a: Var, row: Var) -> Result<Var, NnError> {
        let [r, c] = self.shape(a);
        let [rr, rc] = self.shape(row);
        if rr != 1 || rc != c {
            return Err(shape("mul_row", alloc::format!("{r}x{c} * {rr}x{rc}")));
        }
        let (av, rv) = (self.value(a), self.value(row));
        let mut value = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                value.push(av[i * c + j] * rv[j]);
            }
        }
        Ok(self.push(r, c, value, Op::MulRow(a, row)))
    }

    // ---- activations ----------------------------------------------------

    pub fn relu(&mut self, a: Var) -> Var {
        let value = map(self.value(a), |x| if x > S::zero() { x } else { S::zero() });
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::Relu(a))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: S) -> Var {
        let value = map(self.value(a), |x| if x > S::zero() { x } else { x * slope });
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::LeakyRelu(a, slope))
    }

    pub fn elu(&mut self, a: Var, alpha: S) -> Var {
        let value = map(self.value(a), |x| {
            if x > S::zero() {
                x
            } else {
                alpha * (x.exp() - S::one())
            }
        });
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::Elu(a, alpha))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = map(self.value(a), |x| S::one() / (S::one() + (-x).exp()));
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::Sigmoid(a))
    }

    /// Numerically-stable softmax across all elements.
    pub fn softmax(&mut self, a: Var) -> Var {
        let src = self.value(a);
        let max = src.iter().fold(S::neg_infinity(), |m, &x| m.max(x));
        let mut value: Vec<S> = src.iter().map(|&x| (x - max).exp()).collect();
        let total: S = value.iter().copied().sum();
        for x in value.iter_mut() {
            *x = *x / total;
        }
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::Softmax(a))
    }

    // ---- reductions and reshapes ----------------------------------------

    pub fn sum(&mut self, a: Var) -> Var {
        let total: S = self.value(a).iter().copied().sum();
        self.push(1, 1, alloc::vec![total], Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.value(a).len().max(1);
        let total: S = self.value(a).iter().copied().sum();
        self.push(
            1,
            1,
            alloc::vec![total / S::from_f64(n as f64)],
            Op::Mean(a),
        )
    }

    pub fn sum_rows(&mut self, a: Var) -> Var {
        let [r, c] = self.shape(a);
        let src = self.value(a);
        let mut value = alloc::vec![S::zero(); c];
        for i in 0..r {
            for j in 0..c {
                value[j] = value[j] + src[i * c + j];
            }
        }
        self.push(1, c, value, Op::SumRows(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, NnError> {
        if parts.is_empty() {
            return Err(shape(
                "concat_cols",
                alloc::string::String::from("no parts"),
            ));
        }
        let [rows, _] = self.shape(parts[0]);
        let mut cols = 0;
        for &p in parts {
            let [r, c] = self.shape(p);
            if r != rows {
                return Err(shape(
                    "concat_cols",
                    alloc::format!("row counts differ: {rows} vs {r}"),
                ));
            }
            cols += c;
        }
        let mut value = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for &p in parts {
                let [_, c] = self.shape(p);
                let src = self.value(p);
                value.extend_from_slice(&src[i * c..(i + 1) * c]);
            }
        }
        Ok(self.push(rows, cols, value, Op::ConcatCols(parts.to_vec())))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, NnError> {
        if parts.is_empty() {
            return Err(shape(
                "concat_rows",
                alloc::string::String::from("no parts"),
            ));
        }
        let [_, cols] = self.shape(parts[0]);
        let mut rows = 0;
        let mut value = Vec::new();
        for &p in parts {
            let [r, c] = self.shape(p);
            if c != cols {
                return Err(shape(
                    "concat_rows",
                    alloc::format!("col counts differ: {cols} vs {c}"),
                ));
            }
            rows += r;
            value.extend_from_slice(self.value(p));
        }
        Ok(self.push(rows, cols, value, Op::ConcatRows(parts.to_vec())))
    }

    pub fn gather_rows(&mut self, a: Var, indices: &[usize]) -> Result<Var, NnError> {
        let [r, c] = self.shape(a);
        for &i in indices {
            if i >= r {
                return Err(NnError::IndexOutOfRange { index: i, limit: r });
            }
        }
        let src = self.value(a);
        let mut value = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            value.extend_from_slice(&src[i * c..(i + 1) * c]);
        }
        Ok(self.push(indices.len(), c, value, Op::GatherRows(a, indices.to_vec())))
    }

    pub fn scatter_add_rows(
        &mut self,
        a: Var,
        targets: &[usize],
        out_rows: usize,
    ) -> Result<Var, NnError> {
        let [r, c] = self.shape(a);
        if targets.len() != r {
            return Err(shape(
                "scatter_add_rows",
                alloc::format!("{} targets for {r} rows", targets.len()),
            ));
        }
        for &t in targets {
            if t >= out_rows {
                return Err(NnError::IndexOutOfRange {
                    index: t,
                    limit: out_rows,
                });
            }
        }
        let src = self.value(a);
        let mut value = alloc::vec![S::zero(); out_rows * c];
        for (i, &t) in targets.iter().enumerate() {
            for j in 0..c {
                value[t * c + j] = value[t * c + j] + src[i * c + j];
            }
        }
        Ok(self.push(out_rows, c, value, Op::ScatterAddRows(a, targets.to_vec())))
    }

    /// Per-column softmax within contiguous runs of equal segment ids
    /// (rows sharing a segment id must be adjacent).
    pub fn segment_softmax(&mut self, a: Var, segments: &[usize]) -> Result<Var, NnError> {
        let [r, c] = self.shape(a);
        if segments.len() != r {
            return Err(shape(
                "segment_softmax",
                alloc::format!("{} segment ids for {r} rows", segments.len()),
            ));
        }
        let src = self.value(a);
        let mut value = alloc::vec![S::zero(); r * c];
        for (start, end) in runs(segments) {
            for j in 0..c {
                let mut max = S::neg_infinity();
                for i in start..end {
                    max = max.max(src[i * c + j]);
                }
                let mut total = S::zero();
                for i in start..end {
                    let e = (src[i * c + j] - max).exp();
                    value[i * c + j] = e;
                    total = total + e;
                }
                for i in start..end {
                    value[i * c + j] = value[i * c + j] / total;
                }
            }
        }
        Ok(self.push(r, c, value, Op::SegmentSoftmax(a, segments.to_vec())))
    }

    pub fn row_block_sum(&mut self, a: Var, block: usize) -> Result<Var, NnError> {
        let [r, c] = self.shape(a);
        if block == 0 || c % block != 0 {
            return Err(shape(
                "row_block_sum",
                alloc::format!("{c} cols, block {block}"),
            ));
        }
        let m = c / block;
        let src = self.value(a);
        let mut value = alloc::vec![S::zero(); r * m];
        for i in 0..r {
            for h in 0..m {
                let mut acc = S::zero();
                for d in 0..block {
                    acc = acc + src[i * c + h * block + d];
                }
                value[i * m + h] = acc;
            }
        }
        Ok(self.push(r, m, value, Op::RowBlockSum(a, block)))
    }

    pub fn scale_col_blocks(&mut self, a: Var, s: Var, block: usize) -> Result<Var, NnError> {
        let [r, c] = self.shape(a);
        let [sr, sc] = self.shape(s);
        if block == 0 || c % block != 0 || sr != r || sc != c / block {
            return Err(shape(
                "scale_col_blocks",
                alloc::format!("{r}x{c} scaled by {sr}x{sc}, block {block}"),
            ));
        }
        let (av, sv) = (self.value(a), self.value(s));
        let mut value = Vec::with_capacity(r * c);
        for i in 0..r {
            for h in 0..sc {
                for d in 0..block {
                    value.push(av[i * c + h * block + d] * sv[i * sc + h]);
                }
            }
        }
        Ok(self.push(r, c, value, Op::ScaleColBlocks(a, s, block)))
    }

    /// Row-wise normalization to mean 0 and (population) variance 1; the
    /// affine part of a layer norm is composed from `mul_row`/`add_row`.
    pub fn layer_norm(&mut self, a: Var, eps: S) -> Var {
        let [r, c] = self.shape(a);
        let src = self.value(a);
        let mut value = Vec::with_capacity(r * c);
        for i in 0..r {
            let row = &src[i * c..(i + 1) * c];
            let (mean, inv_std) = row_stats(row, eps);
            for &x in row {
                value.push((x - mean) * inv_std);
            }
        }
        self.push(r, c, value, Op::LayerNorm(a, eps))
    }

    /// Inverted dropout with a caller-supplied RNG; training-mode only
    /// (inference skips the call entirely).
    pub fn dropout(&mut self, a: Var, rate: f64, rng: &mut impl rand::Rng) -> Var {
        if rate <= 0.0 {
            return a;
        }
        let keep = 1.0 - rate;
        let scale = S::from_f64(1.0 / keep);
        let mask: Vec<S> = self
            .value(a)
            .iter()
            .map(|_| {
                if rng.random_range(0.0..1.0) < keep {
                    scale
                } else {
                    S::zero()
                }
            })
            .collect();
        let value = zip(self.value(a), &mask, |x, m| x * m);
        let [r, c] = self.shape(a);
        self.push(r, c, value, Op::Dropout(a, mask))
    }

    // ---- autodiff --------------------------------------------------------

    /// Reverse-mode sweep from a scalar loss. Gradients accumulate into
    /// every node and can be read back with [`Tape::grad`].
    pub fn backward(&mut self, loss: Var) -> Result<(), NnError> {
        let [r, c] = self.shape(loss);
        if r != 1 || c != 1 {
            return Err(shape(
                "backward",
                alloc::format!("loss must be 1x1, got {r}x{c}"),
            ));
        }
        for node in self.nodes.iter_mut() {
            for g in node.grad.iter_mut() {
                *g = S::zero();
            }
        }
        self.nodes[loss.0].grad[0] = S::one();

        for id in (0..=loss.0).rev() {
            let op = self.nodes[id].op.clone();
            let g = self.nodes[id].grad.clone();
            match op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    self.accumulate(a, &g);
                    self.accumulate(b, &g);
                }
                Op::Sub(a, b) => {
                    self.accumulate(a, &g);
                    let neg = map(&g, |x| -x);
                    self.accumulate(b, &neg);
                }
                Op::Mul(a, b) => {
                    let da = zip(&g, self.value(b), |x, y| x * y);
                    let db = zip(&g, self.value(a), |x, y| x * y);
                    self.accumulate(a, &da);
                    self.accumulate(b, &db);
                }
                Op::Scale(a, k) => {
                    let da = map(&g, |x| x * k);
                    self.accumulate(a, &da);
                }
                Op::AddScalar(a, _) => self.accumulate(a, &g),
                Op::MatMul(a, b) => {
                    let [ar, ac] = self.shape(a);
                    let bc = self.shape(b)[1];
                    let da = matmul_nt(&g, self.value(b), ar, bc, ac);
                    let db = matmul_tn(self.value(a), &g, ar, ac, bc);
                    self.accumulate(a, &da);
                    self.accumulate(b, &db);
                }
                Op::Transpose(a) => {
                    let [r, c] = self.shape(a);
                    let mut da = alloc::vec![S::zero(); r * c];
                    for i in 0..r {
                        for j in 0..c {
                            da[i * c + j] = g[j * r + i];
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::AddRow(a, row) => {
                    self.accumulate(a, &g);
                    let [r, c] = self.shape(a);
                    let mut drow = alloc::vec![S::zero(); c];
                    for i in 0..r {
                        for j in 0..c {
                            drow[j] = drow[j] + g[i * c + j];
                        }
                    }
                    self.accumulate(row, &drow);
                }
                Op::MulRow(a, row) => {
                    let [r, c] = self.shape(a);
                    let rv = self.value(row).to_vec();
                    let av = self.value(a).to_vec();
                    let mut da = alloc::vec![S::zero(); r * c];
                    let mut drow = alloc::vec![S::zero(); c];
                    for i in 0..r {
                        for j in 0..c {
                            da[i * c + j] = g[i * c + j] * rv[j];
                            drow[j] = drow[j] + g[i * c + j] * av[i * c + j];
                        }
                    }
                    self.accumulate(a, &da);
                    self.accumulate(row, &drow);
                }
                Op::Relu(a) => {
                    let da = zip(self.value(a), &g, |x, gi| {
                        if x > S::zero() {
                            gi
                        } else {
                            S::zero()
                        }
                    });
                    self.accumulate(a, &da);
                }
                Op::LeakyRelu(a, slope) => {
                    let da = zip(self.value(a), &g, |x, gi| {
                        if x > S::zero() {
                            gi
                        } else {
                            gi * slope
                        }
                    });
                    self.accumulate(a, &da);
                }
                Op::Elu(a, alpha) => {
                    let y = self.nodes[id].value.clone();
                    let da = {
                        let xs = self.value(a);
                        let mut out = Vec::with_capacity(g.len());
                        for k in 0..g.len() {
                            let d = if xs[k] > S::zero() {
                                S::one()
                            } else {
                                y[k] + alpha
                            };
                            out.push(g[k] * d);
                        }
                        out
                    };
                    self.accumulate(a, &da);
                }
                Op::Sigmoid(a) => {
                    let y = self.nodes[id].value.clone();
                    let da: Vec<S> = (0..g.len())
                        .map(|k| g[k] * y[k] * (S::one() - y[k]))
                        .collect();
                    self.accumulate(a, &da);
                }
                Op::Softmax(a) => {
                    let y = &self.nodes[id].value;
                    let dot: S = y.iter().zip(&g).map(|(&yi, &gi)| yi * gi).sum();
                    let da: Vec<S> = y.iter().zip(&g).map(|(&yi, &gi)| yi * (gi - dot)).collect();
                    self.accumulate(a, &da);
                }
                Op::Sum(a) => {
                    let da = alloc::vec![g[0]; self.value(a).len()];
                    self.accumulate(a, &da);
                }
                Op::Mean(a) => {
                    let n = self.value(a).len().max(1);
                    let da = alloc::vec![g[0] / S::from_f64(n as f64); self.value(a).len()];
                    self.accumulate(a, &da);
                }
                Op::SumRows(a) => {
                    let [r, c] = self.shape(a);
                    let mut da = alloc::vec![S::zero(); r * c];
                    for i in 0..r {
                        da[i * c..(i + 1) * c].copy_from_slice(&g[..c]);
                    }
                    self.accumulate(a, &da);
                }
                Op::ConcatCols(parts) => {
                    let rows = self.shape(parts[0])[0];
                    let total_cols: usize = parts.iter().map(|&p| self.shape(p)[1]).sum();
                    let mut offset = 0;
                    for &p in &parts {
                        let c = self.shape(p)[1];
                        let mut dp = alloc::vec![S::zero(); rows * c];
                        for i in 0..rows {
                            dp[i * c..(i + 1) * c].copy_from_slice(
                                &g[i * total_cols + offset..i * total_cols + offset + c],
                            );
                        }
                        self.accumulate(p, &dp);
                        offset += c;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in &parts {
                        let [r, c] = self.shape(p);
                        let dp = g[offset..offset + r * c].to_vec();
                        self.accumulate(p, &dp);
                        offset += r * c;
                    }
                }
                Op::GatherRows(a, indices) => {
                    let [r, c] = self.shape(a);
                    let mut da = alloc::vec![S::zero(); r * c];
                    for (i, &src_row) in indices.iter().enumerate() {
                        for j in 0..c {
                            da[src_row * c + j] = da[src_row * c + j] + g[i * c + j];
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::ScatterAddRows(a, targets) => {
                    let [r, c] = self.shape(a);
                    let mut da = alloc::vec![S::zero(); r * c];
                    for (i, &t) in targets.iter().enumerate() {
                        da[i * c..(i + 1) * c].copy_from_slice(&g[t * c..t * c + c]);
                    }
                    self.accumulate(a, &da);
                }
                Op::SegmentSoftmax(a, segments) => {
                    let [r, c] = self.shape(a);
                    let y = self.nodes[id].value.clone();
                    let mut da = alloc::vec![S::zero(); r * c];
                    for (start, end) in runs(&segments) {
                        for j in 0..c {
                            let mut dot = S::zero();
                            for i in start..end {
                                dot = dot + y[i * c + j] * g[i * c + j];
                            }
                            for i in start..end {
                                da[i * c + j] = y[i * c + j] * (g[i * c + j] - dot);
                            }
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::RowBlockSum(a, block) => {
                    let [r, c] = self.shape(a);
                    let m = c / block;
                    let mut da = alloc::vec![S::zero(); r * c];
                    for i in 0..r {
                        for h in 0..m {
                            for d in 0..block {
                                da[i * c + h * block + d] = g[i * m + h];
                            }
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::ScaleColBlocks(a, s, block) => {
                    let [r, c] = self.shape(a);
                    let sc = c / block;
                    let av = self.value(a).to_vec();
                    let sv = self.value(s).to_vec();
                    let mut da = alloc::vec![S::zero(); r * c];
                    let mut ds = alloc::vec![S::zero(); r * sc];
                    for i in 0..r {
                        for h in 0..sc {
                            let mut acc = S::zero();
                            for d in 0..block {
                                let k = i * c + h * block + d;
                                da[k] = g[k] * sv[i * sc + h];
                                acc = acc + g[k] * av[k];
                            }
                            ds[i * sc + h] = acc;
                        }
                    }
                    self.accumulate(a, &da);
                    self.accumulate(s, &ds);
                }
                Op::LayerNorm(a, eps) => {
                    let [r, c] = self.shape(a);
                    let y = self.nodes[id].value.clone();
                    let src = self.value(a).to_vec();
                    let inv_n = S::from_f64(1.0 / c as f64);
                    let mut da = alloc::vec![S::zero(); r * c];
                    for i in 0..r {
                        let row = &src[i * c..(i + 1) * c];
                        let (_, inv_std) = row_stats(row, eps);
                        let grow = &g[i * c..(i + 1) * c];
                        let yrow = &y[i * c..(i + 1) * c];
                        let mut g_mean = S::zero();
                        let mut gy_mean = S::zero();
                        for k in 0..c {
                            g_mean = g_mean + grow[k];
                            gy_mean = gy_mean + grow[k] * yrow[k];
                        }
                        g_mean = g_mean * inv_n;
                        gy_mean = gy_mean * inv_n;
                        for k in 0..c {
                            da[i * c + k] = inv_std * (grow[k] - g_mean - yrow[k] * gy_mean);
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::Dropout(a, mask) => {
                    let da = zip(&g, &mask, |x, m| x * m);
                    self.accumulate(a, &da);
                }
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, v: Var, delta: &[S]) {
        let grad = &mut self.nodes[v.0].grad;
        debug_assert_eq!(grad.len(), delta.len());
        for (dst, &d) in grad.iter_mut().zip(delta) {
            *dst = *dst + d;
        }
    }

    fn same_shape(&self, context: &'static str, a: Var, b: Var) -> Result<(), NnError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(shape(
                context,
                alloc::format!("{}x{} vs {}x{}", sa[0], sa[1], sb[0], sb[1]),
            ));
        }
        Ok(())
    }

    /// Smallest |x| seen at the input of any kinked activation
    /// (ReLU/LeakyReLU/ELU); finite-difference checks use this to reject
    /// configurations probing too close to a kink.
    pub fn kink_margin(&self) -> f64 {
        let mut margin = f64::INFINITY;
        for node in &self.nodes {
            let parent = match node.op {
                Op::Relu(a) | Op::LeakyRelu(a, _) | Op::Elu(a, _) => a,
                _ => continue,
            };
            for &x in &self.nodes[parent.0].value {
                margin = margin.min(x.as_f64().abs());
            }
        }
        margin
    }
}

fn shape(context: &'static str, detail: alloc::string::String) -> NnError {
    NnError::ShapeMismatch { context, detail }
}

fn map<S: Scalar>(a: &[S], f: impl Fn(S) -> S) -> Vec<S> {
    a.iter().map(|&x| f(x)).collect()
}

fn zip<S: Scalar>(a: &[S], b: &[S], f: impl Fn(S, S) -> S) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Contiguous runs of equal values: (start, end) half-open row ranges.
fn runs(segments: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=segments.len() {
        if i == segments.len() || segments[i] != segments[start] {
            out.push((start, i));
            start = i;
        }
    }
    out
}

fn row_stats<S: Scalar>(row: &[S], eps: S) -> (S, S) {
    let n = S::from_f64(row.len().max(1) as f64);
    let mean = row.iter().copied().sum::<S>() / n;
    let var = row.iter().map(|&x| (x - mean) * (x - mean)).sum::<S>() / n;
    (mean, S::one() / (var + eps).sqrt())
}

/// `a (rxk) . b (kxc)`.
fn matmul_nn<S: Scalar>(a: &[S], b: &[S], r: usize, k: usize, c: usize) -> Vec<S> {
    let mut out = alloc::vec![S::zero(); r * c];
    for i in 0..r {
        for kk in 0..k {
            let av = a[i * k + kk];
            let brow = &b[kk * c..(kk + 1) * c];
            let orow = &mut out[i * c..(i + 1) * c];
            for j in 0..c {
                orow[j] = orow[j] + av * brow[j];
            }
        }
    }
    out
}

/// `g (rxc) . b^T (cxk)` where b is `kxc`: gradient w.r.t. the left
/// matmul operand.
fn matmul_nt<S: Scalar>(g: &[S], b: &[S], r: usize, c: usize, k: usize) -> Vec<S> {
    let mut out = alloc::vec![S::zero(); r * k];
    for i in 0..r {
        for kk in 0..k {
            let mut acc = S::zero();
            for j in 0..c {
                acc = acc + g[i * c + j] * b[kk * c + j];
            }
            out[i * k + kk] = acc;
        }
    }
    out
}

/// `a^T (kxr) . g (rxc)` where a is `rxk`: gradient w.r.t. the right
/// matmul operand.
fn matmul_tn<S: Scalar>(a: &[S], g: &[S], r: usize, k: usize, c: usize) -> Vec<S> {
    let mut out = alloc::vec![S::zero(); k * c];
    for i in 0..r {
        for kk in 0..k {
            let av = a[i * k + kk];
            let grow = &g[i * c..(i + 1) * c];
            let orow = &mut out[kk * c..(kk + 1) * c];
            for j in 0..c {
                orow[j] = orow[j] + av * grow[j];
            }
        }
    }
    out
}

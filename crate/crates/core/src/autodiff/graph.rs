use crate::autodiff::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Variance guard inside layer normalization.
pub const LAYER_NORM_EPS: f64 = 1e-8;

/// Handle to a node recorded on a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Copy, Debug)]
struct ConvGeom {
    rows: usize,
    len: usize,
    c_in: usize,
    c_out: usize,
    width: usize,
    dilation: usize,
    causal: bool,
}

impl ConvGeom {
    /// Signed input offset read by tap `j` of an output position.
    fn offset(&self, j: usize) -> isize {
        let r = self.dilation as isize;
        if self.causal {
            -((self.width - 1 - j) as isize) * r
        } else {
            (j as isize - (self.width as isize - 1) / 2) * r
        }
    }
}

enum Op<T> {
    Leaf,
    Add(Var, Var),
    Mul(Var, Var),
    Sum(Var),
    Relu(Var),
    Embedding {
        table: Var,
        ids: Vec<usize>,
    },
    Conv1d {
        input: Var,
        weight: Var,
        bias: Var,
        geom: ConvGeom,
        cols: Vec<T>,
    },
    LayerNorm {
        input: Var,
        gain: Var,
        shift: Var,
        xhat: Vec<T>,
        inv_std: Vec<T>,
    },
    Affine {
        input: Var,
        weight: Var,
        bias: Var,
    },
    Gather {
        input: Var,
        index: Vec<Option<usize>>,
    },
    Concat(Var, Var),
    SoftmaxXent {
        logits: Var,
        targets: Vec<usize>,
        probs: Vec<T>,
    },
}

/// Tape of tensors and the operations that produced them.
///
/// Nodes are appended in evaluation order, so reverse insertion order is a
/// valid reverse topological order for the backward sweep.
pub struct Graph<T> {
    nodes: Vec<Tensor<T>>,
    ops: Vec<Op<T>>,
}

impl<T: Scalar> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Graph<T> {
    pub fn new() -> Self {
        Graph {
            nodes: Vec::new(),
            ops: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records a leaf. Its `requires_grad` flag decides whether gradients
    /// are collected for it.
    pub fn leaf(&mut self, tensor: Tensor<T>) -> Var {
        self.push(tensor, Op::Leaf)
    }

    pub fn constant(&mut self, shape: Vec<usize>, data: Vec<T>) -> Result<Var> {
        Ok(self.leaf(Tensor::new(shape, data)?))
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0]
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].shape()
    }

    pub fn data(&self, v: Var) -> &[T] {
        self.nodes[v.0].data()
    }

    pub fn grad(&self, v: Var) -> Option<&[T]> {
        self.nodes[v.0].grad.as_deref()
    }

    fn push(&mut self, tensor: Tensor<T>, op: Op<T>) -> Var {
        self.nodes.push(tensor);
        self.ops.push(op);
        Var(self.nodes.len() - 1)
    }

    fn derived(&mut self, shape: Vec<usize>, data: Vec<T>, inputs: &[Var], op: Op<T>) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        let mut t = Tensor::new(shape, data).expect("operator produced inconsistent shape");
        t.requires_grad = requires_grad;
        self.push(t, op)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::Shape {
                op,
                expected: self.shape(a).to_vec(),
                actual: self.shape(b).to_vec(),
            });
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let data = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(&x, &y)| x + y)
            .collect();
        let shape = self.shape(a).to_vec();
        Ok(self.derived(shape, data, &[a, b], Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let data = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(&x, &y)| x * y)
            .collect();
        let shape = self.shape(a).to_vec();
        Ok(self.derived(shape, data, &[a, b], Op::Mul(a, b)))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.data(a).iter().copied().sum();
        self.derived(vec![], vec![s], &[a], Op::Sum(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let data = self
            .data(a)
            .iter()
            .map(|&x| if x > T::zero() { x } else { T::zero() })
            .collect();
        let shape = self.shape(a).to_vec();
        self.derived(shape, data, &[a], Op::Relu(a))
    }

    /// Gathers rows of a `[rows, d]` table; the output has shape
    /// `index_shape ++ [d]`.
    pub fn embedding(&mut self, table: Var, ids: &[usize], index_shape: &[usize]) -> Result<Var> {
        let tshape = self.shape(table);
        if tshape.len() != 2 {
            return Err(Error::Shape {
                op: "embedding",
                expected: vec![0, 0],
                actual: tshape.to_vec(),
            });
        }
        let (rows, d) = (tshape[0], tshape[1]);
        if index_shape.iter().product::<usize>() != ids.len() {
            return Err(Error::Shape {
                op: "embedding",
                expected: index_shape.to_vec(),
                actual: vec![ids.len()],
            });
        }
        if let Some(&id) = ids.iter().find(|&&id| id >= rows) {
            return Err(Error::IdOutOfRange { id, rows });
        }
        let src = self.data(table);
        let mut data = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            data.extend_from_slice(&src[id * d..(id + 1) * d]);
        }
        let mut shape = index_shape.to_vec();
        shape.push(d);
        Ok(self.derived(
            shape,
            data,
            &[table],
            Op::Embedding {
                table,
                ids: ids.to_vec(),
            },
        ))
    }

    /// Dilated 1D convolution over `[B, t, c_in]` with weights
    /// `[k, c_in, c_out]` and bias `[c_out]`. Output length equals `t`.
    ///
    /// Causal kernels left-pad with `(k-1)*r` zeros; non-causal kernels pad
    /// `(k-1)*r/2` zeros on each side and require odd `k`.
    pub fn conv1d(
        &mut self,
        input: Var,
        weight: Var,
        bias: Var,
        dilation: usize,
        causal: bool,
    ) -> Result<Var> {
        let ishape = self.shape(input).to_vec();
        let wshape = self.shape(weight).to_vec();
        if ishape.len() != 3 || wshape.len() != 3 {
            return Err(Error::Shape {
                op: "conv1d",
                expected: vec![0, 0, 0],
                actual: if ishape.len() != 3 { ishape } else { wshape },
            });
        }
        let (width, c_in, c_out) = (wshape[0], wshape[1], wshape[2]);
        if ishape[2] != c_in {
            return Err(Error::ChannelMismatch {
                expected: c_in,
                actual: ishape[2],
            });
        }
        if width == 0 || dilation == 0 {
            return Err(Error::ConvGeometry(format!(
                "width {width} and dilation {dilation} must both be at least 1"
            )));
        }
        if !causal && width % 2 == 0 {
            return Err(Error::EvenKernel(width));
        }
        if ishape[1] == 0 {
            return Err(Error::ConvGeometry("sequence length must be at least 1".into()));
        }
        if self.shape(bias) != [c_out] {
            return Err(Error::Shape {
                op: "conv1d bias",
                expected: vec![c_out],
                actual: self.shape(bias).to_vec(),
            });
        }
        let geom = ConvGeom {
            rows: ishape[0] * ishape[1],
            len: ishape[1],
            c_in,
            c_out,
            width,
            dilation,
            causal,
        };
        let cols = im2col(self.data(input), &geom);
        let mut out = Vec::with_capacity(geom.rows * c_out);
        for _ in 0..geom.rows {
            out.extend_from_slice(self.data(bias));
        }
        let kc = width * c_in;
        T::gemm(
            geom.rows,
            kc,
            c_out,
            T::one(),
            &cols,
            kc as isize,
            1,
            self.data(weight),
            c_out as isize,
            1,
            T::one(),
            &mut out,
            c_out as isize,
            1,
        );
        let shape = vec![ishape[0], ishape[1], c_out];
        Ok(self.derived(
            shape,
            out,
            &[input, weight, bias],
            Op::Conv1d {
                input,
                weight,
                bias,
                geom,
                cols,
            },
        ))
    }

    /// Normalizes every last-axis slice to zero mean and unit variance, then
    /// applies `gain` and `shift`.
    pub fn layer_norm(&mut self, input: Var, gain: Var, shift: Var) -> Result<Var> {
        let d = self.value(input).last_dim();
        for p in [gain, shift] {
            if self.shape(p) != [d] {
                return Err(Error::Shape {
                    op: "layer_norm",
                    expected: vec![d],
                    actual: self.shape(p).to_vec(),
                });
            }
        }
        let x = self.data(input);
        let g = self.data(gain);
        let s = self.data(shift);
        let rows = x.len() / d;
        let eps = T::from_f64(LAYER_NORM_EPS);
        let inv_d = T::one() / T::from_f64(d as f64);
        let mut xhat = Vec::with_capacity(x.len());
        let mut inv_std = Vec::with_capacity(rows);
        let mut out = Vec::with_capacity(x.len());
        for row in x.chunks_exact(d) {
            let mean = row.iter().copied().sum::<T>() * inv_d;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() * inv_d;
            let is = T::one() / (var + eps).sqrt();
            inv_std.push(is);
            for j in 0..d {
                let h = (row[j] - mean) * is;
                xhat.push(h);
                out.push(g[j] * h + s[j]);
            }
        }
        let shape = self.shape(input).to_vec();
        Ok(self.derived(
            shape,
            out,
            &[input, gain, shift],
            Op::LayerNorm {
                input,
                gain,
                shift,
                xhat,
                inv_std,
            },
        ))
    }

    /// Per-position affine map over the last axis: `[..., c_in] @ [c_in, c_out] + b`.
    pub fn affine(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let wshape = self.shape(weight).to_vec();
        let c_in = self.value(input).last_dim();
        if wshape.len() != 2 || wshape[0] != c_in {
            return Err(Error::Shape {
                op: "affine",
                expected: vec![c_in, 0],
                actual: wshape,
            });
        }
        let c_out = wshape[1];
        if self.shape(bias) != [c_out] {
            return Err(Error::Shape {
                op: "affine bias",
                expected: vec![c_out],
                actual: self.shape(bias).to_vec(),
            });
        }
        let rows = self.value(input).numel() / c_in;
        let mut out = Vec::with_capacity(rows * c_out);
        for _ in 0..rows {
            out.extend_from_slice(self.data(bias));
        }
        T::gemm(
            rows,
            c_in,
            c_out,
            T::one(),
            self.data(input),
            c_in as isize,
            1,
            self.data(weight),
            c_out as isize,
            1,
            T::one(),
            &mut out,
            c_out as isize,
            1,
        );
        let mut shape = self.shape(input).to_vec();
        *shape.last_mut().unwrap() = c_out;
        Ok(self.derived(shape, out, &[input, weight, bias], Op::Affine { input, weight, bias }))
    }

    /// Selects last-axis rows of `input` (all leading axes flattened) into a
    /// `[index.len(), d]` matrix. `None` yields a zero row.
    pub fn gather_rows(&mut self, input: Var, index: &[Option<usize>]) -> Result<Var> {
        let d = self.value(input).last_dim();
        let rows = self.value(input).numel() / d;
        let src = self.data(input);
        let mut out = Vec::with_capacity(index.len() * d);
        for ix in index {
            match *ix {
                Some(r) if r < rows => out.extend_from_slice(&src[r * d..(r + 1) * d]),
                Some(r) => return Err(Error::IdOutOfRange { id: r, rows }),
                None => out.extend(std::iter::repeat_n(T::zero(), d)),
            }
        }
        Ok(self.derived(
            vec![index.len(), d],
            out,
            &[input],
            Op::Gather {
                input,
                index: index.to_vec(),
            },
        ))
    }

    /// Concatenates two tensors along the last axis.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != sb.len() || sa.is_empty() || sa[..sa.len() - 1] != sb[..sb.len() - 1] {
            return Err(Error::Shape {
                op: "concat",
                expected: sa.to_vec(),
                actual: sb.to_vec(),
            });
        }
        let (da, db) = (self.value(a).last_dim(), self.value(b).last_dim());
        let mut shape = sa.to_vec();
        *shape.last_mut().unwrap() = da + db;
        let mut out = Vec::with_capacity(self.value(a).numel() + self.value(b).numel());
        for (ra, rb) in self.data(a).chunks_exact(da).zip(self.data(b).chunks_exact(db)) {
            out.extend_from_slice(ra);
            out.extend_from_slice(rb);
        }
        Ok(self.derived(shape, out, &[a, b], Op::Concat(a, b)))
    }

    /// Mean negative log-likelihood of `targets` under a row-wise softmax of
    /// `logits [M, n]`. Class 0 (padding) and classes `>= n` are rejected.
    pub fn softmax_xent(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let lshape = self.shape(logits).to_vec();
        if lshape.len() != 2 || lshape[0] != targets.len() || targets.is_empty() {
            return Err(Error::Shape {
                op: "softmax_xent",
                expected: vec![targets.len(), 0],
                actual: lshape,
            });
        }
        let n = lshape[1];
        if let Some(&target) = targets.iter().find(|&&c| c == 0 || c >= n) {
            return Err(Error::InvalidTarget { target, classes: n });
        }
        let probs = softmax_rows(self.data(logits), n);
        let total: f64 = targets
            .iter()
            .enumerate()
            .map(|(i, &c)| -log_softmax_at(&self.data(logits)[i * n..(i + 1) * n], c))
            .sum();
        let loss = T::from_f64(total / targets.len() as f64);
        Ok(self.derived(
            vec![],
            vec![loss],
            &[logits],
            Op::SoftmaxXent {
                logits,
                targets: targets.to_vec(),
                probs,
            },
        ))
    }

    /// Reverse sweep from a scalar `loss`. Gradients are stored on every
    /// node that requires them.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.value(loss).numel() != 1 {
            return Err(Error::NonScalarBackward(self.shape(loss).to_vec()));
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !self.nodes[i].requires_grad {
                continue;
            }
            self.backprop_node(i, &g, &mut grads);
            self.nodes[i].grad = Some(g);
        }
        Ok(())
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn backprop_node(&self, i: usize, g: &[T], grads: &mut [Option<Vec<T>>]) {
        match &self.ops[i] {
            Op::Leaf => {}
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    if self.wants(v) {
                        acc(grads, v, self.value(v).numel(), |dst| {
                            dst.iter_mut().zip(g).for_each(|(d, &x)| *d += x)
                        });
                    }
                }
            }
            Op::Mul(a, b) => {
                for (v, other) in [(*a, *b), (*b, *a)] {
                    if self.wants(v) {
                        let o = self.data(other);
                        acc(grads, v, o.len(), |dst| {
                            for ((d, &x), &y) in dst.iter_mut().zip(g).zip(o) {
                                *d += x * y;
                            }
                        });
                    }
                }
            }
            Op::Sum(a) => {
                if self.wants(*a) {
                    acc(grads, *a, self.value(*a).numel(), |dst| {
                        dst.iter_mut().for_each(|d| *d += g[0])
                    });
                }
            }
            Op::Relu(a) => {
                if self.wants(*a) {
                    let x = self.data(*a);
                    acc(grads, *a, x.len(), |dst| {
                        for ((d, &gv), &xv) in dst.iter_mut().zip(g).zip(x) {
                            if xv > T::zero() {
                                *d += gv;
                            }
                        }
                    });
                }
            }
            Op::Embedding { table, ids } => {
                if self.wants(*table) {
                    let d = self.value(*table).last_dim();
                    acc(grads, *table, self.value(*table).numel(), |dst| {
                        for (k, &id) in ids.iter().enumerate() {
                            let row = &mut dst[id * d..(id + 1) * d];
                            row.iter_mut()
                                .zip(&g[k * d..(k + 1) * d])
                                .for_each(|(r, &x)| *r += x);
                        }
                    });
                }
            }
            Op::Conv1d {
                input,
                weight,
                bias,
                geom,
                cols,
            } => {
                let kc = geom.width * geom.c_in;
                let c_out = geom.c_out;
                if self.wants(*weight) {
                    acc(grads, *weight, kc * c_out, |dst| {
                        T::gemm(
                            kc,
                            geom.rows,
                            c_out,
                            T::one(),
                            cols,
                            1,
                            kc as isize,
                            g,
                            c_out as isize,
                            1,
                            T::one(),
                            dst,
                            c_out as isize,
                            1,
                        )
                    });
                }
                if self.wants(*bias) {
                    acc(grads, *bias, c_out, |dst| column_sums_into(g, c_out, dst));
                }
                if self.wants(*input) {
                    let mut dcols = vec![T::zero(); geom.rows * kc];
                    T::gemm(
                        geom.rows,
                        c_out,
                        kc,
                        T::one(),
                        g,
                        c_out as isize,
                        1,
                        self.data(*weight),
                        1,
                        c_out as isize,
                        T::zero(),
                        &mut dcols,
                        kc as isize,
                        1,
                    );
                    acc(grads, *input, geom.rows * geom.c_in, |dst| {
                        col2im_add(&dcols, geom, dst)
                    });
                }
            }
            Op::LayerNorm {
                input,
                gain,
                shift,
                xhat,
                inv_std,
            } => {
                let d = self.value(*input).last_dim();
                if self.wants(*gain) {
                    acc(grads, *gain, d, |dst| {
                        for (gr, hr) in g.chunks_exact(d).zip(xhat.chunks_exact(d)) {
                            for j in 0..d {
                                dst[j] += gr[j] * hr[j];
                            }
                        }
                    });
                }
                if self.wants(*shift) {
                    acc(grads, *shift, d, |dst| column_sums_into(g, d, dst));
                }
                if self.wants(*input) {
                    let gain = self.data(*gain);
                    let inv_d = T::one() / T::from_f64(d as f64);
                    acc(grads, *input, g.len(), |dst| {
                        let mut dxhat = vec![T::zero(); d];
                        for (r, ((gr, hr), dr)) in g
                            .chunks_exact(d)
                            .zip(xhat.chunks_exact(d))
                            .zip(dst.chunks_exact_mut(d))
                            .enumerate()
                        {
                            let mut mean_dh = T::zero();
                            let mut mean_dh_h = T::zero();
                            for j in 0..d {
                                dxhat[j] = gr[j] * gain[j];
                                mean_dh += dxhat[j];
                                mean_dh_h += dxhat[j] * hr[j];
                            }
                            mean_dh = mean_dh * inv_d;
                            mean_dh_h = mean_dh_h * inv_d;
                            for j in 0..d {
                                dr[j] += inv_std[r] * (dxhat[j] - mean_dh - hr[j] * mean_dh_h);
                            }
                        }
                    });
                }
            }
            Op::Affine {
                input,
                weight,
                bias,
            } => {
                let wshape = self.shape(*weight);
                let (c_in, c_out) = (wshape[0], wshape[1]);
                let rows = g.len() / c_out;
                if self.wants(*weight) {
                    let x = self.data(*input);
                    acc(grads, *weight, c_in * c_out, |dst| {
                        T::gemm(
                            c_in,
                            rows,
                            c_out,
                            T::one(),
                            x,
                            1,
                            c_in as isize,
                            g,
                            c_out as isize,
                            1,
                            T::one(),
                            dst,
                            c_out as isize,
                            1,
                        )
                    });
                }
                if self.wants(*bias) {
                    acc(grads, *bias, c_out, |dst| column_sums_into(g, c_out, dst));
                }
                if self.wants(*input) {
                    let w = self.data(*weight);
                    acc(grads, *input, rows * c_in, |dst| {
                        T::gemm(
                            rows,
                            c_out,
                            c_in,
                            T::one(),
                            g,
                            c_out as isize,
                            1,
                            w,
                            1,
                            c_out as isize,
                            T::one(),
                            dst,
                            c_in as isize,
                            1,
                        )
                    });
                }
            }
            Op::Gather { input, index } => {
                if self.wants(*input) {
                    let d = self.value(*input).last_dim();
                    acc(grads, *input, self.value(*input).numel(), |dst| {
                        for (k, ix) in index.iter().enumerate() {
                            if let Some(r) = *ix {
                                dst[r * d..(r + 1) * d]
                                    .iter_mut()
                                    .zip(&g[k * d..(k + 1) * d])
                                    .for_each(|(x, &y)| *x += y);
                            }
                        }
                    });
                }
            }
            Op::Concat(a, b) => {
                let (da, db) = (self.value(*a).last_dim(), self.value(*b).last_dim());
                let width = da + db;
                for (v, lo, dv) in [(*a, 0, da), (*b, da, db)] {
                    if self.wants(v) {
                        acc(grads, v, self.value(v).numel(), |dst| {
                            for (dr, gr) in dst.chunks_exact_mut(dv).zip(g.chunks_exact(width)) {
                                dr.iter_mut()
                                    .zip(&gr[lo..lo + dv])
                                    .for_each(|(x, &y)| *x += y);
                            }
                        });
                    }
                }
            }
            Op::SoftmaxXent {
                logits,
                targets,
                probs,
            } => {
                if self.wants(*logits) {
                    let n = self.value(*logits).last_dim();
                    let scale = g[0] / T::from_f64(targets.len() as f64);
                    acc(grads, *logits, probs.len(), |dst| {
                        for (r, (dr, pr)) in
                            dst.chunks_exact_mut(n).zip(probs.chunks_exact(n)).enumerate()
                        {
                            for j in 0..n {
                                dr[j] += scale * pr[j];
                            }
                            dr[targets[r]] = dr[targets[r]] - scale;
                        }
                    });
                }
            }
        }
    }
}

fn acc<T: Scalar>(
    grads: &mut [Option<Vec<T>>],
    v: Var,
    numel: usize,
    f: impl FnOnce(&mut [T]),
) {
    let slot = grads[v.0].get_or_insert_with(|| vec![T::zero(); numel]);
    f(slot);
}

fn column_sums_into<T: Scalar>(g: &[T], width: usize, dst: &mut [T]) {
    for row in g.chunks_exact(width) {
        dst.iter_mut().zip(row).for_each(|(d, &x)| *d += x);
    }
}

fn im2col<T: Scalar>(x: &[T], geom: &ConvGeom) -> Vec<T> {
    let kc = geom.width * geom.c_in;
    let mut cols = vec![T::zero(); geom.rows * kc];
    let len = geom.len as isize;
    for (r, out_row) in cols.chunks_exact_mut(kc).enumerate() {
        let seq_start = r - r % geom.len;
        let pos = (r % geom.len) as isize;
        for j in 0..geom.width {
            let src = pos + geom.offset(j);
            if (0..len).contains(&src) {
                let s = (seq_start + src as usize) * geom.c_in;
                out_row[j * geom.c_in..(j + 1) * geom.c_in].copy_from_slice(&x[s..s + geom.c_in]);
            }
        }
    }
    cols
}

fn col2im_add<T: Scalar>(dcols: &[T], geom: &ConvGeom, dx: &mut [T]) {
    let kc = geom.width * geom.c_in;
    let len = geom.len as isize;
    for (r, row) in dcols.chunks_exact(kc).enumerate() {
        let seq_start = r - r % geom.len;
        let pos = (r % geom.len) as isize;
        for j in 0..geom.width {
            let src = pos + geom.offset(j);
            if (0..len).contains(&src) {
                let s = (seq_start + src as usize) * geom.c_in;
                dx[s..s + geom.c_in]
                    .iter_mut()
                    .zip(&row[j * geom.c_in..(j + 1) * geom.c_in])
                    .for_each(|(d, &v)| *d += v);
            }
        }
    }
}

/// Row-wise softmax of a `[rows, n]` matrix.
pub fn softmax_rows<T: Scalar>(logits: &[T], n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.chunks_exact(n) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let start = out.len();
        let mut z = T::zero();
        for &v in row {
            let e = (v - max).exp();
            z += e;
            out.push(e);
        }
        out[start..].iter_mut().for_each(|p| *p = *p / z);
    }
    out
}

fn log_softmax_at<T: Scalar>(row: &[T], c: usize) -> f64 {
    let max = row.iter().map(|v| v.as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = row.iter().map(|v| (v.as_f64() - max).exp()).sum();
    row[c].as_f64() - max - z.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(g: &mut Graph<f64>, shape: Vec<usize>, data: Vec<f64>, grad: bool) -> Var {
        let mut t = Tensor::new(shape, data).unwrap();
        t.requires_grad = grad;
        g.leaf(t)
    }

    #[test]
    fn relu_clamps_negatives() {
        let mut g = Graph::<f64>::new();
        let x = leaf(&mut g, vec![3], vec![-1.0, 0.0, 2.0], false);
        let y = g.relu(x);
        assert_eq!(g.data(y), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn identity_kernel_conv_is_identity() {
        let mut g = Graph::<f64>::new();
        let c = 3;
        let x: Vec<f64> = (0..2 * 4 * c).map(|i| i as f64 * 0.5 - 3.0).collect();
        let mut w = vec![0.0; c * c];
        (0..c).for_each(|i| w[i * c + i] = 1.0);
        let xv = leaf(&mut g, vec![2, 4, c], x.clone(), false);
        let wv = leaf(&mut g, vec![1, c, c], w, false);
        let bv = leaf(&mut g, vec![c], vec![0.0; c], false);
        for causal in [true, false] {
            let y = g.conv1d(xv, wv, bv, 1, causal).unwrap();
            assert_eq!(g.data(y), x.as_slice());
        }
    }

    #[test]
    fn causal_conv_hand_example() {
        let mut g = Graph::<f64>::new();
        let x = leaf(&mut g, vec![1, 4, 1], vec![1.0, 2.0, 3.0, 4.0], false);
        let w = leaf(&mut g, vec![3, 1, 1], vec![1.0, 1.0, 1.0], false);
        let b = leaf(&mut g, vec![1], vec![0.0], false);
        let y = g.conv1d(x, w, b, 1, true).unwrap();
        assert_eq!(g.data(y), &[1.0, 3.0, 6.0, 9.0]);
    }

    #[test]
    fn dilated_causal_taps() {
        // Output position 2 (1-based) with k=3, r=2 reads positions 2, 0, -2:
        // only input 2 is real. Position 1 never contributes.
        let mut g = Graph::<f64>::new();
        let w = leaf(&mut g, vec![3, 1, 1], vec![100.0, 10.0, 1.0], false);
        let b = leaf(&mut g, vec![1], vec![0.0], false);
        let x = leaf(&mut g, vec![1, 4, 1], vec![1.0, 2.0, 3.0, 4.0], false);
        let y = g.conv1d(x, w, b, 2, true).unwrap();
        assert_eq!(g.data(y)[1], 2.0);
        assert_eq!(g.data(y)[2], 3.0 + 10.0 * 1.0);
        let x2 = leaf(&mut g, vec![1, 4, 1], vec![7.0, 2.0, 3.0, 4.0], false);
        let y2 = g.conv1d(x2, w, b, 2, true).unwrap();
        assert_eq!(g.data(y)[1], g.data(y2)[1]);
    }

    #[test]
    fn non_causal_conv_sees_both_sides() {
        let mut g = Graph::<f64>::new();
        let x = leaf(&mut g, vec![1, 5, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0], false);
        let w = leaf(&mut g, vec![3, 1, 1], vec![1.0, 10.0, 100.0], false);
        let b = leaf(&mut g, vec![1], vec![0.5], false);
        let y = g.conv1d(x, w, b, 2, false).unwrap();
        // position 2 (0-based) reads 0, 2, 4
        assert_eq!(g.data(y)[2], 1.0 + 30.0 + 500.0 + 0.5);
        assert_eq!(g.data(y)[0], 10.0 + 300.0 + 0.5);
    }

    #[test]
    fn conv_rejects_bad_geometry() {
        let mut g = Graph::<f64>::new();
        let x = leaf(&mut g, vec![1, 4, 2], vec![0.0; 8], false);
        let w = leaf(&mut g, vec![2, 2, 1], vec![0.0; 4], false);
        let b = leaf(&mut g, vec![1], vec![0.0], false);
        assert!(matches!(g.conv1d(x, w, b, 1, false), Err(Error::EvenKernel(2))));
        assert!(g.conv1d(x, w, b, 1, true).is_ok());
        let w3 = leaf(&mut g, vec![3, 3, 1], vec![0.0; 9], false);
        assert!(matches!(
            g.conv1d(x, w3, b, 1, true),
            Err(Error::ChannelMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn layer_norm_examples() {
        let mut g = Graph::<f64>::new();
        let ones = leaf(&mut g, vec![4], vec![1.0; 4], false);
        let zeros = leaf(&mut g, vec![4], vec![0.0; 4], false);
        let x = leaf(&mut g, vec![4], vec![5.0; 4], false);
        let y = g.layer_norm(x, ones, zeros).unwrap();
        assert_eq!(g.data(y), &[0.0; 4]);

        let one2 = leaf(&mut g, vec![2], vec![1.0; 2], false);
        let zero2 = leaf(&mut g, vec![2], vec![0.0; 2], false);
        let x2 = leaf(&mut g, vec![2], vec![1.0, 3.0], false);
        let y2 = g.layer_norm(x2, one2, zero2).unwrap();
        for (a, b) in g.data(y2).iter().zip([-1.0, 1.0]) {
            assert!((a - b).abs() < 1e-7);
        }

        let shift = leaf(&mut g, vec![2], vec![0.25, -4.0], false);
        let y3 = g.layer_norm(x2, zero2, shift).unwrap();
        assert_eq!(g.data(y3), &[0.25, -4.0]);
    }

    #[test]
    fn embedding_rows_and_range() {
        let mut g = Graph::<f64>::new();
        let table = leaf(&mut g, vec![3, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], false);
        let y = g.embedding(table, &[0, 2], &[1, 2]).unwrap();
        assert_eq!(g.shape(y), &[1, 2, 2]);
        assert_eq!(g.data(y), &[1.0, 2.0, 5.0, 6.0]);
        assert!(matches!(
            g.embedding(table, &[3], &[1]),
            Err(Error::IdOutOfRange { id: 3, rows: 3 })
        ));
    }

    #[test]
    fn identity_affine_is_identity() {
        let mut g = Graph::<f64>::new();
        let x = leaf(&mut g, vec![2, 2], vec![1.0, -2.0, 3.5, 0.0], false);
        let w = leaf(&mut g, vec![2, 2], vec![1.0, 0.0, 0.0, 1.0], false);
        let b = leaf(&mut g, vec![2], vec![0.0; 2], false);
        let y = g.affine(x, w, b).unwrap();
        assert_eq!(g.data(y), g.data(x));
    }

    #[test]
    fn xent_examples() {
        let mut g = Graph::<f64>::new();
        let uniform = leaf(&mut g, vec![1, 4], vec![0.3; 4], false);
        let l = g.softmax_xent(uniform, &[2]).unwrap();
        assert!((g.data(l)[0] - 4f64.ln()).abs() < 1e-12);

        let peaked = leaf(&mut g, vec![1, 4], vec![0.0, 0.0, 1000.0, 0.0], false);
        let l = g.softmax_xent(peaked, &[2]).unwrap();
        assert!(g.data(l)[0].abs() < 1e-12);

        let rows = leaf(&mut g, vec![2, 3], vec![0.1, 0.7, -0.4, 2.0, 0.0, 1.0], false);
        let both = g.softmax_xent(rows, &[1, 2]).unwrap();
        let r0 = leaf(&mut g, vec![1, 3], vec![0.1, 0.7, -0.4], false);
        let r1 = leaf(&mut g, vec![1, 3], vec![2.0, 0.0, 1.0], false);
        let l0 = g.softmax_xent(r0, &[1]).unwrap();
        let l1 = g.softmax_xent(r1, &[2]).unwrap();
        let mean = (g.data(l0)[0] + g.data(l1)[0]) / 2.0;
        assert!((g.data(both)[0] - mean).abs() < 1e-12);

        assert!(matches!(
            g.softmax_xent(rows, &[0, 1]),
            Err(Error::InvalidTarget { target: 0, .. })
        ));
        assert!(matches!(
            g.softmax_xent(rows, &[1, 3]),
            Err(Error::InvalidTarget { target: 3, .. })
        ));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let p = softmax_rows(&logits, 8);
        for row in p.chunks_exact(8) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_loss_gradient_is_input() {
        let mut g = Graph::<f64>::new();
        let w = leaf(&mut g, vec![3], vec![0.5, -1.0, 2.0], true);
        let x = leaf(&mut g, vec![3], vec![4.0, 5.0, -6.0], false);
        let p = g.mul(w, x).unwrap();
        let l = g.sum(p);
        g.backward(l).unwrap();
        assert_eq!(g.grad(w).unwrap(), &[4.0, 5.0, -6.0]);
        assert!(g.grad(x).is_none());
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut g = Graph::<f64>::new();
        let w = leaf(&mut g, vec![2], vec![1.0, 2.0], true);
        let y = g.relu(w);
        assert!(matches!(g.backward(y), Err(Error::NonScalarBackward(_))));
    }

    #[test]
    fn gather_with_zero_rows_and_concat() {
        let mut g = Graph::<f64>::new();
        let x = leaf(&mut g, vec![1, 3, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], false);
        let y = g.gather_rows(x, &[Some(2), None, Some(0)]).unwrap();
        assert_eq!(g.data(y), &[5.0, 6.0, 0.0, 0.0, 1.0, 2.0]);
        let z = g.concat(y, y).unwrap();
        assert_eq!(g.shape(z), &[3, 4]);
        assert_eq!(&g.data(z)[..4], &[5.0, 6.0, 5.0, 6.0]);
    }
}

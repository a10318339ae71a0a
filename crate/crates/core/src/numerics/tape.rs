//! Reverse-mode differentiation over a linear record of primitive calls.
//!
//! Nodes are appended in evaluation order, so the record is already a
//! topological order of the computation graph; [`Tape::backward`] walks it in
//! reverse and visits each node once.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::ops::{self, Activation};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Conv2d {
        x: Var,
        w: Var,
        b: Var,
        stride: (usize, usize),
        padding: (usize, usize),
    },
    ConvTranspose2d {
        x: Var,
        w: Var,
        b: Var,
        stride: (usize, usize),
        padding: (usize, usize),
    },
    Dense {
        x: Var,
        w: Var,
        b: Var,
    },
    Activation {
        x: Var,
        kind: Activation,
    },
    MaxPool {
        x: Var,
        argmax: Vec<usize>,
    },
    Reshape {
        x: Var,
    },
    ConcatChannels {
        a: Var,
        b: Var,
    },
    Add {
        a: Var,
        b: Var,
    },
    Scale {
        x: Var,
        factor: f64,
    },
    WeightedSum {
        x: Var,
        weights: Tensor,
    },
    BceLogits {
        logits: Var,
        targets: Tensor,
    },
    SoftmaxCrossEntropy {
        logits: Var,
        labels: Vec<usize>,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Record of primitive applications plus the registry of trainable leaves.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<Var>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Records a value that is not differentiated.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Records a trainable leaf; its gradient is reported by
    /// [`Gradients::params`] in registration order.
    pub fn param(&mut self, value: Tensor) -> Var {
        let v = self.push(value, Op::Leaf, true);
        self.params.push(v);
        v
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn conv2d(&mut self, x: Var, w: Var, b: Var, stride: (usize, usize), padding: (usize, usize)) -> Result<Var> {
        let y = ops::conv2d(self.value(x), self.value(w), self.value(b), stride, padding)?;
        let rg = self.needs(x) || self.needs(w) || self.needs(b);
        Ok(self.push(
            y,
            Op::Conv2d {
                x,
                w,
                b,
                stride,
                padding,
            },
            rg,
        ))
    }

    pub fn conv2d_transpose(
        &mut self,
        x: Var,
        w: Var,
        b: Var,
        stride: (usize, usize),
        padding: (usize, usize),
    ) -> Result<Var> {
        let y = ops::conv2d_transpose(self.value(x), self.value(w), self.value(b), stride, padding)?;
        let rg = self.needs(x) || self.needs(w) || self.needs(b);
        Ok(self.push(
            y,
            Op::ConvTranspose2d {
                x,
                w,
                b,
                stride,
                padding,
            },
            rg,
        ))
    }

    pub fn dense(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let y = ops::dense(self.value(x), self.value(w), self.value(b))?;
        let rg = self.needs(x) || self.needs(w) || self.needs(b);
        Ok(self.push(y, Op::Dense { x, w, b }, rg))
    }

    pub fn activation(&mut self, x: Var, kind: Activation) -> Var {
        let y = ops::activation(self.value(x), kind);
        let rg = self.needs(x);
        self.push(y, Op::Activation { x, kind }, rg)
    }

    pub fn max_pool2d(&mut self, x: Var, window: (usize, usize)) -> Result<Var> {
        let (y, argmax) = ops::max_pool2d_indexed(self.value(x), window)?;
        let rg = self.needs(x);
        Ok(self.push(y, Op::MaxPool { x, argmax }, rg))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let y = self.value(x).reshape(shape)?;
        let rg = self.needs(x);
        Ok(self.push(y, Op::Reshape { x }, rg))
    }

    /// Concatenates two `[batch, c, h, w]` tensors along the channel axis.
    pub fn concat_channels(&mut self, a: Var, b: Var) -> Result<Var> {
        let [na, ca, ha, wa] = self.value(a).dims4("concat_channels lhs")?;
        let [nb, cb, hb, wb] = self.value(b).dims4("concat_channels rhs")?;
        if (na, ha, wa) != (nb, hb, wb) {
            return Err(Error::Shape(format!(
                "concat_channels: batch/height/width ({na},{ha},{wa}) vs ({nb},{hb},{wb})"
            )));
        }
        let (la, lb) = (ca * ha * wa, cb * hb * wb);
        let mut data = Vec::with_capacity(na * (la + lb));
        for s in 0..na {
            data.extend_from_slice(self.value(a).row(s));
            data.extend_from_slice(self.value(b).row(s));
        }
        let y = Tensor::new(vec![na, ca + cb, ha, wa], data)?;
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(y, Op::ConcatChannels { a, b }, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::Shape(format!(
                "add: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        let mut y = self.value(a).clone();
        y.add_assign(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(y, Op::Add { a, b }, rg))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let y = self.value(x).map(|v| v * factor);
        let rg = self.needs(x);
        self.push(y, Op::Scale { x, factor }, rg)
    }

    /// Scalar `Σ x ⊙ weights`.
    pub fn weighted_sum(&mut self, x: Var, weights: Tensor) -> Result<Var> {
        if self.value(x).shape() != weights.shape() {
            return Err(Error::Shape(format!(
                "weighted_sum: {:?} vs weights {:?}",
                self.value(x).shape(),
                weights.shape()
            )));
        }
        let y = Tensor::scalar(self.value(x).dot(&weights));
        let rg = self.needs(x);
        Ok(self.push(y, Op::WeightedSum { x, weights }, rg))
    }

    /// Scalar sum of all elements.
    pub fn sum(&mut self, x: Var) -> Var {
        let ones = Tensor::full(self.value(x).shape(), 1.0);
        self.weighted_sum(x, ones).expect("shapes agree by construction")
    }

    pub fn bce_logits(&mut self, logits: Var, targets: Tensor) -> Result<Var> {
        let loss = ops::bce_logits(self.value(logits), &targets)?;
        let rg = self.needs(logits);
        Ok(self.push(Tensor::scalar(loss), Op::BceLogits { logits, targets }, rg))
    }

    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let loss = ops::softmax_cross_entropy(self.value(logits), labels)?;
        let rg = self.needs(logits);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::SoftmaxCrossEntropy {
                logits,
                labels: labels.to_vec(),
            },
            rg,
        ))
    }

    /// Gradients of the scalar `loss` with respect to every recorded value.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let shape = self.value(loss).shape();
        if shape.iter().product::<usize>() != 1 {
            return Err(Error::Shape(format!("backward needs a scalar loss, got {shape:?}")));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::full(shape, 1.0));

        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad {
                continue;
            }
            let Some(gy) = grads[id].take() else {
                continue;
            };
            match &node.op {
                Op::Leaf => {
                    grads[id] = Some(gy);
                }
                Op::Conv2d {
                    x,
                    w,
                    b,
                    stride,
                    padding,
                } => {
                    let g = ops::conv2d_backward(
                        self.value(*x),
                        self.value(*w),
                        &gy,
                        *stride,
                        *padding,
                        [self.needs(*x), self.needs(*w), self.needs(*b)],
                    )?;
                    accumulate(&mut grads, *x, g.x);
                    accumulate(&mut grads, *w, g.w);
                    accumulate(&mut grads, *b, g.b);
                }
                Op::ConvTranspose2d {
                    x,
                    w,
                    b,
                    stride,
                    padding,
                } => {
                    let g = ops::conv2d_transpose_backward(
                        self.value(*x),
                        self.value(*w),
                        &gy,
                        *stride,
                        *padding,
                        [self.needs(*x), self.needs(*w), self.needs(*b)],
                    )?;
                    accumulate(&mut grads, *x, g.x);
                    accumulate(&mut grads, *w, g.w);
                    accumulate(&mut grads, *b, g.b);
                }
                Op::Dense { x, w, b } => {
                    let g = ops::dense_backward(
                        self.value(*x),
                        self.value(*w),
                        &gy,
                        [self.needs(*x), self.needs(*w), self.needs(*b)],
                    )?;
                    accumulate(&mut grads, *x, g.x);
                    accumulate(&mut grads, *w, g.w);
                    accumulate(&mut grads, *b, g.b);
                }
                Op::Activation { x, kind } => {
                    let input = self.value(*x).data();
                    let mut gx = gy;
                    gx.data_mut()
                        .iter_mut()
                        .zip(input.iter().zip(node.value.data()))
                        .for_each(|(g, (&xi, &yi))| *g *= kind.derivative(xi, yi));
                    accumulate(&mut grads, *x, Some(gx));
                }
                Op::MaxPool { x, argmax } => {
                    let mut gx = Tensor::zeros(self.value(*x).shape());
                    for (g, &src) in gy.data().iter().zip(argmax) {
                        gx.data_mut()[src] += g;
                    }
                    accumulate(&mut grads, *x, Some(gx));
                }
                Op::Reshape { x } => {
                    let gx = gy.reshape(self.value(*x).shape())?;
                    accumulate(&mut grads, *x, Some(gx));
                }
                Op::ConcatChannels { a, b } => {
                    let (sa, sb) = (self.value(*a).shape(), self.value(*b).shape());
                    let n = sa[0];
                    let (la, lb) = (self.value(*a).len() / n, self.value(*b).len() / n);
                    let mut ga = Vec::with_capacity(n * la);
                    let mut gb = Vec::with_capacity(n * lb);
                    for s in 0..n {
                        let row = gy.row(s);
                        ga.extend_from_slice(&row[..la]);
                        gb.extend_from_slice(&row[la..]);
                    }
                    let ga = self.needs(*a).then(|| Tensor::new(sa.to_vec(), ga)).transpose()?;
                    let gb = self.needs(*b).then(|| Tensor::new(sb.to_vec(), gb)).transpose()?;
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Add { a, b } => {
                    if self.needs(*a) {
                        accumulate(&mut grads, *a, Some(gy.clone()));
                    }
                    accumulate(&mut grads, *b, Some(gy));
                }
                Op::Scale { x, factor } => {
                    accumulate(&mut grads, *x, Some(gy.map(|g| g * factor)));
                }
                Op::WeightedSum { x, weights } => {
                    let s = gy.data()[0];
                    accumulate(&mut grads, *x, Some(weights.map(|w| w * s)));
                }
                Op::BceLogits { logits, targets } => {
                    let s = gy.data()[0];
                    let g = ops::bce_logits_grad(self.value(*logits), targets).map(|v| v * s);
                    accumulate(&mut grads, *logits, Some(g));
                }
                Op::SoftmaxCrossEntropy { logits, labels } => {
                    let s = gy.data()[0];
                    let g = ops::softmax_cross_entropy_grad(self.value(*logits), labels).map(|v| v * s);
                    accumulate(&mut grads, *logits, Some(g));
                }
            }
        }

        // Only leaves keep their gradient; reached parameters are Some.
        let params = self
            .params
            .iter()
            .map(|&p| {
                grads[p.0]
                    .take()
                    .unwrap_or_else(|| Tensor::zeros(self.value(p).shape()))
            })
            .collect();
        Ok(Gradients { params })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Option<Tensor>) {
    let Some(g) = g else { return };
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot => *slot = Some(g),
    }
}

/// Parameter gradients in registration order; unreachable parameters get zeros.
#[derive(Debug, Clone)]
pub struct Gradients {
    params: Vec<Tensor>,
}

impl Gradients {
    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn into_params(self) -> Vec<Tensor> {
        self.params
    }
}

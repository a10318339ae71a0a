//! Sequential layer stacks with named parameter sets.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::ops::{Activation, ConvGeometry};
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense {
        units: usize,
    },
    Conv2d {
        out_channels: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
        padding: (usize, usize),
    },
    ConvTranspose2d {
        out_channels: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
        padding: (usize, usize),
    },
    Activation(Activation),
    MaxPool {
        window: (usize, usize),
    },
    Flatten,
    /// Reshape each sample to the given per-sample shape.
    Reshape(Vec<usize>),
}

/// Named tensors in a fixed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor) {
        self.names.push(name.into());
        self.tensors.push(tensor);
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    /// Entries whose names start with `prefix`, with the prefix stripped.
    pub fn strip_prefix(&self, prefix: &str) -> ParamSet {
        let mut out = ParamSet::new();
        for (n, t) in self.iter() {
            if let Some(rest) = n.strip_prefix(prefix) {
                out.push(rest, t.clone());
            }
        }
        out
    }

    /// Copy of `self` with every name prefixed.
    pub fn with_prefix(&self, prefix: &str) -> ParamSet {
        let mut out = ParamSet::new();
        for (n, t) in self.iter() {
            out.push(format!("{prefix}{n}"), t.clone());
        }
        out
    }

    pub fn extend(&mut self, other: ParamSet) {
        self.names.extend(other.names);
        self.tensors.extend(other.tensors);
    }
}

impl FromIterator<(String, Tensor)> for ParamSet {
    fn from_iter<I: IntoIterator<Item = (String, Tensor)>>(iter: I) -> Self {
        let mut out = ParamSet::new();
        for (n, t) in iter {
            out.push(n, t);
        }
        out
    }
}

/// A validated stack of layers with precomputed per-sample shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequential {
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
    shapes: Vec<Vec<usize>>,
    param_specs: Vec<(String, Vec<usize>, usize, usize)>,
}

impl Sequential {
    /// Checks that `layers` chain from `input_shape` (one sample, no batch
    /// axis) and records every intermediate shape.
    pub fn new(input_shape: &[usize], layers: Vec<Layer>) -> Result<Self> {
        let mut shape = input_shape.to_vec();
        let mut shapes = Vec::with_capacity(layers.len());
        let mut param_specs = Vec::new();
        for (i, layer) in layers.iter().enumerate() {
            shape = match layer {
                Layer::Dense { units } => {
                    let [n_in] = shape[..] else {
                        return Err(Error::Shape(format!(
                            "layer {i}: dense expects a flat input, got {shape:?}"
                        )));
                    };
                    param_specs.push((format!("l{i}.weight"), vec![*units, n_in], n_in, *units));
                    param_specs.push((format!("l{i}.bias"), vec![*units], 0, 0));
                    vec![*units]
                }
                Layer::Conv2d {
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => {
                    let [c, h, w] = chw(&shape, i)?;
                    let geo = ConvGeometry::new(c, (h, w), *kernel, *stride, *padding)
                        .map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
                    let k = kernel.0 * kernel.1;
                    param_specs.push((
                        format!("l{i}.weight"),
                        vec![*out_channels, c, kernel.0, kernel.1],
                        c * k,
                        out_channels * k,
                    ));
                    param_specs.push((format!("l{i}.bias"), vec![*out_channels], 0, 0));
                    vec![*out_channels, geo.out_h, geo.out_w]
                }
                Layer::ConvTranspose2d {
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => {
                    let [c, h, w] = chw(&shape, i)?;
                    let geo = ConvGeometry::for_transpose(*out_channels, (h, w), *kernel, *stride, *padding)
                        .map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
                    let k = kernel.0 * kernel.1;
                    param_specs.push((
                        format!("l{i}.weight"),
                        vec![c, *out_channels, kernel.0, kernel.1],
                        c * k,
                        out_channels * k,
                    ));
                    param_specs.push((format!("l{i}.bias"), vec![*out_channels], 0, 0));
                    vec![*out_channels, geo.in_h, geo.in_w]
                }
                Layer::Activation(_) => shape,
                Layer::MaxPool { window } => {
                    let [c, h, w] = chw(&shape, i)?;
                    if window.0 == 0 || window.1 == 0 || window.0 > h || window.1 > w {
                        return Err(Error::Shape(format!(
                            "layer {i}: pool window {window:?} does not fit {h}x{w}"
                        )));
                    }
                    vec![c, h / window.0, w / window.1]
                }
                Layer::Flatten => vec![shape.iter().product()],
                Layer::Reshape(target) => {
                    if target.iter().product::<usize>() != shape.iter().product::<usize>() || target.contains(&0) {
                        return Err(Error::Shape(format!(
                            "layer {i}: cannot reshape {shape:?} to {target:?}"
                        )));
                    }
                    target.clone()
                }
            };
            shapes.push(shape.clone());
        }
        Ok(Sequential {
            input_shape: input_shape.to_vec(),
            layers,
            shapes,
            param_specs,
        })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    /// Per-sample output shape.
    pub fn output_shape(&self) -> &[usize] {
        self.shapes.last().map(Vec::as_slice).unwrap_or(&self.input_shape)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Names and shapes of the parameters, in the order `forward` expects.
    pub fn param_shapes(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.param_specs.iter().map(|(n, s, _, _)| (n.as_str(), s.as_slice()))
    }

    /// Scaled-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamSet {
        let mut out = ParamSet::new();
        for (name, shape, fan_in, fan_out) in &self.param_specs {
            let t = if fan_in + fan_out == 0 {
                Tensor::zeros(shape)
            } else {
                let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
                Tensor::from_fn(shape, |_| rng.random_range(-limit..limit))
            };
            out.push(name.clone(), t);
        }
        out
    }

    /// Checks that `params` matches this network's names and shapes.
    pub fn check_params(&self, params: &ParamSet) -> Result<()> {
        if params.len() != self.param_specs.len() {
            return Err(Error::Shape(format!(
                "network has {} parameter tensors, got {}",
                self.param_specs.len(),
                params.len()
            )));
        }
        for ((name, shape, _, _), (pn, pt)) in self.param_specs.iter().zip(params.iter()) {
            if name != pn || shape.as_slice() != pt.shape() {
                return Err(Error::Shape(format!(
                    "parameter {pn} {:?} does not match expected {name} {shape:?}",
                    pt.shape()
                )));
            }
        }
        Ok(())
    }

    /// Records the forward pass of a `[batch, input_shape...]` value.
    pub fn forward(&self, tape: &mut Tape, x: Var, params: &[Var]) -> Result<Var> {
        if params.len() != self.param_specs.len() {
            return Err(Error::Shape(format!(
                "forward needs {} parameter handles, got {}",
                self.param_specs.len(),
                params.len()
            )));
        }
        let batch = tape.value(x).shape()[0];
        if tape.value(x).shape()[1..] != self.input_shape[..] {
            return Err(Error::Shape(format!(
                "network input must be [batch, {:?}], got {:?}",
                self.input_shape,
                tape.value(x).shape()
            )));
        }
        let mut h = x;
        let mut p = params.iter().copied();
        for (layer, shape) in self.layers.iter().zip(&self.shapes) {
            h = match layer {
                Layer::Dense { .. } => {
                    let (w, b) = (p.next().unwrap(), p.next().unwrap());
                    tape.dense(h, w, b)?
                }
                Layer::Conv2d { stride, padding, .. } => {
                    let (w, b) = (p.next().unwrap(), p.next().unwrap());
                    tape.conv2d(h, w, b, *stride, *padding)?
                }
                Layer::ConvTranspose2d { stride, padding, .. } => {
                    let (w, b) = (p.next().unwrap(), p.next().unwrap());
                    tape.conv2d_transpose(h, w, b, *stride, *padding)?
                }
                Layer::Activation(kind) => tape.activation(h, *kind),
                Layer::MaxPool { window } => tape.max_pool2d(h, *window)?,
                Layer::Flatten | Layer::Reshape(_) => {
                    let mut full = vec![batch];
                    full.extend_from_slice(shape);
                    tape.reshape(h, &full)?
                }
            };
        }
        Ok(h)
    }

    /// Registers `params` as trainable leaves on `tape` and runs `forward`.
    pub fn forward_trainable(&self, tape: &mut Tape, x: Var, params: &ParamSet) -> Result<(Var, Vec<Var>)> {
        self.check_params(params)?;
        let vars: Vec<Var> = params.tensors().iter().map(|t| tape.param(t.clone())).collect();
        let y = self.forward(tape, x, &vars)?;
        Ok((y, vars))
    }

    /// Records `params` as constants and runs `forward`.
    pub fn forward_frozen(&self, tape: &mut Tape, x: Var, params: &ParamSet) -> Result<Var> {
        self.check_params(params)?;
        let vars: Vec<Var> = params.tensors().iter().map(|t| tape.constant(t.clone())).collect();
        self.forward(tape, x, &vars)
    }

    /// Plain inference without keeping the record.
    pub fn predict(&self, params: &ParamSet, x: Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let xv = tape.constant(x);
        let y = self.forward_frozen(&mut tape, xv, params)?;
        Ok(tape.value(y).clone())
    }
}

fn chw(shape: &[usize], layer: usize) -> Result<[usize; 3]> {
    match *shape {
        [c, h, w] => Ok([c, h, w]),
        _ => Err(Error::Shape(format!(
            "layer {layer}: expects [channels, height, width], got {shape:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_chain() {
        let net = Sequential::new(
            &[3, 9, 64],
            vec![
                Layer::Conv2d {
                    out_channels: 4,
                    kernel: (3, 5),
                    stride: (1, 1),
                    padding: (1, 2),
                },
                Layer::Activation(Activation::Relu),
                Layer::MaxPool { window: (1, 2) },
                Layer::Flatten,
                Layer::Dense { units: 2 },
            ],
        )
        .unwrap();
        assert_eq!(net.output_shape(), &[2]);
        let shapes: Vec<_> = net.param_shapes().map(|(_, s)| s.to_vec()).collect();
        assert_eq!(shapes, vec![vec![4, 3, 3, 5], vec![4], vec![2, 4 * 9 * 32], vec![2]]);
    }

    #[test]
    fn bad_chain_rejected() {
        assert!(Sequential::new(&[3, 9, 64], vec![Layer::Dense { units: 2 }]).is_err());
        assert!(Sequential::new(&[10], vec![Layer::Reshape(vec![3, 3])]).is_err());
    }

    #[test]
    fn init_is_bounded_and_seeded() {
        let net = Sequential::new(&[5], vec![Layer::Dense { units: 7 }]).unwrap();
        let a = net.init_params(&mut ChaCha8Rng::seed_from_u64(1));
        let b = net.init_params(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        let limit = libm::sqrt(6.0 / 12.0);
        assert!(a.tensors()[0].data().iter().all(|v| v.abs() <= limit));
        assert!(a.tensors()[1].data().iter().all(|&v| v == 0.0));
    }
}

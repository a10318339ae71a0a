//! Central finite-difference checks for every differentiable primitive and
//! the conv2d / conv2d_transpose adjoint identity.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::ops::{conv2d, conv2d_transpose};
use super::{Activation, Layer, Sequential, Tape, Tensor, Var};
use crate::error::Result;
use crate::rng;

/// Finite-difference step.
pub const STEP: f64 = 1e-5;

/// Worst relative error seen for one primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub primitive: String,
    pub cases: usize,
    pub max_rel_error: f64,
}

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    Tensor::from_fn(shape, |_| rng.random_range(lo..hi))
}

/// Values with magnitude at least `gap`, so kinks lie far from every input.
fn away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize], gap: f64) -> Tensor {
    Tensor::from_fn(shape, |_| {
        let m = rng.random_range(gap..1.5);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    })
}

/// Distinct values spaced by at least 0.01, so pooling argmaxes are stable.
fn distinct(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n: usize = shape.iter().product();
    let mut grid: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
    for i in (1..n).rev() {
        grid.swap(i, rng.random_range(0..=i));
    }
    Tensor::new(shape.to_vec(), grid).expect("sized from shape")
}

/// Relative error `‖a − n‖ / max(‖a‖, ‖n‖)` between the tape gradient and
/// central differences of `f` at `inputs`.
pub fn check<F>(inputs: &[Tensor], f: F) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let eval = |xs: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|x| tape.param(x.clone())).collect();
        let y = f(&mut tape, &vars)?;
        Ok(tape.value(y).data()[0])
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|x| tape.param(x.clone())).collect();
    let y = f(&mut tape, &vars)?;
    let analytic = tape.backward(y)?.into_params();

    let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
    let mut xs = inputs.to_vec();
    for (i, g) in analytic.iter().enumerate() {
        for j in 0..xs[i].len() {
            let orig = xs[i].data()[j];
            xs[i].data_mut()[j] = orig + STEP;
            let up = eval(&xs)?;
            xs[i].data_mut()[j] = orig - STEP;
            let down = eval(&xs)?;
            xs[i].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let a = g.data()[j];
            diff += (a - numeric) * (a - numeric);
            na += a * a;
            nn += numeric * numeric;
        }
    }
    let scale = libm::sqrt(na.max(nn));
    Ok(if scale == 0.0 { 0.0 } else { libm::sqrt(diff) / scale })
}

/// Reduces any tensor to a scalar with fixed random weights.
fn project(tape: &mut Tape, y: Var, weights: &Tensor) -> Result<Var> {
    tape.weighted_sum(y, weights.clone())
}

fn conv_case(rng: &mut ChaCha8Rng, transpose: bool) -> Result<f64> {
    let n = rng.random_range(1..3);
    let cin = rng.random_range(1..4);
    let cout = rng.random_range(1..4);
    let kh = rng.random_range(1..4);
    let kw = rng.random_range(1..4);
    let stride = (rng.random_range(1..3), rng.random_range(1..3));
    let padding = (rng.random_range(0..kh), rng.random_range(0..kw));
    let (h, w) = if transpose {
        (rng.random_range(1..5), rng.random_range(1..5))
    } else {
        (kh + rng.random_range(0..4), kw + rng.random_range(0..4))
    };
    let x = uniform(rng, &[n, cin, h, w], -1.0, 1.0);
    let wt = if transpose {
        uniform(rng, &[cin, cout, kh, kw], -1.0, 1.0)
    } else {
        uniform(rng, &[cout, cin, kh, kw], -1.0, 1.0)
    };
    let b = uniform(rng, &[cout], -1.0, 1.0);
    let y = if transpose {
        conv2d_transpose(&x, &wt, &b, stride, padding)
    } else {
        conv2d(&x, &wt, &b, stride, padding)
    };
    let y = match y {
        Ok(y) => y,
        // Padding can exceed what a tiny output allows; such draws are skipped.
        Err(_) => return conv_case(rng, transpose),
    };
    let proj = uniform(rng, y.shape(), -1.0, 1.0);
    check(&[x, wt, b], |t, v| {
        let y = if transpose {
            t.conv2d_transpose(v[0], v[1], v[2], stride, padding)?
        } else {
            t.conv2d(v[0], v[1], v[2], stride, padding)?
        };
        project(t, y, &proj)
    })
}

fn dense_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let (b, nin, nout) = (rng.random_range(1..4), rng.random_range(1..6), rng.random_range(1..6));
    let x = uniform(rng, &[b, nin], -1.0, 1.0);
    let w = uniform(rng, &[nout, nin], -1.0, 1.0);
    let bias = uniform(rng, &[nout], -1.0, 1.0);
    let proj = uniform(rng, &[b, nout], -1.0, 1.0);
    check(&[x, w, bias], |t, v| {
        let y = t.dense(v[0], v[1], v[2])?;
        project(t, y, &proj)
    })
}

fn activation_case(rng: &mut ChaCha8Rng, kind: Activation) -> Result<f64> {
    let shape = [rng.random_range(1..4), rng.random_range(1..6)];
    let x = match kind {
        Activation::Relu | Activation::LeakyRelu(_) => away_from_zero(rng, &shape, 1e-2),
        _ => uniform(rng, &shape, -3.0, 3.0),
    };
    let proj = uniform(rng, &shape, -1.0, 1.0);
    check(&[x], |t, v| {
        let y = t.activation(v[0], kind);
        project(t, y, &proj)
    })
}

fn pool_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let window = (rng.random_range(1..3), rng.random_range(1..4));
    let shape = [
        rng.random_range(1..3),
        rng.random_range(1..3),
        window.0 * rng.random_range(1..3),
        window.1 * rng.random_range(1..3),
    ];
    let x = distinct(rng, &shape);
    let out = [shape[0], shape[1], shape[2] / window.0, shape[3] / window.1];
    let proj = uniform(rng, &out, -1.0, 1.0);
    check(&[x], |t, v| {
        let y = t.max_pool2d(v[0], window)?;
        project(t, y, &proj)
    })
}

fn structural_case(rng: &mut ChaCha8Rng, which: &str) -> Result<f64> {
    let shape = [rng.random_range(1..3), rng.random_range(1..3), 2, 3];
    let a = uniform(rng, &shape, -1.0, 1.0);
    let b = uniform(rng, &shape, -1.0, 1.0);
    let factor = rng.random_range(-2.0..2.0);
    let flat = [shape.iter().product::<usize>()];
    let wide = [shape[0], 2 * shape[1], 2, 3];
    let proj_flat = uniform(rng, &flat, -1.0, 1.0);
    let proj = uniform(rng, &shape, -1.0, 1.0);
    let proj_wide = uniform(rng, &wide, -1.0, 1.0);
    match which {
        "reshape" => check(&[a], |t, v| {
            let y = t.reshape(v[0], &flat)?;
            project(t, y, &proj_flat)
        }),
        "concat_channels" => check(&[a, b], |t, v| {
            let y = t.concat_channels(v[0], v[1])?;
            project(t, y, &proj_wide)
        }),
        "add" => check(&[a, b], |t, v| {
            let y = t.add(v[0], v[1])?;
            project(t, y, &proj)
        }),
        "scale" => check(&[a], |t, v| {
            let y = t.scale(v[0], factor);
            project(t, y, &proj)
        }),
        _ => check(&[a], |t, v| project(t, v[0], &proj)),
    }
}

fn loss_case(rng: &mut ChaCha8Rng, softmax: bool) -> Result<f64> {
    let b = rng.random_range(1..6);
    if softmax {
        let k = rng.random_range(2..5);
        let logits = uniform(rng, &[b, k], -4.0, 4.0);
        let labels: Vec<usize> = (0..b).map(|_| rng.random_range(0..k)).collect();
        check(&[logits], |t, v| t.softmax_cross_entropy(v[0], &labels))
    } else {
        let logits = uniform(rng, &[b], -6.0, 6.0);
        let targets = Tensor::from_fn(&[b], |_| if rng.random_bool(0.5) { 1.0 } else { 0.0 });
        check(&[logits], |t, v| t.bce_logits(v[0], targets.clone()))
    }
}

/// A small conv → pool → dense stack, differentiated through its parameters.
fn network_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let net = Sequential::new(
        &[2, 3, 4],
        vec![
            Layer::Conv2d {
                out_channels: 2,
                kernel: (2, 3),
                stride: (1, 1),
                padding: (1, 1),
            },
            Layer::Activation(Activation::Tanh),
            Layer::MaxPool { window: (1, 2) },
            Layer::Flatten,
            Layer::Dense { units: 3 },
        ],
    )?;
    let params = net.init_params(rng);
    let x = uniform(rng, &[2, 2, 3, 4], -1.0, 1.0);
    let labels = [rng.random_range(0..3), rng.random_range(0..3)];
    let mut inputs = vec![x];
    inputs.extend(params.tensors().iter().cloned());
    check(&inputs, |t, v| {
        let y = net.forward(t, v[0], &v[1..])?;
        t.softmax_cross_entropy(y, &labels)
    })
}

/// Runs `cases` random checks per primitive.
pub fn gradient_suite(cases: usize, seed: u64) -> Result<Vec<GradReport>> {
    let mut rng = rng::stream(seed, 20);
    let names = [
        "conv2d",
        "conv2d_transpose",
        "dense",
        "relu",
        "leaky_relu",
        "sigmoid",
        "tanh",
        "max_pool2d",
        "reshape",
        "concat_channels",
        "add",
        "scale",
        "weighted_sum",
        "bce_logits",
        "softmax_cross_entropy",
        "sequential",
    ];
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let mut worst = 0.0f64;
        for _ in 0..cases {
            let err = match name {
                "conv2d" => conv_case(&mut rng, false)?,
                "conv2d_transpose" => conv_case(&mut rng, true)?,
                "dense" => dense_case(&mut rng)?,
                "relu" => activation_case(&mut rng, Activation::Relu)?,
                "leaky_relu" => activation_case(&mut rng, Activation::LeakyRelu(0.2))?,
                "sigmoid" => activation_case(&mut rng, Activation::Sigmoid)?,
                "tanh" => activation_case(&mut rng, Activation::Tanh)?,
                "max_pool2d" => pool_case(&mut rng)?,
                "bce_logits" => loss_case(&mut rng, false)?,
                "softmax_cross_entropy" => loss_case(&mut rng, true)?,
                "sequential" => network_case(&mut rng)?,
                other => structural_case(&mut rng, other)?,
            };
            worst = worst.max(err);
        }
        out.push(GradReport {
            primitive: name.into(),
            cases,
            max_rel_error: worst,
        });
    }
    Ok(out)
}

/// `|⟨conv2d(x, w), y⟩ − ⟨x, conv2d_transpose(y, w)⟩|` relative to the
/// larger inner product, worst over `cases` random geometries.
pub fn adjoint_suite(cases: usize, seed: u64) -> Result<f64> {
    let mut rng = rng::stream(seed, 21);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < cases {
        let n = rng.random_range(1..4);
        let cin = rng.random_range(1..5);
        let cout = rng.random_range(1..5);
        let k = (rng.random_range(1..5), rng.random_range(1..6));
        let s = (rng.random_range(1..4), rng.random_range(1..4));
        let p = (rng.random_range(0..k.0), rng.random_range(0..k.1));
        // Input sizes that the transpose reproduces exactly.
        let oh = rng.random_range(1..6);
        let ow = rng.random_range(1..6);
        let h = (oh - 1) * s.0 + k.0;
        let w = (ow - 1) * s.1 + k.1;
        if h <= 2 * p.0 || w <= 2 * p.1 {
            continue;
        }
        let (h, w) = (h - 2 * p.0, w - 2 * p.1);
        let x = uniform(&mut rng, &[n, cin, h, w], -1.0, 1.0);
        let wt = uniform(&mut rng, &[cout, cin, k.0, k.1], -1.0, 1.0);
        let fwd = conv2d(&x, &wt, &Tensor::zeros(&[cout]), s, p)?;
        let y = uniform(&mut rng, fwd.shape(), -1.0, 1.0);
        let back = conv2d_transpose(&y, &wt, &Tensor::zeros(&[cin]), s, p)?;
        if back.shape() != x.shape() {
            return Err(crate::Error::Shape(format!(
                "adjoint geometry mismatch: {:?} vs {:?}",
                back.shape(),
                x.shape()
            )));
        }
        let (lhs, rhs) = (fwd.dot(&y), x.dot(&back));
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        worst = worst.max((lhs - rhs).abs() / scale);
        done += 1;
    }
    Ok(worst)
}

//! Conditional DCGAN over labeled, unit-range TFRs.
//!
//! The generator sees `[z ‖ one_hot(y)]`; the discriminator sees the TFR with
//! one constant plane per class appended as extra input channels (ones in the
//! plane of the sample's class, zeros elsewhere). Each outer iteration makes
//! `d_steps_per_g_step` discriminator updates, each on a fresh real minibatch
//! and a fresh fake minibatch, followed by one generator update.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{Label, Labeled, Provenance};
use crate::error::{Error, Result};
use crate::numerics::{
    adam_step, bce_logits, softplus, Activation, AdamConfig, AdamState, Layer, ParamSet, Sequential, Tape, Tensor, Var,
};
use crate::rng;
use crate::wavelet::{Normalization, Tfr, TfrAxes};

const LEAK: f64 = 0.2;

/// Generator objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GLossMode {
    /// Minimize `mean log(1 − D(G(z|y)))`, the literal minimax form.
    Saturating,
    /// Minimize `−mean log D(G(z|y))`.
    NonSaturating,
}

/// Network family for the generator/discriminator pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GanArch {
    /// Transposed-convolution generator and strided-convolution
    /// discriminator. Needs at least 5 frequency rows and a time axis
    /// divisible by 8.
    Dcgan {
        generator_widths: (usize, usize),
        discriminator_widths: (usize, usize),
    },
    /// One hidden dense layer per network, for tiny sample shapes.
    Mlp { hidden: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanConfig {
    pub noise_dim: usize,
    pub class_count: usize,
    /// `[channels, freqs, times]`.
    pub tfr_shape: [usize; 3],
    pub d_steps_per_g_step: usize,
    pub batch_size: usize,
    pub iterations: usize,
    pub adam_g: AdamConfig,
    pub adam_d: AdamConfig,
    pub g_loss_mode: GLossMode,
    pub arch: GanArch,
    /// Real and fake samples in the per-iteration accuracy probe (each).
    pub probe_size: usize,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        let adam = AdamConfig {
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            epsilon: 1e-8,
        };
        GanConfig {
            noise_dim: 100,
            class_count: Label::COUNT,
            tfr_shape: [3, 9, 64],
            d_steps_per_g_step: 2,
            batch_size: 16,
            iterations: 5000,
            adam_g: adam,
            adam_d: adam,
            g_loss_mode: GLossMode::NonSaturating,
            arch: GanArch::Dcgan {
                generator_widths: (64, 32),
                discriminator_widths: (32, 64),
            },
            probe_size: 16,
            seed: 0,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.d_steps_per_g_step == 0 {
            return bad("d_steps_per_g_step must be at least 1");
        }
        if self.noise_dim == 0 {
            return bad("noise_dim must be at least 1");
        }
        if self.class_count < 2 {
            return bad("class_count must be at least 2");
        }
        if self.tfr_shape.contains(&0) {
            return bad("tfr_shape extents must be positive");
        }
        if self.batch_size == 0 || self.probe_size == 0 {
            return bad("batch_size and probe_size must be positive");
        }
        Ok(())
    }
}

/// Builds the generator stack: input `[noise_dim + class_count]`, output
/// `tfr_shape` through a Tanh head.
///
/// DCGAN layout for `[C, F, T]`:
/// dense → `[w0, 3, T/8]` → Relu →
/// convT(w0→w1, kernel 3×4, stride 1×2, pad 0×1) → `[w1, 5, T/4]` → Relu →
/// convT(w1→C, kernel (F−4)×4, stride 1×4) → `[C, F, T]` → Tanh.
pub fn generator_net(config: &GanConfig) -> Result<Sequential> {
    config.validate()?;
    let [c, f, t] = config.tfr_shape;
    let input = [config.noise_dim + config.class_count];
    let layers = match config.arch {
        GanArch::Dcgan {
            generator_widths: (w0, w1),
            ..
        } => {
            if f < 5 || t % 8 != 0 {
                return Err(Error::Shape(format!(
                    "DCGAN generator needs >= 5 frequency rows and a time axis divisible by 8, got {f}x{t}"
                )));
            }
            vec![
                Layer::Dense {
                    units: w0 * 3 * (t / 8),
                },
                Layer::Reshape(vec![w0, 3, t / 8]),
                Layer::Activation(Activation::Relu),
                Layer::ConvTranspose2d {
                    out_channels: w1,
                    kernel: (3, 4),
                    stride: (1, 2),
                    padding: (0, 1),
                },
                Layer::Activation(Activation::Relu),
                Layer::ConvTranspose2d {
                    out_channels: c,
                    kernel: (f - 4, 4),
                    stride: (1, 4),
                    padding: (0, 0),
                },
                Layer::Activation(Activation::Tanh),
            ]
        }
        GanArch::Mlp { hidden } => vec![
            Layer::Dense { units: hidden },
            Layer::Activation(Activation::Relu),
            Layer::Dense { units: c * f * t },
            Layer::Reshape(vec![c, f, t]),
            Layer::Activation(Activation::Tanh),
        ],
    };
    let net = Sequential::new(&input, layers)?;
    debug_assert_eq!(net.output_shape(), &config.tfr_shape);
    Ok(net)
}

/// Builds the discriminator stack: input `[C + class_count, F, T]`, output one
/// logit.
///
/// DCGAN layout: conv(→w0, kernel 3×4, stride 1×2, pad 1×1) → LeakyRelu(0.2) →
/// conv(w0→w1, same geometry) → LeakyRelu(0.2) → flatten → dense 1.
pub fn discriminator_net(config: &GanConfig) -> Result<Sequential> {
    config.validate()?;
    let [c, f, t] = config.tfr_shape;
    let input = [c + config.class_count, f, t];
    let layers = match config.arch {
        GanArch::Dcgan {
            discriminator_widths: (w0, w1),
            ..
        } => {
            let conv = |out| Layer::Conv2d {
                out_channels: out,
                kernel: (3, 4),
                stride: (1, 2),
                padding: (1, 1),
            };
            vec![
                conv(w0),
                Layer::Activation(Activation::LeakyRelu(LEAK)),
                conv(w1),
                Layer::Activation(Activation::LeakyRelu(LEAK)),
                Layer::Flatten,
                Layer::Dense { units: 1 },
            ]
        }
        GanArch::Mlp { hidden } => vec![
            Layer::Flatten,
            Layer::Dense { units: hidden },
            Layer::Activation(Activation::LeakyRelu(LEAK)),
            Layer::Dense { units: 1 },
        ],
    };
    Sequential::new(&input, layers)
}

fn check_labels(labels: &[usize], classes: usize) -> Result<()> {
    match labels.iter().find(|&&l| l >= classes) {
        Some(&label) => Err(Error::LabelOutOfRange { label, classes }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    net: Sequential,
    params: ParamSet,
    noise_dim: usize,
    class_count: usize,
    tfr_shape: [usize; 3],
    /// Mean `(min, span)` of the training samples' unit-range maps, given to
    /// generated samples so they can be de-normalized.
    unit_range: (f64, f64),
}

impl Generator {
    pub fn new(config: &GanConfig, params: ParamSet, unit_range: (f64, f64)) -> Result<Self> {
        let net = generator_net(config)?;
        net.check_params(&params)?;
        Ok(Generator {
            net,
            params,
            noise_dim: config.noise_dim,
            class_count: config.class_count,
            tfr_shape: config.tfr_shape,
            unit_range,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn tfr_shape(&self) -> [usize; 3] {
        self.tfr_shape
    }

    pub fn unit_range(&self) -> (f64, f64) {
        self.unit_range
    }

    fn conditioned_input(&self, z: &Tensor, labels: &[usize]) -> Result<Tensor> {
        let [batch, dim] = match *z.shape() {
            [b, d] => [b, d],
            _ => {
                return Err(Error::Shape(format!(
                    "noise must be [batch, noise_dim], got {:?}",
                    z.shape()
                )))
            }
        };
        if dim != self.noise_dim || labels.len() != batch {
            return Err(Error::Shape(format!(
                "noise [{batch}, {dim}] with {} labels; expected noise_dim {}",
                labels.len(),
                self.noise_dim
            )));
        }
        check_labels(labels, self.class_count)?;
        let width = self.noise_dim + self.class_count;
        let mut data = Vec::with_capacity(batch * width);
        for (row, &y) in labels.iter().enumerate() {
            data.extend_from_slice(z.row(row));
            data.extend((0..self.class_count).map(|k| if k == y { 1.0 } else { 0.0 }));
        }
        Tensor::new(vec![batch, width], data)
    }

    fn record(&self, tape: &mut Tape, z: &Tensor, labels: &[usize], trainable: bool) -> Result<(Var, Vec<Var>)> {
        let x = tape.constant(self.conditioned_input(z, labels)?);
        if trainable {
            self.net.forward_trainable(tape, x, &self.params)
        } else {
            Ok((self.net.forward_frozen(tape, x, &self.params)?, Vec::new()))
        }
    }
}

/// `G(z | y)`: `[batch, C, F, T]` with every value strictly inside `(−1, 1)`.
pub fn generator_forward(z: &Tensor, labels: &[usize], generator: &Generator) -> Result<Tensor> {
    let mut tape = Tape::new();
    let (y, _) = generator.record(&mut tape, z, labels, false)?;
    let bound = 1.0 - f64::EPSILON;
    Ok(tape.value(y).map(|v| v.clamp(-bound, bound)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    net: Sequential,
    params: ParamSet,
    class_count: usize,
    tfr_shape: [usize; 3],
}

impl Discriminator {
    pub fn new(config: &GanConfig, params: ParamSet) -> Result<Self> {
        let net = discriminator_net(config)?;
        net.check_params(&params)?;
        Ok(Discriminator {
            net,
            params,
            class_count: config.class_count,
            tfr_shape: config.tfr_shape,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    fn label_planes(&self, labels: &[usize]) -> Result<Tensor> {
        check_labels(labels, self.class_count)?;
        let [_, f, t] = self.tfr_shape;
        let plane = f * t;
        let mut data = Vec::with_capacity(labels.len() * self.class_count * plane);
        for &y in labels {
            for k in 0..self.class_count {
                data.extend(core::iter::repeat_n(if k == y { 1.0 } else { 0.0 }, plane));
            }
        }
        Tensor::new(vec![labels.len(), self.class_count, f, t], data)
    }

    /// Logits `[batch]` for `x` on the tape, reusing `params` handles.
    fn record(&self, tape: &mut Tape, x: Var, labels: &[usize], params: &[Var]) -> Result<Var> {
        let shape = tape.value(x).shape();
        if shape.len() != 4 || shape[1..] != self.tfr_shape || shape[0] != labels.len() {
            return Err(Error::Shape(format!(
                "discriminator input must be [{}, {:?}], got {shape:?}",
                labels.len(),
                self.tfr_shape
            )));
        }
        let planes = tape.constant(self.label_planes(labels)?);
        let input = tape.concat_channels(x, planes)?;
        let logits = self.net.forward(tape, input, params)?;
        tape.reshape(logits, &[labels.len()])
    }

    fn register(&self, tape: &mut Tape, trainable: bool) -> Vec<Var> {
        self.params
            .tensors()
            .iter()
            .map(|t| {
                if trainable {
                    tape.param(t.clone())
                } else {
                    tape.constant(t.clone())
                }
            })
            .collect()
    }
}

/// `D(x | y)` as logits.
pub fn discriminator_forward(x: &Tensor, labels: &[usize], discriminator: &Discriminator) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let params = discriminator.register(&mut tape, false);
    let xv = tape.constant(x.clone());
    let logits = discriminator.record(&mut tape, xv, labels, &params)?;
    Ok(tape.value(logits).data().to_vec())
}

/// `(loss_d, loss_g)` from discriminator logits on real and generated samples.
///
/// `loss_d = −mean log σ(real) − mean log(1 − σ(fake))`; `loss_g` follows `mode`.
pub fn gan_losses(real_logits: &Tensor, fake_logits: &Tensor, mode: GLossMode) -> Result<(f64, f64)> {
    let ones = |t: &Tensor| Tensor::full(t.shape(), 1.0);
    let zeros = |t: &Tensor| Tensor::zeros(t.shape());
    let loss_d = bce_logits(real_logits, &ones(real_logits))? + bce_logits(fake_logits, &zeros(fake_logits))?;
    let loss_g = match mode {
        GLossMode::NonSaturating => bce_logits(fake_logits, &ones(fake_logits))?,
        GLossMode::Saturating => {
            -fake_logits.data().iter().map(|&l| softplus(l)).sum::<f64>() / fake_logits.len() as f64
        }
    };
    Ok((loss_d, loss_g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainLogRow {
    pub iteration: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub d_accuracy: f64,
}

/// One row per outer iteration plus update counters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub rows: Vec<TrainLogRow>,
    pub d_updates: usize,
    pub g_updates: usize,
}

impl TrainLog {
    /// Mean probe accuracy over rows `[from, to)`.
    pub fn mean_accuracy(&self, from: usize, to: usize) -> f64 {
        let rows = &self.rows[from..to];
        rows.iter().map(|r| r.d_accuracy).sum::<f64>() / rows.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedGan {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub log: TrainLog,
}

impl TrainedGan {
    /// All parameters as one set: `g.*`, `d.*` and `meta.unit_range`.
    pub fn to_checkpoint(&self) -> ParamSet {
        let mut out = self.generator.params.with_prefix("g.");
        out.extend(self.discriminator.params.with_prefix("d."));
        let (min, span) = self.generator.unit_range;
        out.push(
            "meta.unit_range",
            Tensor::new(vec![2], vec![min, span]).expect("static shape"),
        );
        out
    }

    pub fn from_checkpoint(config: &GanConfig, params: &ParamSet) -> Result<Self> {
        let unit_range = params
            .get("meta.unit_range")
            .map(|t| (t.data()[0], t.data()[1]))
            .unwrap_or((0.0, 1.0));
        Ok(TrainedGan {
            generator: Generator::new(config, params.strip_prefix("g."), unit_range)?,
            discriminator: Discriminator::new(config, params.strip_prefix("d."))?,
            log: TrainLog::default(),
        })
    }
}

/// Freshly initialized networks for `config.seed`.
pub fn init_gan(config: &GanConfig) -> Result<(Generator, Discriminator)> {
    let g_net = generator_net(config)?;
    let d_net = discriminator_net(config)?;
    let g = Generator::new(config, g_net.init_params(&mut rng::stream(config.seed, 1)), (0.0, 1.0))?;
    let d = Discriminator::new(config, d_net.init_params(&mut rng::stream(config.seed, 2)))?;
    Ok((g, d))
}

fn noise(rng: &mut ChaCha8Rng, batch: usize, dim: usize) -> Tensor {
    Tensor::from_fn(&[batch, dim], |_| StandardNormal.sample(rng))
}

fn random_labels(rng: &mut ChaCha8Rng, batch: usize, classes: usize) -> Vec<usize> {
    (0..batch).map(|_| rng.random_range(0..classes)).collect()
}

struct RealPool<'a> {
    samples: &'a [Tfr],
    shape: [usize; 3],
}

impl RealPool<'_> {
    fn batch(&self, indices: &[usize]) -> Result<(Tensor, Vec<usize>)> {
        let rows: Vec<&[f64]> = indices.iter().map(|&i| self.samples[i].values()).collect();
        let labels = indices.iter().map(|&i| self.samples[i].label().index()).collect();
        Ok((Tensor::stack(&self.shape, &rows)?, labels))
    }

    fn random_batch(&self, rng: &mut ChaCha8Rng, size: usize) -> Result<(Tensor, Vec<usize>)> {
        let idx: Vec<usize> = (0..size).map(|_| rng.random_range(0..self.samples.len())).collect();
        self.batch(&idx)
    }
}

fn check_samples(samples: &[Tfr], config: &GanConfig) -> Result<()> {
    for label in Label::ALL.iter().take(config.class_count) {
        if !samples.iter().any(|s| s.label() == *label) {
            return Err(Error::EmptyClass(*label));
        }
    }
    for s in samples {
        if s.shape() != config.tfr_shape {
            return Err(Error::Shape(format!(
                "sample {} has shape {:?}, GAN expects {:?}",
                s.trial_id,
                s.shape(),
                config.tfr_shape
            )));
        }
        if s.values().iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "sample {} has values outside [-1, 1]",
                s.trial_id
            )));
        }
    }
    Ok(())
}

fn finite(stage: &'static str, step: usize, loss: f64) -> Result<f64> {
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Error::Diverged { stage, step, loss })
    }
}

/// Trains the pair with the alternating `d_steps_per_g_step : 1` schedule.
/// Fully determined by `config.seed`.
pub fn train_cdcgan(samples: &[Tfr], config: &GanConfig) -> Result<TrainedGan> {
    config.validate()?;
    check_samples(samples, config)?;
    let (mut g, mut d) = init_gan(config)?;
    g.unit_range = mean_unit_range(samples);

    let pool = RealPool {
        samples,
        shape: config.tfr_shape,
    };
    let mut rng = rng::stream(config.seed, 3);
    let probe_idx: Vec<usize> = (0..config.probe_size)
        .map(|_| rng.random_range(0..samples.len()))
        .collect();
    let (probe_real, probe_labels) = pool.batch(&probe_idx)?;

    let mut adam_g = AdamState::new(config.adam_g, g.params.tensors());
    let mut adam_d = AdamState::new(config.adam_d, d.params.tensors());
    let mut log = TrainLog::default();
    let (b, classes) = (config.batch_size, config.class_count);
    let fake_batch = |rng: &mut ChaCha8Rng, g: &Generator, size: usize| -> Result<(Tensor, Vec<usize>)> {
        let labels = random_labels(rng, size, classes);
        let z = noise(rng, size, config.noise_dim);
        Ok((generator_forward(&z, &labels, g)?, labels))
    };

    for it in 0..config.iterations {
        let mut d_loss = 0.0;
        for _ in 0..config.d_steps_per_g_step {
            let (real, real_labels) = pool.random_batch(&mut rng, b)?;
            let (fake, fake_labels) = fake_batch(&mut rng, &g, b)?;
            let mut tape = Tape::new();
            let params = d.register(&mut tape, true);
            let xr = tape.constant(real);
            let xf = tape.constant(fake);
            let lr = d.record(&mut tape, xr, &real_labels, &params)?;
            let lf = d.record(&mut tape, xf, &fake_labels, &params)?;
            let loss_r = tape.bce_logits(lr, Tensor::full(&[b], 1.0))?;
            let loss_f = tape.bce_logits(lf, Tensor::zeros(&[b]))?;
            let loss = tape.add(loss_r, loss_f)?;
            d_loss = finite("discriminator", it, tape.value(loss).data()[0])?;
            let grads = tape.backward(loss)?;
            adam_step(d.params.tensors_mut(), grads.params(), &mut adam_d)?;
            log.d_updates += 1;
        }

        let labels = random_labels(&mut rng, b, classes);
        let z = noise(&mut rng, b, config.noise_dim);
        let mut tape = Tape::new();
        let (fake, _) = g.record(&mut tape, &z, &labels, true)?;
        let d_params = d.register(&mut tape, false);
        let logits = d.record(&mut tape, fake, &labels, &d_params)?;
        let loss = match config.g_loss_mode {
            GLossMode::NonSaturating => tape.bce_logits(logits, Tensor::full(&[b], 1.0))?,
            GLossMode::Saturating => {
                let l = tape.bce_logits(logits, Tensor::zeros(&[b]))?;
                tape.scale(l, -1.0)
            }
        };
        let g_loss = finite("generator", it, tape.value(loss).data()[0])?;
        let grads = tape.backward(loss)?;
        adam_step(g.params.tensors_mut(), grads.params(), &mut adam_g)?;
        log.g_updates += 1;

        let (probe_fake, fake_labels) = fake_batch(&mut rng, &g, config.probe_size)?;
        let real_logits = discriminator_forward(&probe_real, &probe_labels, &d)?;
        let fake_logits = discriminator_forward(&probe_fake, &fake_labels, &d)?;
        let correct =
            real_logits.iter().filter(|&&l| l > 0.0).count() + fake_logits.iter().filter(|&&l| l <= 0.0).count();
        log.rows.push(TrainLogRow {
            iteration: it,
            d_loss,
            g_loss,
            d_accuracy: correct as f64 / (2 * config.probe_size) as f64,
        });
    }
    Ok(TrainedGan {
        generator: g,
        discriminator: d,
        log,
    })
}

fn mean_unit_range(samples: &[Tfr]) -> (f64, f64) {
    let ranges: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| match s.normalization {
            Normalization::UnitRange { min, span } => Some((min, span)),
            Normalization::None => None,
        })
        .collect();
    if ranges.is_empty() {
        return (0.0, 1.0);
    }
    let n = ranges.len() as f64;
    let (a, b) = ranges.iter().fold((0.0, 0.0), |(a, b), (m, s)| (a + m, b + s));
    (a / n, b / n)
}

/// `count` artificial samples of class `label`, determined by `seed`.
pub fn generate_labeled(
    generator: &Generator,
    axes: &TfrAxes,
    label: Label,
    count: usize,
    seed: u64,
) -> Result<Vec<Tfr>> {
    let [c, f, t] = generator.tfr_shape;
    if axes.freqs_hz.len() != f || axes.times_s.len() != t {
        return Err(Error::Shape(format!(
            "axes {}x{} do not match generator output {f}x{t}",
            axes.freqs_hz.len(),
            axes.times_s.len()
        )));
    }
    check_labels(&[label.index()], generator.class_count)?;
    let mut rng = rng::stream(seed, 4);
    let (min, span) = generator.unit_range;
    let mut out = Vec::with_capacity(count);
    const CHUNK: usize = 64;
    while out.len() < count {
        let n = CHUNK.min(count - out.len());
        let z = noise(&mut rng, n, generator.noise_dim);
        let x = generator_forward(&z, &vec![label.index(); n], generator)?;
        for i in 0..n {
            out.push(Tfr::new(
                axes.clone(),
                c,
                x.row(i).to_vec(),
                label,
                out.len() as u32,
                Normalization::UnitRange { min, span },
                Provenance::Artificial,
            )?);
        }
    }
    Ok(out)
}

/// Cell magnitude of the toy checkerboard.
pub const TOY_LEVEL: f64 = 0.8;

/// Toy `1×2×2` problem: each class is a fixed checkerboard of `±TOY_LEVEL`
/// (opposite sign per class) plus Gaussian noise of `sigma`, clipped to
/// `[−1, 1]`. `sigma = 0` gives constant patterns.
pub fn toy_problem(per_class: usize, sigma: f64, seed: u64) -> Result<Vec<Tfr>> {
    let normal = rand_distr::Normal::new(0.0, sigma).map_err(|_| Error::InvalidArgument(format!("sigma {sigma}")))?;
    let mut rng = rng::stream(seed, 5);
    let axes = TfrAxes {
        freqs_hz: vec![10.0, 12.0],
        times_s: vec![0.0, 0.5],
    };
    let pattern = [TOY_LEVEL, -TOY_LEVEL, -TOY_LEVEL, TOY_LEVEL];
    (0..2 * per_class)
        .map(|i| {
            let label = Label::ALL[i % 2];
            let sign = if label == Label::LeftHand { 1.0 } else { -1.0 };
            let values = pattern
                .iter()
                .map(|p| (sign * p + normal.sample(&mut rng)).clamp(-1.0, 1.0))
                .collect();
            Tfr::new(
                axes.clone(),
                1,
                values,
                label,
                i as u32,
                Normalization::UnitRange { min: 0.0, span: 1.0 },
                Provenance::Raw,
            )
        })
        .collect()
}

/// Settings sized for [`toy_problem`].
pub fn toy_config(seed: u64) -> GanConfig {
    let adam = AdamConfig {
        lr: 1e-3,
        ..GanConfig::default().adam_g
    };
    GanConfig {
        adam_g: adam,
        adam_d: adam,
        noise_dim: 4,
        tfr_shape: [1, 2, 2],
        arch: GanArch::Mlp { hidden: 16 },
        batch_size: 32,
        iterations: 2000,
        probe_size: 64,
        seed,
        ..GanConfig::default()
    }
}

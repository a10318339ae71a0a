//! CNN over TFRs: conv → Relu → pool blocks, then dense layers and a logit
//! head, trained with softmax cross-entropy and Adam.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::data::{Label, Labeled};
use crate::error::{Error, Result};
use crate::numerics::{adam_step, Activation, AdamConfig, AdamState, Layer, ParamSet, Sequential, Tape, Tensor};
use crate::rng;
use crate::wavelet::Tfr;

/// One convolution block. Kernel and pool extents are `(freq, time)`; the
/// convolution is zero-padded to keep its input size at stride 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvBlock {
    pub out_channels: usize,
    pub kernel: (usize, usize),
    pub stride: (usize, usize),
    pub pool: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnnArch {
    /// `[channels, freqs, times]`.
    pub input_shape: [usize; 3],
    pub conv_blocks: Vec<ConvBlock>,
    /// Hidden dense widths, each followed by Relu.
    pub dense: Vec<usize>,
    pub class_count: usize,
}

impl Default for CnnArch {
    fn default() -> Self {
        let block = |out| ConvBlock {
            out_channels: out,
            kernel: (3, 5),
            stride: (1, 1),
            pool: (1, 2),
        };
        CnnArch {
            input_shape: [3, 9, 64],
            conv_blocks: vec![block(16), block(32)],
            dense: vec![64],
            class_count: Label::COUNT,
        }
    }
}

impl CnnArch {
    pub fn network(&self) -> Result<Sequential> {
        if self.class_count < 2 {
            return Err(Error::InvalidArgument("class_count must be at least 2".into()));
        }
        let mut layers = Vec::new();
        for b in &self.conv_blocks {
            layers.push(Layer::Conv2d {
                out_channels: b.out_channels,
                kernel: b.kernel,
                stride: b.stride,
                padding: (b.kernel.0 / 2, b.kernel.1 / 2),
            });
            layers.push(Layer::Activation(Activation::Relu));
            if b.pool != (1, 1) {
                layers.push(Layer::MaxPool { window: b.pool });
            }
        }
        layers.push(Layer::Flatten);
        for &units in &self.dense {
            layers.push(Layer::Dense { units });
            layers.push(Layer::Activation(Activation::Relu));
        }
        layers.push(Layer::Dense {
            units: self.class_count,
        });
        Sequential::new(&self.input_shape, layers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClfHyper {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for ClfHyper {
    fn default() -> Self {
        ClfHyper {
            lr: 1e-3,
            batch_size: 16,
            epochs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    arch: CnnArch,
    net: Sequential,
    params: ParamSet,
}

impl Classifier {
    pub fn new(arch: CnnArch, params: ParamSet) -> Result<Self> {
        let net = arch.network()?;
        net.check_params(&params)?;
        Ok(Classifier { arch, net, params })
    }

    /// Initialization for `seed`; the same draw `train_classifier` starts from.
    pub fn init(arch: CnnArch, seed: u64) -> Result<Self> {
        let net = arch.network()?;
        let params = net.init_params(&mut rng::stream(seed, 10));
        Ok(Classifier { arch, net, params })
    }

    pub fn arch(&self) -> &CnnArch {
        &self.arch
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    /// Class per sample by argmax; equal logits go to the lower index.
    pub fn predict(&self, x: &Tensor) -> Result<Vec<usize>> {
        let logits = clf_forward(x, self)?;
        Ok((0..logits.shape()[0]).map(|i| argmax(logits.row(i))).collect())
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Logits `[batch, class_count]` for `x` of shape `[batch, C, F, T]`.
pub fn clf_forward(x: &Tensor, clf: &Classifier) -> Result<Tensor> {
    if x.rank() != 4 || x.shape()[1..] != clf.arch.input_shape {
        return Err(Error::Shape(format!(
            "classifier input must be [batch, {:?}], got {:?}",
            clf.arch.input_shape,
            x.shape()
        )));
    }
    clf.net.predict(&clf.params, x.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub classifier: Classifier,
    /// Mean minibatch loss per epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainedClassifier {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

fn stack_samples(samples: &[&Tfr], shape: &[usize; 3]) -> Result<Tensor> {
    for s in samples {
        if s.shape() != *shape {
            return Err(Error::Shape(format!(
                "sample {} has shape {:?}, classifier expects {shape:?}",
                s.trial_id,
                s.shape()
            )));
        }
    }
    let rows: Vec<&[f64]> = samples.iter().map(|s| s.values()).collect();
    Tensor::stack(shape, &rows)
}

/// Adam on softmax cross-entropy over reshuffled epochs; deterministic in
/// `seed`.
pub fn train_classifier(train: &[Tfr], arch: &CnnArch, hyper: &ClfHyper, seed: u64) -> Result<TrainedClassifier> {
    if hyper.batch_size == 0 || !(hyper.lr > 0.0) {
        return Err(Error::InvalidArgument("batch_size and lr must be positive".into()));
    }
    for label in Label::ALL.iter().take(arch.class_count) {
        if !train.iter().any(|s| s.label() == *label) {
            return Err(Error::EmptyClass(*label));
        }
    }
    let mut clf = Classifier::init(arch.clone(), seed)?;
    let mut adam = AdamState::new(
        AdamConfig {
            lr: hyper.lr,
            ..AdamConfig::default()
        },
        clf.params.tensors(),
    );
    let mut shuffle = rng::stream(seed, 11);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut shuffle);
        let mut total = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<&Tfr> = chunk.iter().map(|&i| &train[i]).collect();
            let labels: Vec<usize> = batch.iter().map(|s| s.label().index()).collect();
            let mut tape = Tape::new();
            let x = tape.constant(stack_samples(&batch, &arch.input_shape)?);
            let (logits, _) = clf.net.forward_trainable(&mut tape, x, &clf.params)?;
            let loss = tape.softmax_cross_entropy(logits, &labels)?;
            let value = tape.value(loss).data()[0];
            if !value.is_finite() {
                return Err(Error::Diverged {
                    stage: "classifier",
                    step: epoch,
                    loss: value,
                });
            }
            total += value * chunk.len() as f64;
            let grads = tape.backward(loss)?;
            adam_step(clf.params.tensors_mut(), grads.params(), &mut adam)?;
        }
        epoch_losses.push(total / train.len() as f64);
    }
    Ok(TrainedClassifier {
        classifier: clf,
        epoch_losses,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    /// Recall per true class; `None` when the class is absent from the test set.
    pub per_class: Vec<Option<f64>>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub n_test: usize,
}

/// Accuracy, per-class recall and confusion counts on `test`.
pub fn evaluate(clf: &Classifier, test: &[Tfr]) -> Result<Metrics> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("test set is empty".into()));
    }
    let k = clf.arch.class_count;
    let mut confusion = vec![vec![0usize; k]; k];
    const CHUNK: usize = 64;
    for chunk in test.chunks(CHUNK) {
        let refs: Vec<&Tfr> = chunk.iter().collect();
        let predicted = clf.predict(&stack_samples(&refs, &clf.arch.input_shape)?)?;
        for (s, p) in chunk.iter().zip(predicted) {
            confusion[s.label().index()][p] += 1;
        }
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let per_class = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let n: usize = row.iter().sum();
            (n > 0).then(|| row[i] as f64 / n as f64)
        })
        .collect();
    Ok(Metrics {
        accuracy: correct as f64 / test.len() as f64,
        per_class,
        confusion,
        n_test: test.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;
    use crate::wavelet::{Normalization, TfrAxes};

    fn toy_arch() -> CnnArch {
        CnnArch {
            input_shape: [1, 2, 4],
            conv_blocks: vec![ConvBlock {
                out_channels: 2,
                kernel: (1, 3),
                stride: (1, 1),
                pool: (1, 2),
            }],
            dense: vec![4],
            class_count: 2,
        }
    }

    fn toy_set(per_class: usize) -> Vec<Tfr> {
        let axes = TfrAxes {
            freqs_hz: vec![1.0, 2.0],
            times_s: vec![0.0, 1.0, 2.0, 3.0],
        };
        (0..2 * per_class)
            .map(|i| {
                let label = Label::from_index(i % 2).unwrap();
                let v = if i % 2 == 0 { 0.8 } else { -0.8 };
                Tfr::new(
                    axes.clone(),
                    1,
                    vec![v; 8],
                    label,
                    i as u32,
                    Normalization::UnitRange { min: 0.0, span: 1.0 },
                    Provenance::Raw,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn default_arch_chains_to_two_logits() {
        assert_eq!(CnnArch::default().network().unwrap().output_shape(), &[2]);
    }

    #[test]
    fn zero_epochs_returns_init() {
        let set = toy_set(3);
        let t = train_classifier(
            &set,
            &toy_arch(),
            &ClfHyper {
                epochs: 0,
                ..ClfHyper::default()
            },
            5,
        )
        .unwrap();
        assert_eq!(t.classifier, Classifier::init(toy_arch(), 5).unwrap());
        assert!(t.epoch_losses.is_empty());
    }

    #[test]
    fn evaluate_constant_model_and_errors() {
        let arch = toy_arch();
        let net = arch.network().unwrap();
        let zeros = ParamSet::from_iter(net.param_shapes().map(|(n, s)| (n.into(), Tensor::zeros(s))));
        let clf = Classifier::new(arch, zeros).unwrap();
        let m = evaluate(&clf, &toy_set(70)).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.confusion, vec![vec![70, 0], vec![70, 0]]);
        assert!(evaluate(&clf, &[]).is_err());
    }
}

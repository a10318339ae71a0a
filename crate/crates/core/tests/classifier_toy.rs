use eegaug_core::classifier::{clf_forward, evaluate, train_classifier, Classifier, ClfHyper, CnnArch, ConvBlock};
use eegaug_core::data::{Label, Provenance};
use eegaug_core::numerics::{ParamSet, Tensor};
use eegaug_core::wavelet::{Normalization, Tfr, TfrAxes};
use proptest::prelude::*;

fn arch() -> CnnArch {
    CnnArch {
        input_shape: [3, 9, 8],
        conv_blocks: vec![ConvBlock {
            out_channels: 4,
            kernel: (3, 3),
            stride: (1, 1),
            pool: (1, 2),
        }],
        dense: vec![8],
        class_count: 2,
    }
}

/// Constant ±0.8 patterns on the first vs. last channel.
fn separable(per_class: usize) -> Vec<Tfr> {
    let axes = TfrAxes {
        freqs_hz: (7..=15).map(f64::from).collect(),
        times_s: (0..8).map(|t| t as f64 * 0.625).collect(),
    };
    (0..2 * per_class)
        .map(|i| {
            let label = Label::ALL[i % 2];
            let hot = if label == Label::LeftHand { 0 } else { 2 };
            let values = (0..3 * 72).map(|k| if k / 72 == hot { 0.8 } else { -0.8 }).collect();
            Tfr::new(
                axes.clone(),
                3,
                values,
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
fn separable_toy_is_learned_and_loss_decreases() {
    let data = separable(40);
    let hyper = ClfHyper {
        epochs: 30,
        ..ClfHyper::default()
    };
    let t = train_classifier(&data, &arch(), &hyper, 1).unwrap();
    let m = evaluate(&t.classifier, &data).unwrap();
    assert_eq!(m.accuracy, 1.0);
    assert_eq!(m.confusion, vec![vec![40, 0], vec![0, 40]]);
    let falls = t.epoch_losses.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(
        falls as f64 >= 0.8 * (t.epoch_losses.len() - 1) as f64,
        "{:?}",
        t.epoch_losses
    );
    assert_eq!(t, train_classifier(&data, &arch(), &hyper, 1).unwrap());
}

#[test]
fn zero_params_give_zero_logits() {
    let net = arch().network().unwrap();
    let zeros: ParamSet = net
        .param_shapes()
        .map(|(n, s)| (n.to_string(), Tensor::zeros(s)))
        .collect();
    let clf = Classifier::new(arch(), zeros).unwrap();
    let x = Tensor::from_fn(&[2, 3, 9, 8], |i| i as f64 * 0.01);
    assert!(clf_forward(&x, &clf).unwrap().data().iter().all(|&v| v == 0.0));
    assert!(clf_forward(&Tensor::zeros(&[1, 3, 9, 7]), &clf).is_err());
}

#[test]
fn identical_inputs_identical_logits() {
    let clf = Classifier::init(arch(), 3).unwrap();
    let row: Vec<f64> = (0..216).map(|i| ((i * 7) % 13) as f64 / 13.0).collect();
    let x = Tensor::stack(&[3, 9, 8], &[&row, &row]).unwrap();
    let y = clf_forward(&x, &clf).unwrap();
    assert_eq!(y.row(0), y.row(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn accuracy_is_permutation_invariant(seed in 0u64..1000, rot in 0usize..80) {
        let clf = Classifier::init(arch(), seed).unwrap();
        let mut data = separable(40);
        let a = evaluate(&clf, &data).unwrap();
        data.rotate_left(rot);
        data.reverse();
        let b = evaluate(&clf, &data).unwrap();
        prop_assert_eq!(a.accuracy, b.accuracy);
        prop_assert_eq!(a.confusion.iter().flatten().sum::<usize>(), a.n_test);
        let trace: usize = (0..2).map(|i| a.confusion[i][i]).sum();
        prop_assert_eq!(a.accuracy, trace as f64 / a.n_test as f64);
    }

    #[test]
    fn argmax_ignores_common_shift(shift in -50.0f64..50.0, seed in 0u64..100) {
        // Shifting the head bias of every class by the same amount shifts both logits.
        let clf = Classifier::init(arch(), seed).unwrap();
        let mut shifted: ParamSet = ParamSet::new();
        let last = clf.params().names().last().unwrap().clone();
        for (n, t) in clf.params().iter() {
            let t = if n == last { t.map(|v| v + shift) } else { t.clone() };
            shifted.push(n, t);
        }
        let moved = Classifier::new(arch(), shifted).unwrap();
        let data = separable(10);
        prop_assert_eq!(evaluate(&clf, &data).unwrap(), evaluate(&moved, &data).unwrap());
    }
}

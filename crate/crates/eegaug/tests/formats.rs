use eegaug::formats::*;
use eegaug::Error;
use eegaug_core::cdcgan::{init_gan, GanArch, GanConfig, TrainedGan};
use eegaug_core::classifier::{Classifier, CnnArch, ConvBlock};
use eegaug_core::data::{synthesize_dataset, Dataset, Label, Labeled, Provenance, Split, SyntheticSpec};
use eegaug_core::numerics::{ParamSet, Tensor};
use eegaug_core::preprocess::TfrConfig;
use eegaug_core::wavelet::Normalization;

fn small_dataset(per_class: usize) -> Dataset {
    let mut spec = SyntheticSpec::motor_imagery(per_class, 2.0);
    spec.duration_s = 1.0;
    synthesize_dataset(&spec, 3).unwrap()
}

fn eegb_bytes(ds: &Dataset) -> Vec<u8> {
    let mut buf = Vec::new();
    write_eegb(ds, &mut buf).unwrap();
    buf
}

#[test]
fn eegb_round_trip_is_bit_exact() {
    let ds = small_dataset(4);
    let bytes = eegb_bytes(&ds);
    let back = read_eegb(bytes.as_slice()).unwrap();
    assert_eq!(back.len(), ds.len());
    for (a, b) in ds.trials().iter().zip(back.trials()) {
        assert_eq!(a.trial_id(), b.trial_id());
        assert_eq!(a.label(), b.label());
        assert_eq!(a.channels(), b.channels());
        assert_eq!(a.sample_rate_hz(), b.sample_rate_hz());
        let bits = |t: &[f32]| t.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.samples()), bits(b.samples()));
    }
    assert_eq!(eegb_bytes(&back), bytes);
}

#[test]
fn eegb_empty_file_is_valid() {
    let empty = Dataset::new(Vec::new(), Split::Train, Provenance::Raw).unwrap();
    let ds = read_eegb(eegb_bytes(&empty).as_slice()).unwrap();
    assert!(ds.is_empty());
}

#[test]
fn eegb_140_trials_split_evenly() {
    let ds = small_dataset(70);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("raw.eegb");
    save_dataset(&ds, &path, DatasetFormat::Eegb).unwrap();
    let back = load_dataset(&path, DatasetFormat::from_path(&path, 128.0)).unwrap();
    assert_eq!(back.len(), 140);
    assert_eq!(back.class_counts(), [70, 70]);
    let ids: Vec<u32> = back.trials().iter().map(|t| t.trial_id()).collect();
    let want: Vec<u32> = ds.trials().iter().map(|t| t.trial_id()).collect();
    assert_eq!(ids, want);
}

#[test]
fn eegb_rejects_damage() {
    let bytes = eegb_bytes(&small_dataset(1));
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(read_eegb(bad_magic.as_slice()), Err(Error::Format { .. })));
    assert!(matches!(
        read_eegb(&bytes[..bytes.len() - 3]),
        Err(Error::Format { .. })
    ));
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(read_eegb(trailing.as_slice()), Err(Error::Format { .. })));
    // The label byte of the first trial follows the 24-byte header and its id.
    let mut bad_label = bytes.clone();
    bad_label[28] = 7;
    let msg = read_eegb(bad_label.as_slice()).unwrap_err().to_string();
    assert!(msg.contains("label code 7"), "{msg}");
    let mut nan = bytes;
    nan[29..33].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(matches!(read_eegb(nan.as_slice()), Err(Error::Core(_))));
}

#[test]
fn csv_round_trip_and_short_channel() {
    let ds = small_dataset(2);
    let mut buf = Vec::new();
    write_trials_csv(&ds, &mut buf).unwrap();
    let back = read_trials_csv(buf.as_slice(), 128.0).unwrap();
    assert_eq!(eegb_bytes(&back), eegb_bytes(&ds));

    let text = String::from_utf8(buf).unwrap();
    let victim = ds.trials()[1].trial_id();
    let last = ds.trials()[1].n_samples() - 1;
    let needle = format!("{victim},{},C4,{last},", ds.trials()[1].label().index());
    let short: String = text
        .lines()
        .filter(|l| !l.starts_with(&needle))
        .map(|l| format!("{l}\n"))
        .collect();
    let err = read_trials_csv(short.as_bytes(), 128.0).unwrap_err();
    match err {
        Error::Core(eegaug_core::Error::LengthMismatch {
            trial_id, ref channel, ..
        }) => {
            assert_eq!(trial_id, victim);
            assert_eq!(channel, "C4");
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn csv_rejects_bad_header_and_duplicates() {
    assert!(read_trials_csv("a,b\n".as_bytes(), 128.0).is_err());
    let dup = format!("{TRIAL_CSV_HEADER}\n0,0,C3,0,1\n0,0,C3,0,2\n");
    assert!(read_trials_csv(dup.as_bytes(), 128.0).is_err());
    let gap = format!("{TRIAL_CSV_HEADER}\n0,0,C3,0,1\n0,0,C3,2,2\n");
    assert!(read_trials_csv(gap.as_bytes(), 128.0).is_err());
    let label = format!("{TRIAL_CSV_HEADER}\n0,up,C3,0,1\n");
    assert!(read_trials_csv(label.as_bytes(), 128.0)
        .unwrap_err()
        .to_string()
        .contains("trial 0"));
}

#[test]
fn tfrb_round_trip() {
    let ds = small_dataset(2);
    let cfg = TfrConfig {
        window_s: (0.0, 1.0),
        time_columns: 16,
        ..TfrConfig::default()
    };
    let tfrs = cfg.apply_all(ds.trials()).unwrap();
    let mut buf = Vec::new();
    write_tfrb(&tfrs, &mut buf).unwrap();
    let back = read_tfrb(buf.as_slice()).unwrap();
    assert_eq!(back.len(), tfrs.len());
    for (a, b) in tfrs.iter().zip(&back) {
        assert_eq!(a.label(), b.label());
        match (a.normalization, b.normalization) {
            (Normalization::UnitRange { min: m0, span: s0 }, Normalization::UnitRange { min: m1, span: s1 }) => {
                assert!((m0 - m1).abs() <= 1e-6 * m0.abs().max(1.0));
                assert!((s0 - s1).abs() <= 1e-6 * s0.abs().max(1.0));
            }
            (x, y) => assert_eq!(x, y),
        }
        assert_eq!(a.axes, b.axes);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-6);
        }
    }
    let mut again = Vec::new();
    write_tfrb(&back, &mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn checkpoint_round_trip() {
    let params: ParamSet = [
        (
            "a.w".to_string(),
            Tensor::new(vec![2, 3], vec![1.0, -2.5, 3.25, 1e-300, -0.0, 7.0]).unwrap(),
        ),
        ("b".to_string(), Tensor::new(vec![1], vec![f64::MIN_POSITIVE]).unwrap()),
    ]
    .into_iter()
    .collect();
    let mut buf = Vec::new();
    write_checkpoint(&params, &mut buf).unwrap();
    let back = read_checkpoint(buf.as_slice()).unwrap();
    assert_eq!(back, params);
    assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
}

#[test]
fn model_checkpoints_describe_themselves() {
    let cfg = GanConfig {
        tfr_shape: [3, 9, 16],
        arch: GanArch::Dcgan {
            generator_widths: (8, 4),
            discriminator_widths: (4, 8),
        },
        noise_dim: 6,
        ..GanConfig::default()
    };
    let (generator, discriminator) = init_gan(&cfg).unwrap();
    let gan = TrainedGan {
        generator,
        discriminator,
        log: Default::default(),
    };
    let axes = eegaug_core::wavelet::TfrAxes {
        freqs_hz: (7..=15).map(f64::from).collect(),
        times_s: (0..16).map(|i| i as f64 / 16.0).collect(),
    };
    let (back, back_cfg, back_axes) = gan_from_params(&gan_to_params(&gan, &cfg, &axes)).unwrap();
    assert_eq!(back.generator, gan.generator);
    assert_eq!(back.discriminator, gan.discriminator);
    assert_eq!(
        (back_cfg.noise_dim, back_cfg.tfr_shape, back_cfg.arch),
        (6, [3, 9, 16], cfg.arch)
    );
    assert_eq!(back_axes, axes);

    let arch = CnnArch {
        input_shape: [3, 9, 16],
        conv_blocks: vec![ConvBlock {
            out_channels: 4,
            kernel: (3, 5),
            stride: (1, 1),
            pool: (1, 2),
        }],
        dense: vec![8],
        class_count: 2,
    };
    let clf = Classifier::init(arch, 1).unwrap();
    let back = classifier_from_params(&classifier_to_params(&clf)).unwrap();
    assert_eq!(back.arch(), clf.arch());
    assert_eq!(back.params(), clf.params());
    assert!(classifier_from_params(clf.params()).is_err());
}

#[test]
fn labels_survive_every_format() {
    let ds = small_dataset(3);
    let left = ds.trials().iter().filter(|t| t.label() == Label::LeftHand).count();
    let back = read_eegb(eegb_bytes(&ds).as_slice()).unwrap();
    assert_eq!(
        back.trials().iter().filter(|t| t.label() == Label::LeftHand).count(),
        left
    );
}

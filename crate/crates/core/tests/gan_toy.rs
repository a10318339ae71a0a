use eegaug_core::cdcgan::{
    discriminator_forward, generate_labeled, toy_config, toy_problem, train_cdcgan, GLossMode, TOY_LEVEL,
};
use eegaug_core::data::Label;
use eegaug_core::numerics::Tensor;

#[test]
fn toy_pair_approaches_equilibrium() {
    let data = toy_problem(200, 0.0, 0).unwrap();
    let cfg = toy_config(0);
    let gan = train_cdcgan(&data, &cfg).unwrap();
    let log = &gan.log;
    assert_eq!(log.rows.len(), cfg.iterations);
    assert_eq!(log.d_updates, 2 * log.g_updates);
    let n = log.rows.len();
    let first = log.mean_accuracy(0, n / 20);
    let last = log.mean_accuracy(n - n / 10, n);
    assert!((0.35..=0.65).contains(&last), "last decile {last}");
    assert!((last - 0.5).abs() < (first - 0.5).abs(), "first {first} last {last}");
}

#[test]
fn generator_learns_the_condition() {
    let data = toy_problem(200, 0.0, 1).unwrap();
    let gan = train_cdcgan(&data, &toy_config(1)).unwrap();
    let axes = data[0].axes.clone();
    for (label, sign) in [(Label::LeftHand, 1.0), (Label::RightHand, -1.0)] {
        let samples = generate_labeled(&gan.generator, &axes, label, 200, 9).unwrap();
        let mut mean = [0.0; 4];
        for s in &samples {
            for (m, v) in mean.iter_mut().zip(s.values()) {
                *m += v / 200.0;
            }
        }
        let target = [TOY_LEVEL, -TOY_LEVEL, -TOY_LEVEL, TOY_LEVEL].map(|p| sign * p);
        let right_sign = mean
            .iter()
            .zip(target)
            .filter(|(m, t)| m.signum() == t.signum())
            .count();
        assert!(right_sign >= 3, "{label:?} mean {mean:?}");
        // Nearest class mean is its own.
        let own: f64 = mean.iter().zip(target).map(|(m, t)| (m - t).powi(2)).sum();
        let other: f64 = mean.iter().zip(target).map(|(m, t)| (m + t).powi(2)).sum();
        assert!(own < other, "{label:?} mean {mean:?}");
        assert!(samples.iter().flat_map(|s| s.values()).all(|v| v.abs() < 1.0));
    }
}

#[test]
fn training_is_deterministic_and_seed_sensitive() {
    let data = toy_problem(20, 0.1, 2).unwrap();
    let cfg = eegaug_core::cdcgan::GanConfig {
        iterations: 30,
        ..toy_config(4)
    };
    let a = train_cdcgan(&data, &cfg).unwrap();
    assert_eq!(a, train_cdcgan(&data, &cfg).unwrap());
    let b = train_cdcgan(&data, &eegaug_core::cdcgan::GanConfig { seed: 5, ..cfg.clone() }).unwrap();
    assert_ne!(a.generator, b.generator);
    let sat = train_cdcgan(
        &data,
        &eegaug_core::cdcgan::GanConfig {
            g_loss_mode: GLossMode::Saturating,
            ..cfg
        },
    )
    .unwrap();
    assert!(sat.log.rows.iter().all(|r| r.g_loss <= 0.0));
}

#[test]
fn discriminator_is_label_aware() {
    let data = toy_problem(100, 0.0, 3).unwrap();
    let gan = train_cdcgan(&data, &toy_config(3)).unwrap();
    // A left-class pattern is more plausible as left than as right.
    let x = Tensor::new(vec![1, 1, 2, 2], vec![0.8, -0.8, -0.8, 0.8]).unwrap();
    let as_left = discriminator_forward(&x, &[0], &gan.discriminator).unwrap()[0];
    let as_right = discriminator_forward(&x, &[1], &gan.discriminator).unwrap()[0];
    assert!(as_left > as_right, "{as_left} vs {as_right}");
}

mod common;

use std::process::Command;

#[test]
fn pipeline_reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = common::pipeline(a.path());
    let second = common::pipeline(b.path());
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    for want in [
        "gan.ckpt",
        "art.tfrb",
        "clf.ckpt",
        "metrics.csv",
        "fig4/results.csv",
        "tfr.svg",
        "tfr_C3.pgm",
    ] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    assert_eq!(names, second.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>());
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("spec.txt"), common::SPEC).unwrap();
    std::fs::write(d.join("run.cfg"), common::CONFIG).unwrap();
    common::run(d, &["synth", "--spec", "spec.txt", "--out", "train.eegb"]);
    common::run(
        d,
        &[
            "preprocess",
            "--in",
            "train.eegb",
            "--out",
            "train.tfrb",
            "--config",
            "run.cfg",
        ],
    );
    let train = |seed: &str, out: &str| {
        let args = [
            "train-gan",
            "--in",
            "train.tfrb",
            "--out",
            out,
            "--config",
            "run.cfg",
            "--seed",
            seed,
        ];
        common::run(d, &args);
        std::fs::read(d.join(out)).unwrap()
    };
    assert_eq!(train("1", "a.ckpt"), train("1", "b.ckpt"));
    assert_ne!(train("1", "a.ckpt"), train("2", "c.ckpt"));
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.eegb"), b"nope").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_eegaug"))
        .current_dir(dir.path())
        .args(["preprocess", "--in", "junk.eegb", "--out", "x.tfrb"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("EEGB"));
    let out = Command::new(env!("CARGO_BIN_EXE_eegaug"))
        .current_dir(dir.path())
        .args(["experiment", "fig9"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

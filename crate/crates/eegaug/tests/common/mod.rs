//! Drives the `eegaug` binary through a complete small pipeline.

use std::fs;
use std::path::Path;
use std::process::Command;

pub const SPEC: &str = "
synth.trials_per_class = 6
synth.test_trials_per_class = 4
synth.seed = 11
";

pub const CONFIG: &str = "
seeds = 5
synth.trials_per_class = 6
synth.test_trials_per_class = 4
reference_per_class = 4
tfr.tcols = 16
gan.arch = mlp
gan.mlp_hidden = 6
gan.iterations = 4
gan.batch = 4
gan.probe = 4
clf.blocks = 2:3x3:1x2
clf.dense = 4
clf.epochs = 2
fig4.multiples = 0.5
";

pub fn run(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_eegaug"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn eegaug");
    assert!(
        out.status.success(),
        "eegaug {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Runs every subcommand in `dir` and returns all files written plus the
/// captured stdout, sorted by name.
pub fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fs::write(dir.join("spec.txt"), SPEC).unwrap();
    fs::write(dir.join("run.cfg"), CONFIG).unwrap();
    let cfg = ["--config", "run.cfg"];
    let with = |args: &[&'static str]| [args, &cfg[..]].concat();
    run(dir, &["synth", "--spec", "spec.txt", "--out", "train.eegb"]);
    run(
        dir,
        &["synth", "--spec", "spec.txt", "--out", "test.csv", "--split", "test"],
    );
    run(dir, &with(&["preprocess", "--in", "train.eegb", "--out", "train.tfrb"]));
    run(dir, &with(&["preprocess", "--in", "test.csv", "--out", "test.tfrb"]));
    run(
        dir,
        &with(&[
            "train-gan",
            "--in",
            "train.tfrb",
            "--out",
            "gan.ckpt",
            "--log",
            "gan.csv",
        ]),
    );
    run(
        dir,
        &[
            "generate", "--gan", "gan.ckpt", "--label", "left", "--count", "5", "--seed", "3", "--out", "art.tfrb",
        ],
    );
    run(
        dir,
        &with(&[
            "train-clf",
            "--in",
            "train.tfrb",
            "--in",
            "art.tfrb",
            "--out",
            "clf.ckpt",
            "--log",
            "clf.csv",
        ]),
    );
    run(
        dir,
        &["eval", "--clf", "clf.ckpt", "--in", "test.tfrb", "--out", "metrics.csv"],
    );
    let printed = run(dir, &with(&["experiment", "fig4", "--out", "fig4"]));
    fs::write(dir.join("experiment.stdout"), printed).unwrap();
    run(dir, &["render", "--in", "train.tfrb", "--out", "tfr.svg"]);
    run(
        dir,
        &[
            "render",
            "--in",
            "train.tfrb",
            "--index",
            "1",
            "--out",
            "tfr.pgm",
            "--scale",
            "2",
        ],
    );
    run(
        dir,
        &[
            "render",
            "--in",
            "train.tfrb",
            "--out",
            "pair.svg",
            "--compare",
            "art.tfrb",
        ],
    );

    let mut files = Vec::new();
    collect(dir, dir, &mut files);
    files.sort();
    files
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect(root, &path, out);
        } else {
            let name = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
            out.push((name, fs::read(&path).unwrap()));
        }
    }
}

use eegaug::config::{ExperimentConfig, ExperimentKind, KvDoc};
use eegaug::experiments::*;
use eegaug::Error;

/// Tiny networks so bookkeeping runs in seconds.
const FAST: &str = "
seeds = 0, 1
synth.trials_per_class = 70
synth.test_trials_per_class = 6
tfr.tcols = 16
gan.arch = mlp
gan.mlp_hidden = 4
gan.iterations = 2
gan.batch = 4
gan.probe = 4
clf.blocks =
clf.dense = 4
clf.epochs = 1
";

fn config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_doc(&KvDoc::parse(&format!("{FAST}\n{extra}")).unwrap()).unwrap()
}

fn assert_shared_inputs(out: &ExperimentOutput) {
    for fp in &out.fingerprints {
        let first = out.fingerprints.iter().find(|f| f.seed == fp.seed).unwrap();
        assert_eq!(fp.test, first.test, "{}", fp.condition);
        assert_eq!(fp.init, first.init, "{}", fp.condition);
    }
}

#[test]
fn fig4_artificial_counts_are_exact() {
    let cfg = config("kind = fig4");
    let data = prepare_data(&cfg).unwrap();
    let out = run_fig4(&cfg, &data).unwrap();
    assert_eq!(out.rows.len(), 5 * 2);
    for seed in [0, 1] {
        let counts: Vec<(usize, usize)> = out
            .rows
            .iter()
            .filter(|r| r.seed == seed)
            .map(|r| (r.n_raw_per_class, r.n_art_per_class))
            .collect();
        assert_eq!(counts, [(70, 0), (70, 35), (70, 70), (70, 105), (70, 140)]);
    }
    assert!(out
        .rows
        .iter()
        .all(|r| r.experiment == ExperimentKind::Fig4 && (0.0..=1.0).contains(&r.accuracy)));
    assert_shared_inputs(&out);
    // Distinct mixes see distinct training sets.
    let seed0: Vec<&str> = out
        .fingerprints
        .iter()
        .filter(|f| f.seed == 0)
        .map(|f| f.train.as_str())
        .collect();
    assert!(seed0.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn fig4_without_multiples_is_the_baseline() {
    let cfg = config("kind = fig4\nfig4.multiples =");
    let data = prepare_data(&cfg).unwrap();
    let out = run_fig4(&cfg, &data).unwrap();
    let names: Vec<&str> = out.rows.iter().map(|r| r.condition.as_str()).collect();
    assert_eq!(names, ["raw", "raw"]);
}

#[test]
fn fig3_conditions_and_counts() {
    let cfg = config("kind = fig3\nseeds = 4");
    let data = prepare_data(&cfg).unwrap();
    let out = run_fig3(&cfg, &data).unwrap();
    let got: Vec<(&str, usize, usize)> = out
        .rows
        .iter()
        .map(|r| (r.condition.as_str(), r.n_raw_per_class, r.n_art_per_class))
        .collect();
    assert_eq!(
        got,
        [
            ("1.0raw", 70, 0),
            ("1.0art", 0, 70),
            ("0.5raw+0.5art", 35, 35),
            ("0.5raw", 35, 0),
            ("0.5art", 0, 35)
        ]
    );
    assert_shared_inputs(&out);
    let summary = summarize(&out.rows);
    assert_eq!(summary.len(), 5);
    assert!(summary.iter().all(|s| s.n_seeds == 1 && s.sd == 0.0));
}

#[test]
fn fig5_rows_pair_up() {
    let cfg = config("kind = fig5");
    let data = prepare_data(&cfg).unwrap();
    let out = run_fig5(&cfg, &data).unwrap();
    assert_eq!(out.rows.len(), 7 * 2 * 2);
    assert_eq!(out.gan_logs.len(), 7 * 2);
    let imp = fig5_improvements(&out.rows);
    assert_eq!(
        imp.iter().map(|(c, _)| *c).collect::<Vec<_>>(),
        [10, 20, 30, 40, 50, 60, 70]
    );
    for (c, d) in &imp {
        let mean = |art: bool| {
            let v: Vec<f64> = out
                .rows
                .iter()
                .filter(|r| r.n_raw_per_class == *c && (r.n_art_per_class > 0) == art)
                .map(|r| r.accuracy)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((d - (mean(true) - mean(false))).abs() < 1e-12);
    }
    assert_shared_inputs(&out);
}

#[test]
fn zero_count_is_rejected() {
    let doc = KvDoc::parse(&format!("{FAST}\nkind = fig5\nfig5.counts = 0, 10")).unwrap();
    assert!(matches!(ExperimentConfig::from_doc(&doc), Err(Error::Invalid(_))));
    let doc = KvDoc::parse(&format!("{FAST}\nseeds =")).unwrap();
    assert!(ExperimentConfig::from_doc(&doc).is_err());
    let doc = KvDoc::parse("gan.bogus = 1").unwrap();
    assert!(matches!(
        ExperimentConfig::from_doc(&doc),
        Err(Error::Config { line: 1, .. })
    ));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&format!("kind = fig3\nseeds = 2\nout = {}", dir.path().display()));
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(results_csv(&a.rows), results_csv(&b.rows));
    assert_eq!(fingerprints_csv(&a.fingerprints), fingerprints_csv(&b.fingerprints));
    assert!(results_csv(&a.rows).starts_with(RESULT_CSV_HEADER));
}

#[test]
fn outputs_land_in_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&format!(
        "kind = fig5\nseeds = 0\nfig5.counts = 10, 20\nout = {}",
        dir.path().display()
    ));
    run_experiment(&cfg).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "fingerprints.csv",
            "gan_0_raw10.csv",
            "gan_0_raw20.csv",
            "improvement.csv",
            "results.csv",
            "summary.csv"
        ]
    );
}

#[test]
fn derived_seeds_are_spread() {
    let a: Vec<u64> = (0..4).map(|s| derive_seed(s, 1)).collect();
    let b: Vec<u64> = (0..4).map(|s| derive_seed(s, 2)).collect();
    assert!(a
        .iter()
        .chain(&b)
        .enumerate()
        .all(|(i, x)| a.iter().chain(&b).skip(i + 1).all(|y| x != y)));
}

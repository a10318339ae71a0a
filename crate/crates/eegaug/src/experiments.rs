//! Mixing-ratio experiments: raw versus artificial training data, measured by
//! classifier accuracy on a fixed test set.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use eegaug_core::cdcgan::{generate_labeled, train_cdcgan, GanConfig, TrainLog, TrainedGan};
use eegaug_core::classifier::{evaluate, train_classifier, Classifier, CnnArch};
use eegaug_core::data::{mix_counts, mix_plan, synthesize_dataset, Dataset, Label, SyntheticSpec};
use eegaug_core::wavelet::{Tfr, TfrAxes};
use sha2::{Digest, Sha256};

use crate::config::{DataSource, ExperimentConfig, ExperimentKind};
use crate::error::{io, Error, Result};
use crate::formats::{self, num};

/// Deterministic sub-seed for `tag` under `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub condition: String,
    pub seed: u64,
    pub n_raw_per_class: usize,
    pub n_art_per_class: usize,
    pub accuracy: f64,
}

/// Content hashes showing which inputs a result row saw.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub condition: String,
    pub seed: u64,
    pub train: String,
    pub test: String,
    pub init: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: ExperimentKind,
    pub condition: String,
    pub n_seeds: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub fingerprints: Vec<Fingerprint>,
    /// `(seed, raw subset name, log)` for every GAN trained.
    pub gan_logs: Vec<(u64, String, TrainLog)>,
}

/// Preprocessed train and test TFRs.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub train: Vec<Tfr>,
    pub test: Vec<Tfr>,
}

impl PreparedData {
    pub fn axes(&self) -> &TfrAxes {
        &self.train[0].axes
    }

    pub fn shape(&self) -> [usize; 3] {
        self.train[0].shape()
    }
}

/// Loads or synthesizes the trials and applies the TFR pipeline.
pub fn prepare_data(config: &ExperimentConfig) -> Result<PreparedData> {
    let (train, test) = match &config.source {
        DataSource::Synthetic(s) => {
            let test_spec = SyntheticSpec {
                trials_per_class: s.test_trials_per_class,
                ..s.spec.clone()
            };
            (
                synthesize_dataset(&s.spec, s.seed)?,
                synthesize_dataset(&test_spec, derive_seed(s.seed, 0x7e57))?,
            )
        }
        DataSource::Files { train, test, format } => (
            formats::load_dataset(train, *format)?,
            formats::load_dataset(test, *format)?,
        ),
    };
    let tfrs = |ds: &Dataset| config.tfr.apply_all(ds.trials());
    let out = PreparedData {
        train: tfrs(&train)?,
        test: tfrs(&test)?,
    };
    if out.train.is_empty() || out.test.is_empty() {
        return Err(Error::Invalid("train and test sets must be non-empty".into()));
    }
    Ok(out)
}

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn tfr_fingerprint(samples: &[Tfr]) -> Result<String> {
    let mut buf = Vec::new();
    formats::write_tfrb(samples, &mut buf)?;
    Ok(sha(&buf))
}

fn init_fingerprint(arch: &CnnArch, seed: u64) -> Result<String> {
    let clf = Classifier::init(arch.clone(), seed)?;
    let mut buf = Vec::new();
    formats::write_checkpoint(clf.params(), &mut buf)?;
    Ok(sha(&buf))
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    data: &'a PreparedData,
    arch: CnnArch,
    test_fp: String,
    out: ExperimentOutput,
}

impl<'a> Runner<'a> {
    fn new(config: &'a ExperimentConfig, data: &'a PreparedData) -> Result<Self> {
        Ok(Runner {
            config,
            arch: CnnArch {
                input_shape: data.shape(),
                ..config.clf_arch.clone()
            },
            data,
            test_fp: tfr_fingerprint(&data.test)?,
            out: ExperimentOutput::default(),
        })
    }

    fn gan_config(&self, seed: u64) -> GanConfig {
        GanConfig {
            tfr_shape: self.data.shape(),
            seed,
            ..self.config.gan.clone()
        }
    }

    /// Trains a GAN on `raw` and draws `per_class` artificial samples per class.
    fn artificial(&mut self, raw: &[Tfr], per_class: usize, seed: u64, subset: &str) -> Result<Vec<Tfr>> {
        if per_class == 0 {
            return Ok(Vec::new());
        }
        let gan = train_cdcgan(raw, &self.gan_config(derive_seed(seed, 0x6a4)))?;
        let out = generate(&gan, self.data.axes(), per_class, seed)?;
        self.out.gan_logs.push((seed, subset.to_string(), gan.log));
        Ok(out)
    }

    fn evaluate(&mut self, condition: &str, seed: u64, train: &[Tfr], counts: (usize, usize)) -> Result<()> {
        let trained = train_classifier(train, &self.arch, &self.config.clf_hyper, seed)?;
        let metrics = evaluate(&trained.classifier, &self.data.test)?;
        self.out.rows.push(ResultRow {
            experiment: self.config.kind,
            condition: condition.to_string(),
            seed,
            n_raw_per_class: counts.0,
            n_art_per_class: counts.1,
            accuracy: metrics.accuracy,
        });
        self.out.fingerprints.push(Fingerprint {
            condition: condition.to_string(),
            seed,
            train: tfr_fingerprint(train)?,
            test: self.test_fp.clone(),
            init: init_fingerprint(&self.arch, seed)?,
        });
        Ok(())
    }

    /// Runs `(label, raw fraction, artificial multiple)` conditions against
    /// the full raw training pool.
    fn run_mixes(mut self, conditions: &[(String, f64, f64)]) -> Result<ExperimentOutput> {
        let reference = self.config.reference_per_class;
        let plans = conditions
            .iter()
            .map(|(_, r, a)| mix_plan(*r, *a, reference).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        let max_art = plans.iter().map(|p| p.1).max().unwrap_or(0);
        for &seed in &self.config.seeds {
            let pool = mix_counts(&self.data.train, &[], reference, 0, derive_seed(seed, 0x9001))?;
            let art = self.artificial(&pool, max_art, seed, &format!("raw{reference}"))?;
            for ((name, _, _), &(n_raw, n_art)) in conditions.iter().zip(&plans) {
                let train = mix_counts(&pool, &art, n_raw, n_art, derive_seed(seed, 0x313))?;
                self.evaluate(name, seed, &train, (n_raw, n_art))?;
            }
        }
        Ok(self.out)
    }
}

fn generate(gan: &TrainedGan, axes: &TfrAxes, per_class: usize, seed: u64) -> Result<Vec<Tfr>> {
    let mut out = Vec::with_capacity(2 * per_class);
    for label in Label::ALL {
        let batch = generate_labeled(
            &gan.generator,
            axes,
            label,
            per_class,
            derive_seed(seed, 0xa57 + label.index() as u64),
        )?;
        let base = (label.index() * per_class) as u32;
        out.extend(batch.into_iter().map(|s| {
            let id = s.trial_id;
            s.with_trial_id(base + id)
        }));
    }
    Ok(out)
}

fn fraction_label(f: f64) -> String {
    format!("{f:.1}")
}

/// Five conditions at the reference count: all raw, all artificial, half of
/// each, half raw, half artificial.
pub fn run_fig3(config: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentOutput> {
    let conditions: Vec<(String, f64, f64)> = [(1.0, 0.0), (0.0, 1.0), (0.5, 0.5), (0.5, 0.0), (0.0, 0.5)]
        .into_iter()
        .map(|(r, a)| {
            let name = match (r > 0.0, a > 0.0) {
                (true, true) => format!("{}raw+{}art", fraction_label(r), fraction_label(a)),
                (true, false) => format!("{}raw", fraction_label(r)),
                _ => format!("{}art", fraction_label(a)),
            };
            (name, r, a)
        })
        .collect();
    Runner::new(config, data)?.run_mixes(&conditions)
}

/// All raw data plus each configured multiple of artificial data.
pub fn run_fig4(config: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentOutput> {
    let mut conditions = vec![("raw".to_string(), 1.0, 0.0)];
    conditions.extend(config.fig4_multiples.iter().map(|&m| (format!("raw+{m}x"), 1.0, m)));
    Runner::new(config, data)?.run_mixes(&conditions)
}

/// Raw per-class counts swept with and without a fixed artificial addition;
/// one GAN per (seed, raw subset).
pub fn run_fig5(config: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentOutput> {
    let mut r = Runner::new(config, data)?;
    let m = config.fig5_art_per_class;
    for &seed in &config.seeds {
        for &count in &config.fig5_counts {
            let subset = mix_counts(&data.train, &[], count, 0, derive_seed(seed, 0x5000 + count as u64))?;
            let name = format!("raw{count}");
            let art = r.artificial(&subset, m, seed, &name)?;
            r.evaluate(&name, seed, &subset, (count, 0))?;
            let mut mixed = subset.clone();
            mixed.extend(art);
            r.evaluate(&format!("{name}+art{m}"), seed, &mixed, (count, m))?;
        }
    }
    Ok(r.out)
}

/// Per-condition mean and sample standard deviation, in first-seen order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for row in rows {
        if out.iter().any(|s| s.condition == row.condition) {
            continue;
        }
        let acc: Vec<f64> = rows
            .iter()
            .filter(|r| r.condition == row.condition)
            .map(|r| r.accuracy)
            .collect();
        let n = acc.len() as f64;
        let mean = acc.iter().sum::<f64>() / n;
        let sd = if acc.len() > 1 {
            (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        out.push(SummaryRow {
            experiment: row.experiment,
            condition: row.condition.clone(),
            n_seeds: acc.len(),
            mean,
            sd,
        });
    }
    out
}

/// Mean over seeds of `accuracy(raw + art) − accuracy(raw)` per raw count.
pub fn fig5_improvements(rows: &[ResultRow]) -> Vec<(usize, f64)> {
    let mut counts: Vec<usize> = rows.iter().map(|r| r.n_raw_per_class).collect();
    counts.dedup();
    let mut seen = Vec::new();
    for c in counts {
        if seen.iter().any(|(s, _)| *s == c) {
            continue;
        }
        let deltas: Vec<f64> = rows
            .iter()
            .filter(|r| r.n_raw_per_class == c && r.n_art_per_class > 0)
            .filter_map(|aug| {
                rows.iter()
                    .find(|r| r.seed == aug.seed && r.n_raw_per_class == c && r.n_art_per_class == 0)
                    .map(|raw| aug.accuracy - raw.accuracy)
            })
            .collect();
        if !deltas.is_empty() {
            seen.push((c, deltas.iter().sum::<f64>() / deltas.len() as f64));
        }
    }
    seen
}

pub const RESULT_CSV_HEADER: &str = "experiment,condition,seed,n_raw_per_class,n_art_per_class,accuracy";

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = format!("{RESULT_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.experiment.name(),
            r.condition,
            r.seed,
            r.n_raw_per_class,
            r.n_art_per_class,
            num(r.accuracy)
        );
    }
    s
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("experiment,condition,n_seeds,mean_accuracy,sd_accuracy\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.experiment.name(),
            r.condition,
            r.n_seeds,
            num(r.mean),
            num(r.sd)
        );
    }
    s
}

pub fn fingerprints_csv(fps: &[Fingerprint]) -> String {
    let mut s = String::from("condition,seed,train_sha256,test_sha256,init_sha256\n");
    for f in fps {
        let _ = writeln!(s, "{},{},{},{},{}", f.condition, f.seed, f.train, f.test, f.init);
    }
    s
}

/// Writes `results.csv`, `summary.csv`, `fingerprints.csv`, one
/// `gan_<seed>_<subset>.csv` per GAN and, for raw-count sweeps, `improvement.csv`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let put = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(io(p))
    };
    put("results.csv", results_csv(&out.rows))?;
    put("summary.csv", summary_csv(&summarize(&out.rows)))?;
    put("fingerprints.csv", fingerprints_csv(&out.fingerprints))?;
    for (seed, subset, log) in &out.gan_logs {
        put(&format!("gan_{seed}_{subset}.csv"), formats::train_log_csv(log))?;
    }
    if out.rows.first().map(|r| r.experiment) == Some(ExperimentKind::Fig5) {
        let mut s = String::from("n_raw_per_class,mean_improvement\n");
        for (c, d) in fig5_improvements(&out.rows) {
            let _ = writeln!(s, "{c},{}", num(d));
        }
        put("improvement.csv", s)?;
    }
    Ok(())
}

/// Runs a mixing experiment end to end and writes its tables to `out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let data = prepare_data(config)?;
    let out = match config.kind {
        ExperimentKind::Fig3 => run_fig3(config, &data)?,
        ExperimentKind::Fig4 => run_fig4(config, &data)?,
        ExperimentKind::Fig5 => run_fig5(config, &data)?,
        other => {
            return Err(Error::Invalid(format!(
                "{} is a standalone command, not a mixing experiment",
                other.name()
            )))
        }
    };
    write_outputs(&out, &config.out_dir)?;
    Ok(out)
}

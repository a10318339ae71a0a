use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eegaug::config::{ExperimentConfig, ExperimentKind, KvDoc, SynthSource};
use eegaug::experiments::{derive_seed, run_experiment, summarize};
use eegaug::formats::{self, DatasetFormat};
use eegaug::render;
use eegaug_core::cdcgan::{generate_labeled, train_cdcgan, GanConfig};
use eegaug_core::classifier::{evaluate, train_classifier, CnnArch};
use eegaug_core::data::{synthesize_dataset, Label, SyntheticSpec};

#[derive(Parser)]
#[command(
    name = "eegaug",
    version,
    about = "Conditional-GAN augmentation of motor-imagery EEG"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Key/value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set gan.iterations=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Overrides the configured seeds.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => {
                let doc = KvDoc::load(p)?;
                let mut c = ExperimentConfig::default();
                for (k, v, line) in &doc.entries {
                    c.set(k, v)
                        .map_err(|m| anyhow::anyhow!("{}:{line}: {m}", p.display()))?;
                }
                c
            }
            None => ExperimentConfig::default(),
        };
        for s in &self.sets {
            let (k, v) = s
                .split_once('=')
                .with_context(|| format!("--set {s:?} is not KEY=VALUE"))?;
            c.set(k.trim(), v.trim()).map_err(anyhow::Error::msg)?;
        }
        if let Some(seed) = self.seed {
            c.seeds = vec![seed];
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a labeled trial dataset.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's data seed.
        #[arg(long)]
        seed: Option<u64>,
        /// `train` uses trials_per_class, `test` uses test_trials_per_class
        /// and an independent seed.
        #[arg(long, default_value = "train")]
        split: String,
    },
    /// Window, transform and normalize trials into a TFR archive.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        band: Option<String>,
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        tcols: Option<usize>,
        /// Sample rate for CSV input.
        #[arg(long, default_value_t = 128.0)]
        rate: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Train the conditional GAN on a TFR archive.
    TrainGan {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Draw labeled artificial TFRs from a trained generator.
    Generate {
        #[arg(long)]
        gan: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the CNN classifier on a TFR archive.
    TrainClf {
        #[arg(long = "in")]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch training loss as CSV.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a classifier checkpoint; prints or writes a metrics row.
    Eval {
        #[arg(long)]
        clf: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "eval")]
        condition: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a mixing experiment.
    Experiment {
        /// fig3, fig4 or fig5.
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Render one TFR as SVG or per-channel PGM.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        scale: usize,
        /// Second archive to show below the first (SVG only).
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        compare_index: usize,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn pick(samples: &[eegaug_core::wavelet::Tfr], index: usize, path: &Path) -> Result<eegaug_core::wavelet::Tfr> {
    samples
        .get(index)
        .cloned()
        .with_context(|| format!("{} has {} samples, no index {index}", path.display(), samples.len()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth { spec, out, seed, split } => {
            let mut src = SynthSource::from_doc(&KvDoc::load(&spec)?)?;
            if let Some(s) = seed {
                src.seed = s;
            }
            let (spec, seed) = match split.as_str() {
                "train" => (src.spec.clone(), src.seed),
                "test" => (
                    SyntheticSpec {
                        trials_per_class: src.test_trials_per_class,
                        ..src.spec.clone()
                    },
                    derive_seed(src.seed, 0x7e57),
                ),
                other => bail!("--split must be train or test, got {other:?}"),
            };
            let ds = synthesize_dataset(&spec, seed)?;
            let format = DatasetFormat::from_path(&out, spec.sample_rate_hz);
            formats::save_dataset(&ds, &out, format)?;
        }
        Command::Preprocess {
            input,
            out,
            band,
            window,
            tcols,
            rate,
            common,
        } => {
            let mut c = common.config()?;
            for (k, v) in [
                ("tfr.band", band),
                ("tfr.window", window),
                ("tfr.tcols", tcols.map(|t| t.to_string())),
            ] {
                if let Some(v) = v {
                    c.set(k, &v).map_err(anyhow::Error::msg)?;
                }
            }
            let ds = formats::load_dataset(&input, DatasetFormat::from_path(&input, rate))?;
            let tfrs = c.tfr.apply_all(ds.trials())?;
            formats::save_tfrs(&tfrs, &out)?;
        }
        Command::TrainGan {
            input,
            out,
            log,
            common,
        } => {
            let c = common.config()?;
            let data = formats::load_tfrs(&input)?;
            let first = data.first().context("TFR archive is empty")?;
            let cfg = GanConfig {
                tfr_shape: first.shape(),
                seed: c.seeds[0],
                ..c.gan.clone()
            };
            let gan = train_cdcgan(&data, &cfg)?;
            formats::save_checkpoint(&formats::gan_to_params(&gan, &cfg, &first.axes), &out)?;
            if let Some(p) = log {
                write(&p, &formats::train_log_csv(&gan.log))?;
            }
        }
        Command::Generate {
            gan,
            label,
            count,
            seed,
            out,
        } => {
            let label = match label.to_ascii_lowercase().as_str() {
                "left" => Label::LeftHand,
                "right" => Label::RightHand,
                other => bail!("--label must be left or right, got {other:?}"),
            };
            let (gan, _, axes) = formats::gan_from_params(&formats::load_checkpoint(&gan)?)?;
            let samples = generate_labeled(&gan.generator, &axes, label, count, seed)?;
            formats::save_tfrs(&samples, &out)?;
        }
        Command::TrainClf {
            input,
            out,
            log,
            common,
        } => {
            let c = common.config()?;
            let mut data = Vec::new();
            for p in &input {
                data.extend(formats::load_tfrs(p)?);
            }
            let first = data.first().context("no training samples")?;
            let arch = CnnArch {
                input_shape: first.shape(),
                ..c.clf_arch.clone()
            };
            let trained = train_classifier(&data, &arch, &c.clf_hyper, c.seeds[0])?;
            formats::save_checkpoint(&formats::classifier_to_params(&trained.classifier), &out)?;
            if let Some(p) = log {
                let mut s = String::from("epoch,loss\n");
                for (i, l) in trained.epoch_losses.iter().enumerate() {
                    s.push_str(&format!("{i},{l}\n"));
                }
                write(&p, &s)?;
            }
        }
        Command::Eval {
            clf,
            input,
            condition,
            seed,
            out,
        } => {
            let clf = formats::classifier_from_params(&formats::load_checkpoint(&clf)?)?;
            let m = evaluate(&clf, &formats::load_tfrs(&input)?)?;
            let text = format!(
                "{}\n{}\n",
                formats::METRICS_CSV_HEADER,
                formats::metrics_csv_row(&condition, seed, &m)
            );
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Experiment { kind, out, common } => {
            let mut c = common.config()?;
            c.kind = match ExperimentKind::from_name(&kind) {
                Some(k @ (ExperimentKind::Fig3 | ExperimentKind::Fig4 | ExperimentKind::Fig5)) => k,
                _ => bail!("experiment must be fig3, fig4 or fig5, got {kind:?}"),
            };
            if let Some(o) = out {
                c.out_dir = o;
            }
            let result = run_experiment(&c)?;
            for s in summarize(&result.rows) {
                println!("{:<20} {:.4} ± {:.4} (n={})", s.condition, s.mean, s.sd, s.n_seeds);
            }
        }
        Command::Render {
            input,
            index,
            out,
            scale,
            compare,
            compare_index,
        } => {
            let sample = pick(&formats::load_tfrs(&input)?, index, &input)?;
            match compare {
                Some(other) => {
                    let second = pick(&formats::load_tfrs(&other)?, compare_index, &other)?;
                    render::render_comparison(&sample, &second, &out, scale)?;
                }
                None => {
                    render::render_tfr(&sample, &out, scale)?;
                }
            }
        }
    }
    Ok(())
}

//! Plain-text `key = value` configuration.
//!
//! Blank lines and `#` comments are ignored. Lists are comma separated and
//! ranges use `lo:hi`. Unknown keys are errors.

use std::path::{Path, PathBuf};

use eegaug_core::cdcgan::{GLossMode, GanArch, GanConfig};
use eegaug_core::classifier::{ClfHyper, CnnArch, ConvBlock};
use eegaug_core::data::{Burst, Label, SyntheticSpec};
use eegaug_core::preprocess::TfrConfig;
use eegaug_core::wavelet::MorletParams;

use crate::error::{io, Error, Result};
use crate::formats::DatasetFormat;

/// Parsed `key = value` pairs with their line numbers, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDoc {
    pub entries: Vec<(String, String, usize)>,
}

impl KvDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            entries.push((k.to_string(), v.trim().to_string(), i + 1));
        }
        Ok(KvDoc { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(io(path))?)
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("{key}: cannot parse {v:?}"))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse(key, s.trim())).collect()
}

fn range(key: &str, v: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = v
        .split_once(':')
        .ok_or_else(|| format!("{key}: expected lo:hi, got {v:?}"))?;
    Ok((parse(key, a.trim())?, parse(key, b.trim())?))
}

fn pair(key: &str, v: &str) -> std::result::Result<(usize, usize), String> {
    let l: Vec<usize> = list(key, v)?;
    match l[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("{key}: expected two comma-separated integers, got {v:?}")),
    }
}

fn dims(key: &str, v: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = v
        .split_once('x')
        .ok_or_else(|| format!("{key}: expected AxB, got {v:?}"))?;
    Ok((parse(key, a.trim())?, parse(key, b.trim())?))
}

fn boolean(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true/false, got {v:?}")),
    }
}

fn label(key: &str, v: &str) -> std::result::Result<Label, String> {
    match v.to_ascii_lowercase().as_str() {
        "left" | "lefthand" | "0" => Ok(Label::LeftHand),
        "right" | "righthand" | "1" => Ok(Label::RightHand),
        _ => Err(format!("{key}: unknown class {v:?}")),
    }
}

/// `out:KFxKT:PFxPT[:SFxST]` per block, comma separated.
fn blocks(key: &str, v: &str) -> std::result::Result<Vec<ConvBlock>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|b| {
            let parts: Vec<&str> = b.trim().split(':').collect();
            if !(3..=4).contains(&parts.len()) {
                return Err(format!("{key}: block {b:?} is not out:KxK:PxP[:SxS]"));
            }
            Ok(ConvBlock {
                out_channels: parse(key, parts[0])?,
                kernel: dims(key, parts[1])?,
                pool: dims(key, parts[2])?,
                stride: if parts.len() == 4 { dims(key, parts[3])? } else { (1, 1) },
            })
        })
        .collect()
}

/// `freq:amplitude:on:off` per burst, comma separated.
fn bursts(key: &str, v: &str) -> std::result::Result<Vec<Burst>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|b| {
            let f: Vec<f64> = b
                .trim()
                .split(':')
                .map(|x| parse(key, x.trim()))
                .collect::<std::result::Result<_, _>>()?;
            match f[..] {
                [frequency_hz, amplitude, on, off] => Ok(Burst {
                    frequency_hz,
                    amplitude,
                    on_s: (on, off),
                }),
                _ => Err(format!("{key}: burst {b:?} is not freq:amp:on:off")),
            }
        })
        .collect()
}

/// Synthetic data settings: the generator spec plus the held-out test size
/// and the data seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSource {
    pub spec: SyntheticSpec,
    pub test_trials_per_class: usize,
    pub seed: u64,
}

impl Default for SynthSource {
    fn default() -> Self {
        SynthSource {
            spec: SyntheticSpec::motor_imagery(70, 5.0),
            test_trials_per_class: 70,
            seed: 0,
        }
    }
}

impl SynthSource {
    fn set(&mut self, key: &str, v: &str) -> std::result::Result<bool, String> {
        match key {
            "synth.trials_per_class" => self.spec.trials_per_class = parse(key, v)?,
            "synth.test_trials_per_class" => self.test_trials_per_class = parse(key, v)?,
            "synth.noise_sigma" => self.spec.noise_sigma = parse(key, v)?,
            "synth.amplitude_jitter" => self.spec.amplitude_jitter = parse(key, v)?,
            "synth.sample_rate_hz" => self.spec.sample_rate_hz = parse(key, v)?,
            "synth.duration_s" => self.spec.duration_s = parse(key, v)?,
            "synth.band" => self.spec.band_hz = range(key, v)?,
            "synth.seed" => self.seed = parse(key, v)?,
            _ => {
                let Some(rest) = key.strip_prefix("synth.signature.") else {
                    return Ok(false);
                };
                let (class, channel) = rest
                    .split_once('.')
                    .ok_or_else(|| format!("{key}: expected synth.signature.<class>.<channel>"))?;
                let class = label(key, class)?;
                let c = self
                    .spec
                    .channels
                    .iter()
                    .position(|n| n == channel)
                    .ok_or_else(|| format!("{key}: unknown channel {channel:?}"))?;
                self.spec.class_signatures[class.index()][c] = bursts(key, v)?;
            }
        }
        Ok(true)
    }

    /// Reads a standalone spec document (`synth.*` keys only).
    pub fn from_doc(doc: &KvDoc) -> Result<Self> {
        let mut s = SynthSource::default();
        for (k, v, line) in &doc.entries {
            match s.set(k, v) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(Error::Config {
                        line: *line,
                        message: format!("unknown key {k:?}"),
                    })
                }
                Err(message) => return Err(Error::Config { line: *line, message }),
            }
        }
        s.spec.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SynthSource),
    Files {
        train: PathBuf,
        test: PathBuf,
        format: DatasetFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig3,
    Fig4,
    Fig5,
    TrainGan,
    RenderTfr,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Fig5 => "fig5",
            ExperimentKind::TrainGan => "train-gan",
            ExperimentKind::RenderTfr => "render",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::Fig3, Self::Fig4, Self::Fig5, Self::TrainGan, Self::RenderTfr]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub tfr: TfrConfig,
    /// `tfr_shape` and `seed` are filled in per run.
    pub gan: GanConfig,
    pub clf_arch: CnnArch,
    pub clf_hyper: ClfHyper,
    pub kind: ExperimentKind,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Per-class count that fractions and multiples refer to.
    pub reference_per_class: usize,
    pub fig4_multiples: Vec<f64>,
    pub fig5_counts: Vec<usize>,
    pub fig5_art_per_class: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: DataSource::Synthetic(SynthSource::default()),
            tfr: TfrConfig::default(),
            gan: GanConfig::default(),
            clf_arch: CnnArch::default(),
            clf_hyper: ClfHyper::default(),
            kind: ExperimentKind::Fig3,
            seeds: vec![0, 1, 2, 3, 4],
            out_dir: PathBuf::from("out"),
            reference_per_class: 70,
            fig4_multiples: vec![0.5, 1.0, 1.5, 2.0],
            fig5_counts: vec![10, 20, 30, 40, 50, 60, 70],
            fig5_art_per_class: 70,
        }
    }
}

impl ExperimentConfig {
    /// Applies one setting; the same keys serve config files and CLI flags.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let g = &mut self.gan;
        match key {
            "kind" => {
                self.kind = ExperimentKind::from_name(v).ok_or_else(|| format!("kind: unknown experiment {v:?}"))?
            }
            "seeds" => self.seeds = list(key, v)?,
            "seed" => self.seeds = vec![parse(key, v)?],
            "out" => self.out_dir = PathBuf::from(v),
            "data.source" => match v {
                "synthetic" => {
                    if !matches!(self.source, DataSource::Synthetic(_)) {
                        self.source = DataSource::Synthetic(SynthSource::default());
                    }
                }
                "files" => {
                    if !matches!(self.source, DataSource::Files { .. }) {
                        self.source = DataSource::Files {
                            train: PathBuf::new(),
                            test: PathBuf::new(),
                            format: DatasetFormat::Eegb,
                        };
                    }
                }
                _ => return Err(format!("data.source: expected synthetic or files, got {v:?}")),
            },
            "data.train" | "data.test" | "data.format" | "data.csv_rate" => {
                let DataSource::Files { train, test, format } = &mut self.source else {
                    return Err(format!("{key} requires data.source = files (set it first)"));
                };
                match key {
                    "data.train" => *train = PathBuf::from(v),
                    "data.test" => *test = PathBuf::from(v),
                    "data.format" => {
                        *format = match v {
                            "eegb" => DatasetFormat::Eegb,
                            "csv" => DatasetFormat::Csv { sample_rate_hz: 128.0 },
                            _ => return Err(format!("data.format: expected eegb or csv, got {v:?}")),
                        }
                    }
                    _ => {
                        let DatasetFormat::Csv { sample_rate_hz } = format else {
                            return Err("data.csv_rate requires data.format = csv".into());
                        };
                        *sample_rate_hz = parse(key, v)?;
                    }
                }
            }
            "tfr.window" => self.tfr.window_s = range(key, v)?,
            "tfr.band" => self.tfr.band_hz = range(key, v)?,
            "tfr.band_step" => self.tfr.band_step_hz = parse(key, v)?,
            "tfr.tcols" => self.tfr.time_columns = parse(key, v)?,
            "tfr.normalize" => self.tfr.normalize = boolean(key, v)?,
            "tfr.morlet" => {
                let (fb, fc) = range(key, v)?;
                self.tfr.morlet = MorletParams::new(fb, fc).map_err(|e| e.to_string())?;
            }
            "gan.noise_dim" => g.noise_dim = parse(key, v)?,
            "gan.d_steps" => g.d_steps_per_g_step = parse(key, v)?,
            "gan.batch" => g.batch_size = parse(key, v)?,
            "gan.iterations" => g.iterations = parse(key, v)?,
            "gan.lr_g" => g.adam_g.lr = parse(key, v)?,
            "gan.lr_d" => g.adam_d.lr = parse(key, v)?,
            "gan.beta1" => {
                g.adam_g.beta1 = parse(key, v)?;
                g.adam_d.beta1 = g.adam_g.beta1;
            }
            "gan.beta2" => {
                g.adam_g.beta2 = parse(key, v)?;
                g.adam_d.beta2 = g.adam_g.beta2;
            }
            "gan.loss" => {
                g.g_loss_mode = match v {
                    "nonsaturating" => GLossMode::NonSaturating,
                    "saturating" => GLossMode::Saturating,
                    _ => return Err(format!("gan.loss: expected nonsaturating or saturating, got {v:?}")),
                }
            }
            "gan.arch" => {
                g.arch = match v {
                    "dcgan" => GanArch::Dcgan {
                        generator_widths: (64, 32),
                        discriminator_widths: (32, 64),
                    },
                    "mlp" => GanArch::Mlp { hidden: 64 },
                    _ => return Err(format!("gan.arch: expected dcgan or mlp, got {v:?}")),
                }
            }
            "gan.g_widths" | "gan.d_widths" => {
                let GanArch::Dcgan {
                    generator_widths,
                    discriminator_widths,
                } = &mut g.arch
                else {
                    return Err(format!("{key} requires gan.arch = dcgan"));
                };
                *(if key == "gan.g_widths" {
                    generator_widths
                } else {
                    discriminator_widths
                }) = pair(key, v)?;
            }
            "gan.mlp_hidden" => {
                let GanArch::Mlp { hidden } = &mut g.arch else {
                    return Err("gan.mlp_hidden requires gan.arch = mlp".into());
                };
                *hidden = parse(key, v)?;
            }
            "gan.probe" => g.probe_size = parse(key, v)?,
            "clf.blocks" => self.clf_arch.conv_blocks = blocks(key, v)?,
            "clf.dense" => self.clf_arch.dense = list(key, v)?,
            "clf.lr" => self.clf_hyper.lr = parse(key, v)?,
            "clf.batch" => self.clf_hyper.batch_size = parse(key, v)?,
            "clf.epochs" => self.clf_hyper.epochs = parse(key, v)?,
            "reference_per_class" => self.reference_per_class = parse(key, v)?,
            "fig4.multiples" => self.fig4_multiples = list(key, v)?,
            "fig5.counts" => self.fig5_counts = list(key, v)?,
            "fig5.art_per_class" => self.fig5_art_per_class = parse(key, v)?,
            _ => {
                let DataSource::Synthetic(s) = &mut self.source else {
                    return Err(format!("unknown key {key:?}"));
                };
                if !s.set(key, v)? {
                    return Err(format!("unknown key {key:?}"));
                }
            }
        }
        Ok(())
    }

    pub fn from_doc(doc: &KvDoc) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for (k, v, line) in &doc.entries {
            c.set(k, v).map_err(|message| Error::Config { line: *line, message })?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_doc(&KvDoc::load(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.reference_per_class == 0 {
            return bad("reference_per_class must be positive".into());
        }
        if let Some(c) = self.fig5_counts.iter().find(|&&c| c == 0) {
            return bad(format!("fig5.counts contains {c}; counts must be positive"));
        }
        if self.fig4_multiples.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return bad("fig4.multiples must be non-negative".into());
        }
        if self.clf_hyper.batch_size == 0 || self.gan.batch_size == 0 {
            return bad("batch sizes must be positive".into());
        }
        match &self.source {
            DataSource::Synthetic(s) => {
                s.spec.validate()?;
                let need = match self.kind {
                    ExperimentKind::Fig5 => self.fig5_counts.iter().copied().max().unwrap_or(0),
                    _ => self.reference_per_class,
                };
                if s.spec.trials_per_class < need {
                    return bad(format!(
                        "synth.trials_per_class {} is below the {need} per class the experiment draws",
                        s.spec.trials_per_class
                    ));
                }
                if s.test_trials_per_class == 0 {
                    return bad("synth.test_trials_per_class must be positive".into());
                }
            }
            DataSource::Files { train, test, .. } => {
                for p in [train, test] {
                    if !p.exists() {
                        return bad(format!("data file {} does not exist", p.display()));
                    }
                }
            }
        }
        self.gan.validate()?;
        Ok(())
    }
}

//! Binary and CSV encodings for trials, TFRs, checkpoints and result tables.
//!
//! All binary formats are little-endian.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use eegaug_core::cdcgan::{GanArch, GanConfig, TrainLog, TrainedGan};
use eegaug_core::classifier::{Classifier, CnnArch, ConvBlock, Metrics};
use eegaug_core::data::{default_channels, Dataset, EegTrial, Label, Labeled, Provenance, Split, MONTAGE};
use eegaug_core::numerics::{ParamSet, Tensor};
use eegaug_core::wavelet::{Normalization, Tfr, TfrAxes};

use crate::error::{io, Error, Result};

const EEGB_MAGIC: &[u8; 4] = b"EEGB";
const TFRB_MAGIC: &[u8; 4] = b"TFRB";
const CKPT_MAGIC: &[u8; 4] = b"CKPT";

/// TFRB version 1 has no per-sample scale; version 2 appends a
/// normalization tag and `(min, span)` after the provenance byte.
pub const TFRB_VERSION: u32 = 2;

/// On-disk layout of a trial dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DatasetFormat {
    Eegb,
    /// Long-form CSV; the rate is not stored in the file.
    Csv {
        sample_rate_hz: f64,
    },
}

impl DatasetFormat {
    /// Picks CSV for a `.csv` extension, Eegb otherwise.
    pub fn from_path(path: &Path, csv_rate_hz: f64) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DatasetFormat::Csv {
                sample_rate_hz: csv_rate_hz,
            },
            _ => DatasetFormat::Eegb,
        }
    }
}

fn malformed(format: &'static str, message: impl Into<String>) -> Error {
    Error::Format {
        format,
        message: message.into(),
    }
}

struct Reader<R> {
    inner: R,
    format: &'static str,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => malformed(self.format, format!("truncated while reading {what}")),
            _ => malformed(self.format, format!("{what}: {e}")),
        })?;
        Ok(buf)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.bytes::<1>(what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(what)?))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.bytes(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(what)?))
    }

    fn f32s(&mut self, n: usize, what: &str) -> Result<Vec<f32>> {
        let mut raw = vec![0u8; n * 4];
        self.inner
            .read_exact(&mut raw)
            .map_err(|_| malformed(self.format, format!("truncated while reading {what}")))?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn magic(&mut self, expect: &[u8; 4]) -> Result<()> {
        let got = self.bytes::<4>("magic")?;
        if &got != expect {
            return Err(malformed(
                self.format,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(&got),
                    String::from_utf8_lossy(expect)
                ),
            ));
        }
        Ok(())
    }

    fn expect_end(&mut self) -> Result<()> {
        let mut rest = Vec::new();
        self.inner
            .read_to_end(&mut rest)
            .map_err(|e| malformed(self.format, e.to_string()))?;
        if rest.is_empty() {
            Ok(())
        } else {
            Err(malformed(self.format, format!("{} trailing bytes", rest.len())))
        }
    }
}

fn len_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Invalid(format!("{what} {n} does not fit in u32")))
}

fn label_from_code(code: u8, format: &'static str, trial_id: u32) -> Result<Label> {
    Label::from_index(code as usize)
        .map_err(|_| malformed(format, format!("trial {trial_id}: unknown label code {code}")))
}

fn channel_names(n: usize) -> Vec<String> {
    if n == MONTAGE.len() {
        default_channels()
    } else {
        (0..n).map(|i| format!("ch{i}")).collect()
    }
}

// ---- Eegb ----

pub fn write_eegb<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    let (n_channels, n_samples, rate) = match ds.trials().first() {
        Some(t) => (t.n_channels(), t.n_samples(), t.sample_rate_hz()),
        None => (0, 0, 0.0),
    };
    let mut buf = Vec::with_capacity(24 + ds.len() * (5 + 4 * n_channels * n_samples));
    buf.extend_from_slice(EEGB_MAGIC);
    buf.extend_from_slice(&1u32.to_le_bytes());
    buf.extend_from_slice(&len_u32(ds.len(), "trial count")?.to_le_bytes());
    buf.extend_from_slice(&len_u32(n_channels, "channel count")?.to_le_bytes());
    buf.extend_from_slice(&len_u32(n_samples, "sample count")?.to_le_bytes());
    buf.extend_from_slice(&(rate as f32).to_le_bytes());
    for t in ds.trials() {
        buf.extend_from_slice(&t.trial_id().to_le_bytes());
        buf.push(t.label().index() as u8);
        for v in t.samples() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(|e| malformed("EEGB", e.to_string()))
}

pub fn read_eegb<R: Read>(r: R) -> Result<Dataset> {
    let mut r = Reader {
        inner: r,
        format: "EEGB",
    };
    r.magic(EEGB_MAGIC)?;
    let version = r.u32("version")?;
    if version != 1 {
        return Err(malformed("EEGB", format!("unsupported version {version}")));
    }
    let n_trials = r.u32("trial count")? as usize;
    let n_channels = r.u32("channel count")? as usize;
    let n_samples = r.u32("sample count")? as usize;
    let rate = r.f32("sample rate")? as f64;
    if n_trials > 0 && (n_channels == 0 || n_samples == 0) {
        return Err(malformed("EEGB", "header declares trials with no channels or samples"));
    }
    let names = channel_names(n_channels);
    let mut trials = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let id = r.u32(&format!("trial {i} id"))?;
        let label = label_from_code(r.u8(&format!("trial {id} label"))?, "EEGB", id)?;
        let samples = r.f32s(n_channels * n_samples, &format!("trial {id} samples"))?;
        trials.push(EegTrial::new(names.clone(), samples, n_samples, rate, label, id)?);
    }
    r.expect_end()?;
    Ok(Dataset::new(trials, Split::Train, Provenance::Raw)?)
}

// ---- CSV trials ----

pub const TRIAL_CSV_HEADER: &str = "trial_id,label,channel,sample_index,value";

pub fn write_trials_csv<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for t in ds.trials() {
        for (c, name) in t.channels().iter().enumerate() {
            for (k, v) in t.channel(c).iter().enumerate() {
                out.push_str(&format!("{},{},{name},{k},{v}\n", t.trial_id(), t.label().index()));
            }
        }
    }
    w.write_all(out.as_bytes()).map_err(|e| malformed("CSV", e.to_string()))
}

fn parse_label(s: &str) -> Option<Label> {
    match s.trim().to_ascii_lowercase().as_str() {
        "0" | "left" | "lefthand" => Some(Label::LeftHand),
        "1" | "right" | "righthand" => Some(Label::RightHand),
        _ => None,
    }
}

/// Reads long-form CSV. Trials and channels keep first-appearance order.
pub fn read_trials_csv<R: Read>(mut r: R, sample_rate_hz: f64) -> Result<Dataset> {
    let mut text = String::new();
    r.read_to_string(&mut text)
        .map_err(|e| malformed("CSV", e.to_string()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRIAL_CSV_HEADER => {}
        Some((_, h)) => return Err(malformed("CSV", format!("header {h:?}, expected {TRIAL_CSV_HEADER:?}"))),
        None => return Err(malformed("CSV", "empty file")),
    }
    struct Pending {
        id: u32,
        label: Label,
        rows: Vec<(String, Vec<Option<f32>>)>,
    }
    let mut trials: Vec<Pending> = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let at = |m: String| malformed("CSV", format!("line {}: {m}", ln + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(at(format!("{} fields, expected 5", f.len())));
        }
        let id: u32 = f[0]
            .trim()
            .parse()
            .map_err(|_| at(format!("bad trial_id {:?}", f[0])))?;
        let label = parse_label(f[1]).ok_or_else(|| at(format!("trial {id}: unknown label {:?}", f[1])))?;
        let channel = f[2].trim();
        let k: usize = f[3]
            .trim()
            .parse()
            .map_err(|_| at(format!("bad sample_index {:?}", f[3])))?;
        let v: f32 = f[4].trim().parse().map_err(|_| at(format!("bad value {:?}", f[4])))?;
        let pos = match trials.iter().position(|t| t.id == id) {
            Some(p) => p,
            None => {
                trials.push(Pending {
                    id,
                    label,
                    rows: Vec::new(),
                });
                trials.len() - 1
            }
        };
        let t = &mut trials[pos];
        if t.label != label {
            return Err(at(format!("trial {id} has conflicting labels")));
        }
        let row = match t.rows.iter().position(|(n, _)| n == channel) {
            Some(p) => &mut t.rows[p].1,
            None => {
                t.rows.push((channel.to_string(), Vec::new()));
                &mut t.rows.last_mut().unwrap().1
            }
        };
        if row.len() <= k {
            row.resize(k + 1, None);
        }
        if row[k].replace(v).is_some() {
            return Err(at(format!("trial {id} channel {channel} sample {k} given twice")));
        }
    }
    let mut out = Vec::with_capacity(trials.len());
    for t in trials {
        let mut names = Vec::with_capacity(t.rows.len());
        let mut rows = Vec::with_capacity(t.rows.len());
        for (name, row) in t.rows {
            let filled: Option<Vec<f32>> = row.iter().copied().collect();
            let filled = filled
                .ok_or_else(|| malformed("CSV", format!("trial {} channel {name} has gaps in sample_index", t.id)))?;
            names.push(name);
            rows.push(filled);
        }
        out.push(EegTrial::from_rows(names, rows, sample_rate_hz, t.label, t.id)?);
    }
    Ok(Dataset::new(out, Split::Train, Provenance::Raw)?)
}

/// Reads a dataset file; split is `Train` and provenance `Raw` until the
/// caller says otherwise.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(io(path))?;
    let r = io::BufReader::new(file);
    match format {
        DatasetFormat::Eegb => read_eegb(r),
        DatasetFormat::Csv { sample_rate_hz } => read_trials_csv(r, sample_rate_hz),
    }
}

pub fn save_dataset(ds: &Dataset, path: &Path, format: DatasetFormat) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        DatasetFormat::Eegb => write_eegb(ds, &mut buf)?,
        DatasetFormat::Csv { .. } => write_trials_csv(ds, &mut buf)?,
    }
    fs::write(path, buf).map_err(io(path))
}

// ---- TFRB ----

pub fn write_tfrb<W: Write>(samples: &[Tfr], mut w: W) -> Result<()> {
    let (shape, axes) = match samples.first() {
        Some(s) => (s.shape(), Some(&s.axes)),
        None => ([0, 0, 0], None),
    };
    for s in samples {
        if s.shape() != shape || Some(&s.axes) != axes {
            return Err(Error::Invalid(format!(
                "TFR {} does not share the archive's shape and axes",
                s.trial_id
            )));
        }
    }
    let mut buf = Vec::new();
    buf.extend_from_slice(TFRB_MAGIC);
    buf.extend_from_slice(&TFRB_VERSION.to_le_bytes());
    buf.extend_from_slice(&len_u32(samples.len(), "sample count")?.to_le_bytes());
    for extent in shape {
        buf.extend_from_slice(&len_u32(extent, "extent")?.to_le_bytes());
    }
    if let Some(axes) = axes {
        for v in axes.freqs_hz.iter().chain(&axes.times_s) {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    for s in samples {
        buf.extend_from_slice(&s.trial_id.to_le_bytes());
        buf.push(s.label.index() as u8);
        buf.push(s.provenance.code());
        let (tag, min, span) = match s.normalization {
            Normalization::None => (0u8, 0.0, 0.0),
            Normalization::UnitRange { min, span } => (1u8, min, span),
        };
        buf.push(tag);
        buf.extend_from_slice(&(min as f32).to_le_bytes());
        buf.extend_from_slice(&(span as f32).to_le_bytes());
        for v in s.values() {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(|e| malformed("TFRB", e.to_string()))
}

pub fn read_tfrb<R: Read>(r: R) -> Result<Vec<Tfr>> {
    let mut r = Reader {
        inner: r,
        format: "TFRB",
    };
    r.magic(TFRB_MAGIC)?;
    let version = r.u32("version")?;
    if version != 1 && version != 2 {
        return Err(malformed("TFRB", format!("unsupported version {version}")));
    }
    let n = r.u32("sample count")? as usize;
    let c = r.u32("channel count")? as usize;
    let f = r.u32("frequency count")? as usize;
    let t = r.u32("time count")? as usize;
    let to64 = |v: Vec<f32>| v.into_iter().map(f64::from).collect::<Vec<_>>();
    let axes = TfrAxes {
        freqs_hz: to64(r.f32s(f, "frequency axis")?),
        times_s: to64(r.f32s(t, "time axis")?),
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let id = r.u32(&format!("sample {i} id"))?;
        let label = label_from_code(r.u8("label")?, "TFRB", id)?;
        let code = r.u8("provenance")?;
        let provenance = Provenance::from_code(code)
            .ok_or_else(|| malformed("TFRB", format!("sample {id}: provenance code {code}")))?;
        let stored = if version == 2 {
            let tag = r.u8("normalization tag")?;
            let min = r.f32("normalization min")? as f64;
            let span = r.f32("normalization span")? as f64;
            match tag {
                0 => Some(Normalization::None),
                1 => Some(Normalization::UnitRange { min, span }),
                _ => return Err(malformed("TFRB", format!("sample {id}: normalization tag {tag}"))),
            }
        } else {
            None
        };
        let values = to64(r.f32s(c * f * t, &format!("sample {id} values"))?);
        // Version 1 carries no scale: values in [−1, 1] with any negative
        // entry are taken as unit-range maps of unknown scale.
        let normalization = stored.unwrap_or(if values.iter().any(|v| *v < 0.0) {
            Normalization::UnitRange { min: 0.0, span: 1.0 }
        } else {
            Normalization::None
        });
        out.push(Tfr::new(axes.clone(), c, values, label, id, normalization, provenance)?);
    }
    r.expect_end()?;
    Ok(out)
}

pub fn load_tfrs(path: &Path) -> Result<Vec<Tfr>> {
    let file = fs::File::open(path).map_err(io(path))?;
    read_tfrb(io::BufReader::new(file))
}

pub fn save_tfrs(samples: &[Tfr], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_tfrb(samples, &mut buf)?;
    fs::write(path, buf).map_err(io(path))
}

// ---- CKPT ----

pub fn write_checkpoint<W: Write>(params: &ParamSet, mut w: W) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CKPT_MAGIC);
    buf.extend_from_slice(&1u32.to_le_bytes());
    buf.extend_from_slice(&len_u32(params.len(), "parameter count")?.to_le_bytes());
    for (name, t) in params.iter() {
        buf.extend_from_slice(&len_u32(name.len(), "name length")?.to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&len_u32(t.rank(), "rank")?.to_le_bytes());
        for &e in t.shape() {
            buf.extend_from_slice(&len_u32(e, "extent")?.to_le_bytes());
        }
        for v in t.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(|e| malformed("CKPT", e.to_string()))
}

pub fn read_checkpoint<R: Read>(r: R) -> Result<ParamSet> {
    let mut r = Reader {
        inner: r,
        format: "CKPT",
    };
    r.magic(CKPT_MAGIC)?;
    let version = r.u32("version")?;
    if version != 1 {
        return Err(malformed("CKPT", format!("unsupported version {version}")));
    }
    let n = r.u32("parameter count")?;
    let mut out = ParamSet::new();
    for i in 0..n {
        let len = r.u32(&format!("parameter {i} name length"))? as usize;
        let mut name = vec![0u8; len];
        r.inner
            .read_exact(&mut name)
            .map_err(|_| malformed("CKPT", format!("truncated name of parameter {i}")))?;
        let name =
            String::from_utf8(name).map_err(|_| malformed("CKPT", format!("parameter {i} name is not UTF-8")))?;
        let rank = r.u32(&format!("{name} rank"))? as usize;
        let shape = (0..rank)
            .map(|_| r.u32(&format!("{name} extent")).map(|e| e as usize))
            .collect::<Result<Vec<_>>>()?;
        let len: usize = shape.iter().product();
        let data = (0..len)
            .map(|_| r.f64(&format!("{name} values")))
            .collect::<Result<Vec<_>>>()?;
        out.push(name, Tensor::new(shape, data)?);
    }
    r.expect_end()?;
    Ok(out)
}

pub fn load_checkpoint(path: &Path) -> Result<ParamSet> {
    let file = fs::File::open(path).map_err(io(path))?;
    read_checkpoint(io::BufReader::new(file))
}

pub fn save_checkpoint(params: &ParamSet, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(params, &mut buf)?;
    fs::write(path, buf).map_err(io(path))
}

// ---- self-describing model checkpoints ----

fn meta(values: &[f64]) -> Tensor {
    Tensor::new(vec![values.len()], values.to_vec()).expect("non-empty metadata")
}

fn meta_ints(params: &ParamSet, name: &str) -> Result<Vec<usize>> {
    let t = params
        .get(name)
        .ok_or_else(|| malformed("CKPT", format!("missing {name}")))?;
    t.data()
        .iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(malformed("CKPT", format!("{name} holds non-integer {v}")))
            }
        })
        .collect()
}

/// GAN parameters plus what is needed to rebuild and use them: shapes,
/// architecture and the TFR axes of the training data.
pub fn gan_to_params(gan: &TrainedGan, config: &GanConfig, axes: &TfrAxes) -> ParamSet {
    let mut p = gan.to_checkpoint();
    let [c, f, t] = config.tfr_shape;
    p.push(
        "meta.shape",
        meta(&[
            config.noise_dim as f64,
            config.class_count as f64,
            c as f64,
            f as f64,
            t as f64,
        ]),
    );
    let arch = match config.arch {
        GanArch::Dcgan {
            generator_widths: (g0, g1),
            discriminator_widths: (d0, d1),
        } => vec![0.0, g0 as f64, g1 as f64, d0 as f64, d1 as f64],
        GanArch::Mlp { hidden } => vec![1.0, hidden as f64],
    };
    p.push("meta.arch", meta(&arch));
    p.push("meta.freqs_hz", meta(&axes.freqs_hz));
    p.push("meta.times_s", meta(&axes.times_s));
    p
}

/// Inverse of [`gan_to_params`]. Training-only settings of the returned
/// config keep their defaults.
pub fn gan_from_params(params: &ParamSet) -> Result<(TrainedGan, GanConfig, TfrAxes)> {
    let shape = meta_ints(params, "meta.shape")?;
    let arch = meta_ints(params, "meta.arch")?;
    let bad = || malformed("CKPT", "unrecognized GAN metadata");
    let [noise_dim, class_count, c, f, t] = shape[..] else {
        return Err(bad());
    };
    let arch = match arch[..] {
        [0, g0, g1, d0, d1] => GanArch::Dcgan {
            generator_widths: (g0, g1),
            discriminator_widths: (d0, d1),
        },
        [1, hidden] => GanArch::Mlp { hidden },
        _ => return Err(bad()),
    };
    let config = GanConfig {
        noise_dim,
        class_count,
        tfr_shape: [c, f, t],
        arch,
        ..GanConfig::default()
    };
    let axes = TfrAxes {
        freqs_hz: params.get("meta.freqs_hz").ok_or_else(bad)?.data().to_vec(),
        times_s: params.get("meta.times_s").ok_or_else(bad)?.data().to_vec(),
    };
    Ok((TrainedGan::from_checkpoint(&config, params)?, config, axes))
}

pub fn classifier_to_params(clf: &Classifier) -> ParamSet {
    let mut p = clf.params().clone();
    let arch = clf.arch();
    let [c, f, t] = arch.input_shape;
    p.push(
        "meta.input",
        meta(&[c as f64, f as f64, t as f64, arch.class_count as f64]),
    );
    if !arch.conv_blocks.is_empty() {
        let blocks: Vec<f64> = arch
            .conv_blocks
            .iter()
            .flat_map(|b| {
                [
                    b.out_channels,
                    b.kernel.0,
                    b.kernel.1,
                    b.stride.0,
                    b.stride.1,
                    b.pool.0,
                    b.pool.1,
                ]
            })
            .map(|v| v as f64)
            .collect();
        p.push("meta.blocks", meta(&blocks));
    }
    if !arch.dense.is_empty() {
        p.push(
            "meta.dense",
            meta(&arch.dense.iter().map(|&v| v as f64).collect::<Vec<_>>()),
        );
    }
    p
}

pub fn classifier_from_params(params: &ParamSet) -> Result<Classifier> {
    let input = meta_ints(params, "meta.input")?;
    let [c, f, t, class_count] = input[..] else {
        return Err(malformed("CKPT", "meta.input must hold 4 values"));
    };
    let blocks = if params.get("meta.blocks").is_some() {
        meta_ints(params, "meta.blocks")?
    } else {
        Vec::new()
    };
    if blocks.len() % 7 != 0 {
        return Err(malformed("CKPT", "meta.blocks length is not a multiple of 7"));
    }
    let dense = if params.get("meta.dense").is_some() {
        meta_ints(params, "meta.dense")?
    } else {
        Vec::new()
    };
    let arch = CnnArch {
        input_shape: [c, f, t],
        conv_blocks: blocks
            .chunks(7)
            .map(|b| ConvBlock {
                out_channels: b[0],
                kernel: (b[1], b[2]),
                stride: (b[3], b[4]),
                pool: (b[5], b[6]),
            })
            .collect(),
        dense,
        class_count,
    };
    let weights: ParamSet = params
        .iter()
        .filter(|(n, _)| !n.starts_with("meta."))
        .map(|(n, t)| (n.to_string(), t.clone()))
        .collect();
    Ok(Classifier::new(arch, weights)?)
}

// ---- CSV tables ----

/// Shortest round-tripping decimal for `v`.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

pub fn train_log_csv(log: &TrainLog) -> String {
    let mut out = String::from("iteration,d_loss,g_loss,d_accuracy\n");
    for r in &log.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.iteration,
            num(r.d_loss),
            num(r.g_loss),
            num(r.d_accuracy)
        ));
    }
    out
}

pub const METRICS_CSV_HEADER: &str = "condition,seed,accuracy,acc_left,acc_right,n_test";

/// One metrics row without a trailing newline; absent classes leave the
/// per-class field empty.
pub fn metrics_csv_row(condition: &str, seed: u64, m: &Metrics) -> String {
    let class = |i: usize| m.per_class.get(i).copied().flatten().map(num).unwrap_or_default();
    format!(
        "{condition},{seed},{},{},{},{}",
        num(m.accuracy),
        class(0),
        class(1),
        m.n_test
    )
}

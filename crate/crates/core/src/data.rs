//! EEG trials, datasets, windowing, synthetic fixtures and training-set mixing.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Imagined-movement class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    LeftHand,
    RightHand,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::LeftHand, Label::RightHand];
    pub const COUNT: usize = 2;

    pub fn index(self) -> usize {
        match self {
            Label::LeftHand => 0,
            Label::RightHand => 1,
        }
    }

    pub fn from_index(i: usize) -> Result<Label> {
        match i {
            0 => Ok(Label::LeftHand),
            1 => Ok(Label::RightHand),
            _ => Err(Error::LabelOutOfRange {
                label: i,
                classes: Self::COUNT,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Raw,
    Artificial,
    Synthetic,
}

impl Provenance {
    pub fn code(self) -> u8 {
        match self {
            Provenance::Raw => 0,
            Provenance::Artificial => 1,
            Provenance::Synthetic => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Provenance> {
        match code {
            0 => Some(Provenance::Raw),
            1 => Some(Provenance::Artificial),
            2 => Some(Provenance::Synthetic),
            _ => None,
        }
    }
}

/// Anything carrying a class label.
pub trait Labeled {
    fn label(&self) -> Label;
}

/// The electrode montage of the motor-imagery recordings.
pub const MONTAGE: [&str; 3] = ["C3", "Cz", "C4"];

pub fn default_channels() -> Vec<String> {
    MONTAGE.iter().map(|c| c.to_string()).collect()
}

/// One labeled multichannel recording window.
///
/// Samples are stored channel-major in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct EegTrial {
    channels: Vec<String>,
    samples: Vec<f32>,
    n_samples: usize,
    sample_rate_hz: f64,
    label: Label,
    trial_id: u32,
}

impl EegTrial {
    /// Builds a trial from one row per channel.
    pub fn from_rows(
        channels: Vec<String>,
        rows: Vec<Vec<f32>>,
        sample_rate_hz: f64,
        label: Label,
        trial_id: u32,
    ) -> Result<Self> {
        if channels.len() != rows.len() {
            return Err(Error::Shape(format!(
                "trial {trial_id}: {} channel names for {} rows",
                channels.len(),
                rows.len()
            )));
        }
        let n_samples = rows.first().map_or(0, Vec::len);
        for (name, row) in channels.iter().zip(&rows) {
            if row.len() != n_samples {
                return Err(Error::LengthMismatch {
                    trial_id,
                    channel: name.clone(),
                    expected: n_samples,
                    found: row.len(),
                });
            }
        }
        let samples = rows.into_iter().flatten().collect();
        Self::new(channels, samples, n_samples, sample_rate_hz, label, trial_id)
    }

    /// Builds a trial from channel-major samples.
    pub fn new(
        channels: Vec<String>,
        samples: Vec<f32>,
        n_samples: usize,
        sample_rate_hz: f64,
        label: Label,
        trial_id: u32,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidArgument(format!("trial {trial_id} has no channels")));
        }
        if n_samples == 0 {
            return Err(Error::InvalidArgument(format!("trial {trial_id} has no samples")));
        }
        if samples.len() != channels.len() * n_samples {
            let found = samples.len() / channels.len();
            return Err(Error::LengthMismatch {
                trial_id,
                channel: channels[channels.len() - 1].clone(),
                expected: n_samples,
                found,
            });
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "trial {trial_id}: sample rate {sample_rate_hz} must be positive"
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!(
                "trial {trial_id}, channel {}, sample {}",
                channels[pos / n_samples],
                pos % n_samples
            )));
        }
        Ok(EegTrial {
            channels,
            samples,
            n_samples,
            sample_rate_hz,
            label,
            trial_id,
        })
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate_hz
    }

    pub fn trial_id(&self) -> u32 {
        self.trial_id
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        &self.samples[c * self.n_samples..(c + 1) * self.n_samples]
    }

    pub fn with_trial_id(mut self, trial_id: u32) -> Self {
        self.trial_id = trial_id;
        self
    }
}

impl Labeled for EegTrial {
    fn label(&self) -> Label {
        self.label
    }
}

/// Trials that share sample rate, length and montage.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    trials: Vec<EegTrial>,
    pub split: Split,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(trials: Vec<EegTrial>, split: Split, provenance: Provenance) -> Result<Self> {
        if let Some(first) = trials.first() {
            let mut ids = BTreeSet::new();
            for t in &trials {
                if t.sample_rate_hz != first.sample_rate_hz {
                    return Err(Error::InvalidArgument(format!(
                        "trial {} has sample rate {} Hz, dataset uses {} Hz",
                        t.trial_id, t.sample_rate_hz, first.sample_rate_hz
                    )));
                }
                if t.channels != first.channels {
                    return Err(Error::InvalidArgument(format!(
                        "trial {} has channels {:?}, dataset uses {:?}",
                        t.trial_id, t.channels, first.channels
                    )));
                }
                if t.n_samples != first.n_samples {
                    return Err(Error::LengthMismatch {
                        trial_id: t.trial_id,
                        channel: t.channels[0].clone(),
                        expected: first.n_samples,
                        found: t.n_samples,
                    });
                }
                if !ids.insert(t.trial_id) {
                    return Err(Error::InvalidArgument(format!("duplicate trial id {}", t.trial_id)));
                }
            }
        }
        Ok(Dataset {
            trials,
            split,
            provenance,
        })
    }

    pub fn trials(&self) -> &[EegTrial] {
        &self.trials
    }

    pub fn into_trials(self) -> Vec<EegTrial> {
        self.trials
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn class_counts(&self) -> [usize; Label::COUNT] {
        class_counts(&self.trials)
    }

    /// Applies [`extract_window`] to every trial.
    pub fn window(&self, t0_s: f64, t1_s: f64) -> Result<Dataset> {
        let trials = self
            .trials
            .iter()
            .map(|t| extract_window(t, t0_s, t1_s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            trials,
            split: self.split,
            provenance: self.provenance,
        })
    }
}

pub fn class_counts<T: Labeled>(items: &[T]) -> [usize; Label::COUNT] {
    let mut counts = [0; Label::COUNT];
    for it in items {
        counts[it.label().index()] += 1;
    }
    counts
}

/// Samples of `trial` in `[t0_s, t1_s)`.
///
/// The first sample is `round(t0_s · rate)` and the length is
/// `round((t1_s − t0_s) · rate)`.
pub fn extract_window(trial: &EegTrial, t0_s: f64, t1_s: f64) -> Result<EegTrial> {
    let duration = trial.duration_s();
    let out_of_bounds = Error::WindowOutOfBounds {
        t0_s,
        t1_s,
        duration_s: duration,
    };
    // Tolerate float noise of a fraction of a sample at the right edge.
    let slack = 0.5 / trial.sample_rate_hz;
    if !(t0_s >= 0.0 && t0_s < t1_s && t1_s <= duration + slack) {
        return Err(out_of_bounds);
    }
    let start = libm::round(t0_s * trial.sample_rate_hz) as usize;
    let len = libm::round((t1_s - t0_s) * trial.sample_rate_hz) as usize;
    if len == 0 || start + len > trial.n_samples {
        return Err(out_of_bounds);
    }
    let mut samples = Vec::with_capacity(trial.n_channels() * len);
    for c in 0..trial.n_channels() {
        samples.extend_from_slice(&trial.channel(c)[start..start + len]);
    }
    Ok(EegTrial {
        channels: trial.channels.clone(),
        samples,
        n_samples: len,
        sample_rate_hz: trial.sample_rate_hz,
        label: trial.label,
        trial_id: trial.trial_id,
    })
}

/// One sinusoidal component switched on during `[on_s.0, on_s.1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    pub frequency_hz: f64,
    pub amplitude: f64,
    pub on_s: (f64, f64),
}

/// Recipe for a deterministic synthetic two-class dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub trials_per_class: usize,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub channels: Vec<String>,
    /// `class_signatures[class][channel]` lists the bursts of that channel.
    pub class_signatures: [Vec<Vec<Burst>>; Label::COUNT],
    pub noise_sigma: f64,
    /// Band every burst must fall in.
    pub band_hz: (f64, f64),
    /// Relative standard deviation of per-trial burst amplitude.
    pub amplitude_jitter: f64,
}

impl SyntheticSpec {
    /// Lateralized alpha desynchronization over C3/C4: imagined left-hand
    /// movement attenuates the 10 Hz rhythm at C4, right-hand at C3, with a
    /// shared 12 Hz rhythm at Cz.
    pub fn motor_imagery(trials_per_class: usize, noise_sigma: f64) -> Self {
        let on = (4.5, 8.5);
        let b = |f, a| Burst {
            frequency_hz: f,
            amplitude: a,
            on_s: on,
        };
        let (strong, weak) = (2.0, 1.0);
        SyntheticSpec {
            trials_per_class,
            sample_rate_hz: 128.0,
            duration_s: 9.0,
            channels: default_channels(),
            class_signatures: [
                vec![vec![b(10.0, strong)], vec![b(12.0, 1.0)], vec![b(10.0, weak)]],
                vec![vec![b(10.0, weak)], vec![b(12.0, 1.0)], vec![b(10.0, strong)]],
            ],
            noise_sigma,
            band_hz: (7.0, 15.0),
            amplitude_jitter: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.sample_rate_hz > 0.0 && self.duration_s > 0.0) {
            return bad(format!(
                "sample rate {} and duration {} must be positive",
                self.sample_rate_hz, self.duration_s
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.amplitude_jitter >= 0.0) {
            return bad("noise_sigma and amplitude_jitter must be non-negative".into());
        }
        if self.channels.is_empty() {
            return bad("no channels".into());
        }
        for (class, sig) in self.class_signatures.iter().enumerate() {
            if sig.len() != self.channels.len() {
                return bad(format!(
                    "class {class} signature has {} channels, spec has {}",
                    sig.len(),
                    self.channels.len()
                ));
            }
            for burst in sig.iter().flatten() {
                if burst.frequency_hz < self.band_hz.0 || burst.frequency_hz > self.band_hz.1 {
                    return bad(format!(
                        "burst at {} Hz lies outside the {:?} Hz band",
                        burst.frequency_hz, self.band_hz
                    ));
                }
                if !(burst.on_s.0 < burst.on_s.1) {
                    return bad(format!("burst interval {:?} is empty", burst.on_s));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic dataset of `trials_per_class` trials per class, alternating
/// left/right. Each burst gets a uniformly random phase per trial; white
/// Gaussian noise of `noise_sigma` is added to every sample.
pub fn synthesize_dataset(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let n = libm::round(spec.duration_s * spec.sample_rate_hz) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
    let jitter = Normal::new(1.0, spec.amplitude_jitter).expect("jitter validated");
    let mut trials = Vec::with_capacity(2 * spec.trials_per_class);
    for i in 0..2 * spec.trials_per_class {
        let label = Label::ALL[i % 2];
        let mut samples = Vec::with_capacity(spec.channels.len() * n);
        for bursts in &spec.class_signatures[label.index()] {
            let mut row = vec![0.0f64; n];
            for burst in bursts {
                let phase = rng.random_range(0.0..core::f64::consts::TAU);
                let amp = burst.amplitude * jitter.sample(&mut rng);
                let start = libm::round(burst.on_s.0 * spec.sample_rate_hz).max(0.0) as usize;
                let stop = (libm::round(burst.on_s.1 * spec.sample_rate_hz) as usize).min(n);
                for (k, v) in row.iter_mut().enumerate().take(stop).skip(start) {
                    let t = k as f64 / spec.sample_rate_hz;
                    *v += amp * libm::cos(core::f64::consts::TAU * burst.frequency_hz * t + phase);
                }
            }
            if spec.noise_sigma > 0.0 {
                row.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
            }
            samples.extend(row.into_iter().map(|v| v as f32));
        }
        trials.push(EegTrial::new(
            spec.channels.clone(),
            samples,
            n,
            spec.sample_rate_hz,
            label,
            i as u32,
        )?);
    }
    Dataset::new(trials, Split::Train, Provenance::Synthetic)
}

fn draw_per_class<T: Labeled + Clone>(
    pool: &[T],
    per_class: usize,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<T>,
) -> Result<()> {
    for label in Label::ALL {
        let members: Vec<&T> = pool.iter().filter(|s| s.label() == label).collect();
        if members.len() < per_class {
            return Err(Error::InsufficientSamples {
                label,
                requested: per_class,
                available: members.len(),
            });
        }
        for i in index::sample(rng, members.len(), per_class) {
            out.push(members[i].clone());
        }
    }
    Ok(())
}

/// Per class, `raw_per_class` samples of `raw` and `artificial_per_class` of
/// `artificial`, each drawn without replacement, then shuffled. Everything is
/// determined by `seed`.
pub fn mix_counts<T: Labeled + Clone>(
    raw: &[T],
    artificial: &[T],
    raw_per_class: usize,
    artificial_per_class: usize,
    seed: u64,
) -> Result<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(Label::COUNT * (raw_per_class + artificial_per_class));
    draw_per_class(raw, raw_per_class, &mut rng, &mut out)?;
    draw_per_class(artificial, artificial_per_class, &mut rng, &mut out)?;
    out.shuffle(&mut rng);
    Ok(out)
}

/// Per-class counts `(round(raw_fraction·reference), round(artificial_multiple·reference))`.
pub fn mix_plan(raw_fraction: f64, artificial_multiple: f64, reference_per_class: usize) -> Result<(usize, usize)> {
    if !(0.0..=1.0).contains(&raw_fraction) {
        return Err(Error::InvalidArgument(format!(
            "raw_fraction {raw_fraction} not in [0, 1]"
        )));
    }
    if !(artificial_multiple >= 0.0 && artificial_multiple.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "artificial_multiple {artificial_multiple} must be non-negative"
        )));
    }
    if reference_per_class == 0 {
        return Err(Error::InvalidArgument("reference_per_class must be positive".into()));
    }
    let r = reference_per_class as f64;
    Ok((
        libm::round(raw_fraction * r) as usize,
        libm::round(artificial_multiple * r) as usize,
    ))
}

/// Builds a training set relative to a per-class reference size.
pub fn mix_training_set<T: Labeled + Clone>(
    raw: &[T],
    artificial: &[T],
    raw_fraction: f64,
    artificial_multiple: f64,
    reference_per_class: usize,
    seed: u64,
) -> Result<Vec<T>> {
    let (n_raw, n_art) = mix_plan(raw_fraction, artificial_multiple, reference_per_class)?;
    mix_counts(raw, artificial, n_raw, n_art, seed)
}

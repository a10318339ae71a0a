//! Complex Morlet continuous wavelet transform, magnitude TFRs and a
//! gain-calibrated single-sum inverse.
//!
//! The mother wavelet is
//! `ψ(t) = (π·fb)^(−1/2) · exp(i·2π·fc·t) · exp(−t²/fb)`
//! and the daughter for frequency `f` has scale `a = fc / f` seconds:
//! `ψ_a(t) = a^(−1/2) · ψ(t / a)`. Coefficients are the sampled inner products
//! `C(f, b) = Σ_k s[k] · conj(ψ_a(t_k − b)) · Δt`, with the daughter truncated
//! at four standard deviations of its Gaussian envelope and the signal
//! zero-padded outside the recording.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::data::{EegTrial, Label, Labeled, Provenance};
use crate::error::{Error, Result};

/// Envelope truncation, in standard deviations.
const SUPPORT_SIGMAS: f64 = 4.0;

/// Complex Morlet parameters (`cmor{fb}-{fc}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorletParams {
    pub bandwidth: f64,
    pub center_frequency: f64,
}

impl Default for MorletParams {
    /// CMOR3-3.
    fn default() -> Self {
        MorletParams {
            bandwidth: 3.0,
            center_frequency: 3.0,
        }
    }
}

impl MorletParams {
    pub fn new(bandwidth: f64, center_frequency: f64) -> Result<Self> {
        let p = MorletParams {
            bandwidth,
            center_frequency,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.center_frequency > 0.0)
            || !self.bandwidth.is_finite()
            || !self.center_frequency.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "Morlet bandwidth {} and center frequency {} must be positive",
                self.bandwidth, self.center_frequency
            )));
        }
        Ok(())
    }

    /// Scale in seconds for a frequency in Hz.
    pub fn scale_s(&self, freq_hz: f64) -> f64 {
        self.center_frequency / freq_hz
    }

    /// One-sided truncated support of the daughter wavelet, in seconds.
    pub fn half_support_s(&self, freq_hz: f64) -> f64 {
        SUPPORT_SIGMAS * self.scale_s(freq_hz) * libm::sqrt(self.bandwidth / 2.0)
    }

    /// Mother wavelet value.
    pub fn mother(&self, t: f64) -> Complex64 {
        let norm = 1.0 / libm::sqrt(PI * self.bandwidth);
        let env = libm::exp(-t * t / self.bandwidth);
        Complex64::from_polar(norm * env, TAU * self.center_frequency * t)
    }

    /// Sampled conjugate daughter wavelet times `Δt`, indexed by `j + half`.
    fn kernel(&self, freq_hz: f64, sample_rate_hz: f64) -> Vec<Complex64> {
        let a = self.scale_s(freq_hz);
        let half = libm::ceil(self.half_support_s(freq_hz) * sample_rate_hz) as isize;
        let dt = 1.0 / sample_rate_hz;
        let gain = dt / libm::sqrt(a);
        (-half..=half)
            .map(|j| (self.mother(j as f64 * dt / a) * gain).conj())
            .collect()
    }
}

/// Linearly spaced grid `lo, lo + step, …, hi` (inclusive up to rounding).
pub fn linear_grid(lo_hz: f64, hi_hz: f64, step_hz: f64) -> Vec<f64> {
    let n = libm::floor((hi_hz - lo_hz) / step_hz + 1e-9) as usize + 1;
    (0..n).map(|i| lo_hz + i as f64 * step_hz).collect()
}

/// Logarithmically spaced grid with `voices_per_octave` points per doubling,
/// from `lo` up to (and including, when it lands on the grid) `hi`.
pub fn log_grid(lo_hz: f64, hi_hz: f64, voices_per_octave: usize) -> Vec<f64> {
    let octaves = libm::log2(hi_hz / lo_hz);
    let n = libm::floor(octaves * voices_per_octave as f64 + 1e-9) as usize + 1;
    (0..n)
        .map(|j| lo_hz * libm::exp2(j as f64 / voices_per_octave as f64))
        .collect()
}

fn check_freqs(freqs_hz: &[f64], sample_rate_hz: f64) -> Result<()> {
    if freqs_hz.is_empty() {
        return Err(Error::InvalidArgument("empty frequency list".into()));
    }
    let nyquist = sample_rate_hz / 2.0;
    for &f in freqs_hz {
        if !(f > 0.0) {
            return Err(Error::InvalidArgument(format!("frequency {f} Hz must be positive")));
        }
        if f >= nyquist {
            return Err(Error::InvalidArgument(format!(
                "frequency {f} Hz is at or above the Nyquist frequency {nyquist} Hz"
            )));
        }
    }
    if freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("frequencies must be strictly increasing".into()));
    }
    Ok(())
}

/// Complex CWT coefficients of one trial, `channels × freqs × times`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    pub channels: Vec<String>,
    coeffs: Vec<Complex64>,
    pub sample_rate_hz: f64,
    pub label: Label,
    pub trial_id: u32,
}

impl Scalogram {
    pub fn new(
        freqs_hz: Vec<f64>,
        times_s: Vec<f64>,
        channels: Vec<String>,
        coeffs: Vec<Complex64>,
        sample_rate_hz: f64,
        label: Label,
        trial_id: u32,
    ) -> Result<Self> {
        let expected = channels.len() * freqs_hz.len() * times_s.len();
        if coeffs.len() != expected {
            return Err(Error::Shape(format!(
                "scalogram axes {}x{}x{} need {expected} coefficients, got {}",
                channels.len(),
                freqs_hz.len(),
                times_s.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFiniteValue("scalogram coefficients".into()));
        }
        Ok(Scalogram {
            freqs_hz,
            times_s,
            channels,
            coeffs,
            sample_rate_hz,
            label,
            trial_id,
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients of one channel and frequency row over time.
    pub fn row(&self, channel: usize, freq: usize) -> &[Complex64] {
        let t = self.times_s.len();
        let start = (channel * self.freqs_hz.len() + freq) * t;
        &self.coeffs[start..start + t]
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }
}

impl Labeled for Scalogram {
    fn label(&self) -> Label {
        self.label
    }
}

/// Zero-padded correlation of `signal` with a centered kernel.
fn correlate(signal: &[f64], kernel: &[Complex64], out: &mut [Complex64]) {
    let n = signal.len() as isize;
    let half = (kernel.len() / 2) as isize;
    for (b, o) in out.iter_mut().enumerate() {
        let b = b as isize;
        let lo = (b - half).max(0);
        let hi = (b + half).min(n - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in lo..=hi {
            acc += kernel[(k - b + half) as usize] * signal[k as usize];
        }
        *o = acc;
    }
}

fn cwt_rows(signals: &[Vec<f64>], freqs_hz: &[f64], sample_rate_hz: f64, params: &MorletParams) -> Vec<Complex64> {
    let n = signals.first().map_or(0, Vec::len);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); signals.len() * freqs_hz.len() * n];
    let kernels: Vec<_> = freqs_hz.iter().map(|&f| params.kernel(f, sample_rate_hz)).collect();
    for (c, sig) in signals.iter().enumerate() {
        for (fi, k) in kernels.iter().enumerate() {
            let start = (c * freqs_hz.len() + fi) * n;
            correlate(sig, k, &mut coeffs[start..start + n]);
        }
    }
    coeffs
}

/// Continuous wavelet transform of every channel of `trial`, evaluated at
/// every sample instant.
pub fn cwt(trial: &EegTrial, freqs_hz: &[f64], params: &MorletParams) -> Result<Scalogram> {
    params.validate()?;
    check_freqs(freqs_hz, trial.sample_rate_hz())?;
    let signals: Vec<Vec<f64>> = (0..trial.n_channels())
        .map(|c| trial.channel(c).iter().map(|&v| v as f64).collect())
        .collect();
    let coeffs = cwt_rows(&signals, freqs_hz, trial.sample_rate_hz(), params);
    let rate = trial.sample_rate_hz();
    Scalogram::new(
        freqs_hz.to_vec(),
        (0..trial.n_samples()).map(|k| k as f64 / rate).collect(),
        trial.channels().to_vec(),
        coeffs,
        rate,
        trial.label(),
        trial.trial_id(),
    )
}

/// How a TFR's values relate to wavelet magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Raw magnitudes.
    None,
    /// `v' = 2·(v − min)/span − 1`; constant inputs (`span = 0`) map to 0.
    UnitRange { min: f64, span: f64 },
}

/// Frequency and time axes shared by a set of TFRs.
#[derive(Debug, Clone, PartialEq)]
pub struct TfrAxes {
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
}

/// Real-valued time–frequency representation, `channels × freqs × times`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tfr {
    pub axes: TfrAxes,
    n_channels: usize,
    values: Vec<f64>,
    pub label: Label,
    pub trial_id: u32,
    pub normalization: Normalization,
    pub provenance: Provenance,
}

impl Tfr {
    pub fn new(
        axes: TfrAxes,
        n_channels: usize,
        values: Vec<f64>,
        label: Label,
        trial_id: u32,
        normalization: Normalization,
        provenance: Provenance,
    ) -> Result<Self> {
        let expected = n_channels * axes.freqs_hz.len() * axes.times_s.len();
        if values.len() != expected || expected == 0 {
            return Err(Error::Shape(format!(
                "TFR of {n_channels}x{}x{} needs {expected} values, got {}",
                axes.freqs_hz.len(),
                axes.times_s.len(),
                values.len()
            )));
        }
        let in_range = match normalization {
            Normalization::None => values.iter().all(|&v| v >= 0.0 && v.is_finite()),
            Normalization::UnitRange { .. } => values.iter().all(|&v| (-1.0..=1.0).contains(&v)),
        };
        if !in_range {
            return Err(Error::InvalidArgument(format!(
                "TFR {trial_id} values out of range for {normalization:?}"
            )));
        }
        Ok(Tfr {
            axes,
            n_channels,
            values,
            label,
            trial_id,
            normalization,
            provenance,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_freqs(&self) -> usize {
        self.axes.freqs_hz.len()
    }

    pub fn n_times(&self) -> usize {
        self.axes.times_s.len()
    }

    /// `[channels, freqs, times]`.
    pub fn shape(&self) -> [usize; 3] {
        [self.n_channels, self.n_freqs(), self.n_times()]
    }

    pub fn get(&self, channel: usize, freq: usize, time: usize) -> f64 {
        self.values[(channel * self.n_freqs() + freq) * self.n_times() + time]
    }

    pub fn with_trial_id(mut self, trial_id: u32) -> Self {
        self.trial_id = trial_id;
        self
    }

    /// Per-sample affine map onto `[−1, 1]`.
    pub fn normalized(&self) -> Tfr {
        let values = self.denormalized_values();
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let span = max - min;
        let mapped = values
            .iter()
            .map(|&v| {
                if span > 0.0 {
                    (2.0 * (v - min) / span - 1.0).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        Tfr {
            values: mapped,
            normalization: Normalization::UnitRange { min, span },
            ..self.clone()
        }
    }

    fn denormalized_values(&self) -> Vec<f64> {
        match self.normalization {
            Normalization::None => self.values.clone(),
            Normalization::UnitRange { min, span } => self
                .values
                .iter()
                .map(|&v| (min + (v + 1.0) * span / 2.0).max(0.0))
                .collect(),
        }
    }

    /// Magnitudes on the original scale.
    pub fn denormalized(&self) -> Tfr {
        Tfr {
            values: self.denormalized_values(),
            normalization: Normalization::None,
            ..self.clone()
        }
    }
}

impl Labeled for Tfr {
    fn label(&self) -> Label {
        self.label
    }
}

/// Bin boundaries splitting `n` columns into `bins` contiguous runs.
fn bin_edges(n: usize, bins: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..bins).map(move |i| (i * n / bins, (i + 1) * n / bins))
}

/// `|C|` averaged over contiguous time bins to exactly
/// `downsample_time_to` columns, optionally mapped onto `[−1, 1]`.
pub fn tfr_magnitude(scalogram: &Scalogram, downsample_time_to: usize, normalize: bool) -> Result<Tfr> {
    let n = scalogram.times_s.len();
    if downsample_time_to == 0 || downsample_time_to > n {
        return Err(Error::InvalidArgument(format!(
            "cannot downsample {n} time columns to {downsample_time_to}"
        )));
    }
    let mut values = Vec::with_capacity(scalogram.n_channels() * scalogram.freqs_hz.len() * downsample_time_to);
    for c in 0..scalogram.n_channels() {
        for f in 0..scalogram.freqs_hz.len() {
            let row = scalogram.row(c, f);
            for (lo, hi) in bin_edges(n, downsample_time_to) {
                let sum: f64 = row[lo..hi].iter().map(|z| z.norm()).sum();
                values.push(sum / (hi - lo) as f64);
            }
        }
    }
    let times_s = bin_edges(n, downsample_time_to)
        .map(|(lo, hi)| scalogram.times_s[lo..hi].iter().sum::<f64>() / (hi - lo) as f64)
        .collect();
    let tfr = Tfr::new(
        TfrAxes {
            freqs_hz: scalogram.freqs_hz.clone(),
            times_s,
        },
        scalogram.n_channels(),
        values,
        scalogram.label,
        scalogram.trial_id,
        Normalization::None,
        Provenance::Raw,
    )?;
    Ok(if normalize { tfr.normalized() } else { tfr })
}

/// Reconstruction gain tied to the grid it was calibrated on.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseGain {
    pub gain: f64,
    pub freqs_hz: Vec<f64>,
    pub sample_rate_hz: f64,
    pub params: MorletParams,
}

fn single_sum(rows: &[Complex64], freqs_hz: &[f64], n: usize, params: &MorletParams, gain: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (fi, &f) in freqs_hz.iter().enumerate() {
        let w = gain / libm::sqrt(params.scale_s(f));
        for (o, c) in out.iter_mut().zip(&rows[fi * n..(fi + 1) * n]) {
            *o += w * c.re;
        }
    }
}

/// Probe used by [`calibrate_inverse`]: unit cosines at every grid frequency
/// with golden-angle phase offsets, long enough to leave an interior clear of
/// edge effects. Returns `(probe, interior_start, interior_end)`.
pub fn calibration_probe(freqs_hz: &[f64], sample_rate_hz: f64, params: &MorletParams) -> (Vec<f64>, usize, usize) {
    let margin_s = freqs_hz.iter().map(|&f| params.half_support_s(f)).fold(0.0, f64::max);
    let margin = libm::ceil(margin_s * sample_rate_hz) as usize;
    let n = 2 * margin + libm::ceil(20.0 * sample_rate_hz) as usize;
    let golden = PI * (3.0 - libm::sqrt(5.0));
    let probe = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate_hz;
            freqs_hz
                .iter()
                .enumerate()
                .map(|(i, &f)| libm::cos(TAU * f * t + golden * i as f64))
                .sum()
        })
        .collect();
    (probe, margin, n - margin)
}

/// Least-squares gain `g` for `ŝ = g · Σ_f Re(C_f) / √a_f` on a band probe.
pub fn calibrate_inverse(params: &MorletParams, freqs_hz: &[f64], sample_rate_hz: f64) -> Result<InverseGain> {
    params.validate()?;
    if freqs_hz.len() < 2 {
        return Err(Error::InvalidArgument(
            "calibration needs at least two frequencies".into(),
        ));
    }
    check_freqs(freqs_hz, sample_rate_hz)?;
    let (probe, lo, hi) = calibration_probe(freqs_hz, sample_rate_hz, params);
    let n = probe.len();
    let coeffs = cwt_rows(core::slice::from_ref(&probe), freqs_hz, sample_rate_hz, params);
    let mut recon = vec![0.0; n];
    single_sum(&coeffs, freqs_hz, n, params, 1.0, &mut recon);
    let (rp, rr) = recon[lo..hi]
        .iter()
        .zip(&probe[lo..hi])
        .fold((0.0, 0.0), |(rp, rr), (&r, &p)| (rp + r * p, rr + r * r));
    let pp: f64 = probe[lo..hi].iter().map(|p| p * p).sum();
    if !(pp > 0.0 && rr > 0.0) {
        return Err(Error::InvalidArgument("calibration probe has zero energy".into()));
    }
    Ok(InverseGain {
        gain: rp / rr,
        freqs_hz: freqs_hz.to_vec(),
        sample_rate_hz,
        params: *params,
    })
}

/// Single-sum inverse: `ŝ(t) = gain · Σ_f Re(C[f][t]) / √a_f` per channel.
pub fn icwt(scalogram: &Scalogram, gain: &InverseGain) -> Result<EegTrial> {
    if scalogram.freqs_hz != gain.freqs_hz || scalogram.sample_rate_hz != gain.sample_rate_hz {
        return Err(Error::Shape(format!(
            "scalogram axes ({} freqs at {} Hz) differ from the calibration ({} freqs at {} Hz)",
            scalogram.freqs_hz.len(),
            scalogram.sample_rate_hz,
            gain.freqs_hz.len(),
            gain.sample_rate_hz
        )));
    }
    let n = scalogram.times_s.len();
    let nf = scalogram.freqs_hz.len();
    let mut samples = Vec::with_capacity(scalogram.n_channels() * n);
    let mut row = vec![0.0; n];
    for c in 0..scalogram.n_channels() {
        let block = &scalogram.coeffs[c * nf * n..(c + 1) * nf * n];
        single_sum(block, &scalogram.freqs_hz, n, &gain.params, gain.gain, &mut row);
        samples.extend(row.iter().map(|&v| v as f32));
    }
    EegTrial::new(
        scalogram.channels.clone(),
        samples,
        n,
        scalogram.sample_rate_hz,
        scalogram.label,
        scalogram.trial_id,
    )
}

/// Illustrative waveform for a TFR whose phase is unknown (e.g. a generated
/// one): magnitudes are de-normalized, held constant across each time bin and
/// given zero phase, then passed through [`icwt`].
pub fn waveform_from_tfr(tfr: &Tfr, gain: &InverseGain, n_samples: usize, channels: Vec<String>) -> Result<EegTrial> {
    if channels.len() != tfr.n_channels() {
        return Err(Error::Shape(format!(
            "{} channel names for a {}-channel TFR",
            channels.len(),
            tfr.n_channels()
        )));
    }
    if n_samples < tfr.n_times() {
        return Err(Error::InvalidArgument(format!(
            "{n_samples} samples cannot cover {} time bins",
            tfr.n_times()
        )));
    }
    let mags = tfr.denormalized();
    let [nc, nf, nt] = tfr.shape();
    let mut coeffs = Vec::with_capacity(nc * nf * n_samples);
    for c in 0..nc {
        for f in 0..nf {
            for (bin, (lo, hi)) in bin_edges(n_samples, nt).enumerate() {
                let v = mags.get(c, f, bin);
                coeffs.extend(core::iter::repeat_n(Complex64::new(v, 0.0), hi - lo));
            }
        }
    }
    let sc = Scalogram::new(
        tfr.axes.freqs_hz.clone(),
        (0..n_samples).map(|k| k as f64 / gain.sample_rate_hz).collect(),
        channels,
        coeffs,
        gain.sample_rate_hz,
        tfr.label,
        tfr.trial_id,
    )?;
    icwt(&sc, gain)
}

//! Trial → normalized TFR pipeline.

use alloc::vec::Vec;

use crate::data::{extract_window, EegTrial};
use crate::error::Result;
use crate::wavelet::{cwt, linear_grid, tfr_magnitude, MorletParams, Tfr};

/// Windowing, band selection and TFR settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TfrConfig {
    /// Analysis window in seconds, half-open.
    pub window_s: (f64, f64),
    /// Inclusive band in Hz, sampled every `band_step_hz`.
    pub band_hz: (f64, f64),
    pub band_step_hz: f64,
    pub time_columns: usize,
    pub morlet: MorletParams,
    pub normalize: bool,
}

impl Default for TfrConfig {
    fn default() -> Self {
        TfrConfig {
            window_s: (4.0, 9.0),
            band_hz: (7.0, 15.0),
            band_step_hz: 1.0,
            time_columns: 64,
            morlet: MorletParams::default(),
            normalize: true,
        }
    }
}

impl TfrConfig {
    pub fn freqs_hz(&self) -> Vec<f64> {
        linear_grid(self.band_hz.0, self.band_hz.1, self.band_step_hz)
    }

    /// Window, CWT over the band, then binned magnitude.
    pub fn apply(&self, trial: &EegTrial) -> Result<Tfr> {
        let windowed = extract_window(trial, self.window_s.0, self.window_s.1)?;
        let sc = cwt(&windowed, &self.freqs_hz(), &self.morlet)?;
        tfr_magnitude(&sc, self.time_columns, self.normalize)
    }

    pub fn apply_all(&self, trials: &[EegTrial]) -> Result<Vec<Tfr>> {
        trials.iter().map(|t| self.apply(t)).collect()
    }
}

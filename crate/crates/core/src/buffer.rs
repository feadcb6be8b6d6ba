//! Multi-channel time-domain sample storage.

use crate::error::{Error, Result};

/// N aligned channels of time-domain samples plus their sample rate.
///
/// All channels have identical length; amplitudes are dimensionless with a
/// nominal range of [-1, 1] after output normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate_hz: f64,
}

impl MultichannelBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate_hz: f64) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::argument("buffer needs at least one channel"));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::argument("all channels must have identical length"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::argument(format!(
                "sample rate {sample_rate_hz} must be positive"
            )));
        }
        Ok(MultichannelBuffer {
            channels,
            sample_rate_hz,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channels_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Largest absolute sample across all channels.
    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Scale every channel by the same factor (preserves inter-channel
    /// relationships).
    pub fn scale(&mut self, gain: f64) {
        for ch in &mut self.channels {
            for v in ch.iter_mut() {
                *v *= gain;
            }
        }
    }
}

//! Analysis/synthesis window configuration.

use crate::error::{Error, Result};

/// Window shapes understood by the STFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Hann,
}

/// Window length/hop configuration for the STFT.
///
/// The hop must divide the length; the 75%-overlap configuration used by the
/// pipeline is `length = K`, `hop = K/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    length: usize,
    hop: usize,
    kind: WindowKind,
}

impl WindowSpec {
    pub fn new(length: usize, hop: usize, kind: WindowKind) -> Result<Self> {
        if length < 2 {
            return Err(Error::config(format!("window length {length} must be >= 2")));
        }
        if hop == 0 {
            return Err(Error::config("window hop must be positive"));
        }
        if length % hop != 0 {
            return Err(Error::config(format!(
                "window hop {hop} must divide window length {length}"
            )));
        }
        Ok(WindowSpec { length, hop, kind })
    }

    /// `length = K`, `hop = K/4` Hann configuration.
    pub fn hann_75(length: usize) -> Result<Self> {
        if length % 4 != 0 {
            return Err(Error::config(format!(
                "window length {length} must be divisible by 4 for 75% overlap"
            )));
        }
        WindowSpec::new(length, length / 4, WindowKind::Hann)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    /// Whether weighted overlap-add synthesis can invert analysis with this
    /// spec (needs at least 2x overlap so the squared-window sum stays
    /// positive over the retained region).
    pub fn is_cola(&self) -> bool {
        self.length / self.hop >= 2
    }
}

/// Sample the window function.
///
/// Hann is the periodic (DFT-even) variant `w[n] = 0.5 (1 - cos(2 pi n / L))`,
/// so `w[0] = 0` and values lie in `[0, 1]`.
pub fn make_window(spec: &WindowSpec) -> Vec<f64> {
    let len = spec.length;
    match spec.kind {
        WindowKind::Hann => (0..len)
            .map(|n| 0.5 * (1.0 - (std::f64::consts::TAU * n as f64 / len as f64).cos()))
            .collect(),
    }
}

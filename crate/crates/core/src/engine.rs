//! Multi-channel orchestration: N coupled single-channel generators plus
//! per-bin instantaneous mixing in the STFT domain.

use num_complex::Complex64;

use crate::buffer::MultichannelBuffer;
use crate::channel::{generate_single_channel, ChannelStreams};
use crate::corcos::{build_matrix_set, CoherenceMatrixSet, CorcosParams};
use crate::error::{Error, Result};
use crate::excitation::ExcitationCodebook;
use crate::filter::ar_is_stable;
use crate::gain::{simulate_long_term_gain, GainModel};
use crate::rng::RngStream;
use crate::stft::{istft, stft};
use crate::window::WindowSpec;

/// Peak level the generated output is normalized to.
pub const TARGET_PEAK: f64 = 0.9;

/// Stream id of the shared long-term Markov chain.
pub const LONG_TERM_STREAM: u64 = 0;

/// Fixed stream-id schedule: stream 0 drives the shared long-term chain;
/// channel `c` draws its excitation noise, codebook choices and short-term
/// gains from streams `1 + 3c`, `2 + 3c`, `3 + 3c`.
pub fn channel_streams(master_seed: u64, channel: usize) -> ChannelStreams {
    let c = channel as u64;
    ChannelStreams {
        long_term: RngStream::new(master_seed, LONG_TERM_STREAM),
        excitation_noise: RngStream::new(master_seed, 1 + 3 * c),
        codebook_choice: RngStream::new(master_seed, 2 + 3 * c),
        short_term: RngStream::new(master_seed, 3 + 3 * c),
    }
}

/// Everything one simulation run needs.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub corcos: CorcosParams,
    pub gain: GainModel,
    pub codebook: ExcitationCodebook,
    pub ar_coeffs: Vec<f64>,
    pub window: WindowSpec,
    pub duration_s: f64,
    pub master_seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.corcos.validate()?;
        self.gain.validate()?;
        if !ar_is_stable(&self.ar_coeffs) {
            return Err(Error::config("ar coefficients are unstable"));
        }
        if self.window.length() > self.corcos.fft_length {
            return Err(Error::config(format!(
                "window length {} exceeds fft length {}",
                self.window.length(),
                self.corcos.fft_length
            )));
        }
        if !self.window.is_cola() {
            return Err(Error::config(
                "window/hop configuration cannot be inverted by overlap-add",
            ));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::config("duration must be positive"));
        }
        let num_samples = (self.duration_s * self.corcos.sample_rate_hz).round() as usize;
        if num_samples < 2 * self.corcos.fft_length {
            return Err(Error::config(format!(
                "duration {}s gives {num_samples} samples; need at least {} (a few STFT frames)",
                self.duration_s,
                2 * self.corcos.fft_length
            )));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.corcos.sample_rate_hz).round() as usize
    }
}

/// A generated buffer plus the normalization that was applied to it.
#[derive(Debug, Clone)]
pub struct GenerationResult {
    pub buffer: MultichannelBuffer,
    /// Scalar every channel was multiplied by to hit [`TARGET_PEAK`].
    pub normalization_gain: f64,
}

/// Generate the N mutually uncorrelated channels (pre-mixing stage).
///
/// The long-term (gain, state) track is simulated once from stream 0 and
/// shared by all channels; excitation and short-term gains come from the
/// per-channel streams, so the channels share their amplitude envelope but
/// stay sample-uncorrelated.
pub fn generate_uncorrelated_channels(config: &SimulationConfig) -> Result<MultichannelBuffer> {
    config.validate()?;
    let n = config.corcos.num_channels;
    let frame_len = config.gain.frame_len_samples();
    let num_frames = config.num_samples().div_ceil(frame_len);
    let long_term = simulate_long_term_gain(
        &config.gain.markov,
        num_frames,
        &RngStream::new(config.master_seed, LONG_TERM_STREAM),
    )?;

    let mut channels = Vec::with_capacity(n);
    for c in 0..n {
        let streams = channel_streams(config.master_seed, c);
        channels.push(generate_single_channel(
            &config.gain,
            &config.codebook,
            &config.ar_coeffs,
            config.duration_s,
            config.corcos.sample_rate_hz,
            &streams,
            Some(&long_term),
        )?);
    }
    MultichannelBuffer::new(channels, config.corcos.sample_rate_hz)
}

/// Impose the coherence constraint: per frame and bin, multiply the channel
/// coefficient vector by `C^H(k)` and resynthesize.
pub fn apply_spatial_mixing(
    buffer: &MultichannelBuffer,
    matrix_set: &CoherenceMatrixSet,
    window: &WindowSpec,
) -> Result<MultichannelBuffer> {
    let n = buffer.num_channels();
    if n != matrix_set.num_channels() {
        return Err(Error::argument(format!(
            "buffer has {n} channels but the matrix set is {}x{}",
            matrix_set.num_channels(),
            matrix_set.num_channels()
        )));
    }
    if buffer.sample_rate_hz() != matrix_set.sample_rate_hz() {
        return Err(Error::argument(
            "buffer and matrix set sample rates differ",
        ));
    }

    let mut frames = stft(buffer, window, matrix_set.fft_length())?;
    debug_assert_eq!(frames.num_bins(), matrix_set.num_bins());

    let mut input = vec![Complex64::ZERO; n];
    let mut mixed = vec![Complex64::ZERO; n];
    for l in 0..frames.num_frames() {
        for k in 0..frames.num_bins() {
            for c in 0..n {
                input[c] = frames.coeff(c, l, k);
            }
            matrix_set.factor(k).adjoint_mul_vec(&input, &mut mixed);
            for c in 0..n {
                *frames.coeff_mut(c, l, k) = mixed[c];
            }
        }
    }

    istft(&frames)
}

/// Full pipeline: uncorrelated channels, per-bin Cholesky factors of the
/// Corcos matrices, spatial mixing, global peak normalization.
///
/// Deterministic per `master_seed`; the same configuration always produces
/// bit-identical buffers.
pub fn generate(config: &SimulationConfig) -> Result<GenerationResult> {
    config.validate()?;
    let uncorrelated = generate_uncorrelated_channels(config)?;
    let matrix_set = build_matrix_set(&config.corcos)?;
    let mut buffer = apply_spatial_mixing(&uncorrelated, &matrix_set, &config.window)?;

    let peak = buffer.peak();
    let normalization_gain = if peak > 0.0 { TARGET_PEAK / peak } else { 1.0 };
    buffer.scale(normalization_gain);

    Ok(GenerationResult {
        buffer,
        normalization_gain,
    })
}

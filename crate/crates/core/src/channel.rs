//! Single-channel wind-noise synthesis: modulated excitation through the
//! AR spectral-shaping filter.

use crate::error::{Error, Result};
use crate::excitation::{generate_excitation, ExcitationCodebook};
use crate::filter::{allpole_filter_unchecked, ar_is_stable};
use crate::gain::{simulate_long_term_gain, simulate_short_term_gain, smooth_gain, GainModel,
                  LongTermTrack};
use crate::rng::RngStream;

/// The random streams one channel consumes.
#[derive(Debug, Clone, Copy)]
pub struct ChannelStreams {
    /// Used only when no shared long-term track is supplied.
    pub long_term: RngStream,
    pub excitation_noise: RngStream,
    pub codebook_choice: RngStream,
    pub short_term: RngStream,
}

/// Generate one channel of wind noise.
///
/// Pipeline: unit-RMS excitation, multiplied per sample by the smoothed
/// long-term and short-term gain tracks, then filtered by `1/A(z)`. When
/// `shared_long_term` is given (the multi-channel case) its track is used
/// verbatim; otherwise a private track is simulated from
/// `streams.long_term`.
pub fn generate_single_channel(
    gain_model: &GainModel,
    codebook: &ExcitationCodebook,
    ar_coeffs: &[f64],
    duration_s: f64,
    sample_rate_hz: f64,
    streams: &ChannelStreams,
    shared_long_term: Option<&LongTermTrack>,
) -> Result<Vec<f64>> {
    gain_model.validate()?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::config(format!("duration {duration_s} must be > 0")));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::config("sample rate must be > 0"));
    }
    if !ar_is_stable(ar_coeffs) {
        return Err(Error::config("ar coefficients are unstable"));
    }

    let num_samples = (duration_s * sample_rate_hz).round() as usize;
    let frame_len = gain_model.frame_len_samples();
    let num_frames = num_samples.div_ceil(frame_len);

    let long_term = match shared_long_term {
        Some(track) => {
            if track.frame_len_samples != frame_len {
                return Err(Error::argument(format!(
                    "shared long-term frame length {} does not match the gain model's {}",
                    track.frame_len_samples, frame_len
                )));
            }
            if track.gains.len() < num_frames {
                return Err(Error::argument(format!(
                    "shared long-term track has {} frames, need {num_frames}",
                    track.gains.len()
                )));
            }
            track.gains[..num_frames].to_vec()
        }
        None => {
            simulate_long_term_gain(&gain_model.markov, num_frames, &streams.long_term)?.gains
        }
    };

    let short_term = simulate_short_term_gain(&gain_model.weibull, num_frames, &streams.short_term)?;

    let lt = smooth_gain(&long_term, frame_len, gain_model.longterm_smooth_len)?;
    let st = smooth_gain(&short_term, frame_len, gain_model.shortterm_smooth_len)?;

    let mut modulated = generate_excitation(
        codebook,
        num_samples,
        &streams.excitation_noise,
        &streams.codebook_choice,
    )?;
    for (n, v) in modulated.iter_mut().enumerate() {
        *v *= lt[n] * st[n];
    }

    Ok(allpole_filter_unchecked(&modulated, ar_coeffs))
}

//! Temporal gain modelling: Markov long-term gain, Weibull short-term gain,
//! Hann-kernel smoothing.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use rand::Rng;

/// Number of wind states in the long-term model (no wind, low wind, high
/// wind).
pub const NUM_WIND_STATES: usize = 3;

/// Three-state Markov model for the slow amplitude envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGainModel {
    /// Gain per state, ordered no wind <= low wind <= high wind.
    pub state_gains: [f64; NUM_WIND_STATES],
    /// Row-stochastic transition matrix.
    pub transition_matrix: [[f64; NUM_WIND_STATES]; NUM_WIND_STATES],
    pub initial_state: usize,
    pub frame_len_samples: usize,
}

impl MarkovGainModel {
    pub fn validate(&self) -> Result<()> {
        if self.frame_len_samples == 0 {
            return Err(Error::config("markov frame length must be positive"));
        }
        if self.initial_state >= NUM_WIND_STATES {
            return Err(Error::config(format!(
                "initial state {} out of range",
                self.initial_state
            )));
        }
        for g in self.state_gains {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::config(format!("state gain {g} must be >= 0")));
            }
        }
        if self.state_gains.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config(
                "state gains must be ordered no-wind <= low <= high",
            ));
        }
        for row in &self.transition_matrix {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p) || !p.is_finite()) {
                return Err(Error::config("transition probabilities must be in [0, 1]"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::config(format!(
                    "transition matrix row sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Weibull frame-energy model for the fast gain fluctuations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
    pub frame_len_samples: usize,
}

impl WeibullParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::config(format!("weibull shape {} must be > 0", self.shape)));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::config(format!("weibull scale {} must be > 0", self.scale)));
        }
        if self.frame_len_samples == 0 {
            return Err(Error::config("weibull frame length must be positive"));
        }
        Ok(())
    }
}

/// Combined gain configuration of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GainModel {
    pub markov: MarkovGainModel,
    pub weibull: WeibullParams,
    /// Hann smoothing length for the long-term track (samples, odd).
    pub longterm_smooth_len: usize,
    /// Hann smoothing length for the short-term track (samples, odd).
    pub shortterm_smooth_len: usize,
}

impl GainModel {
    pub fn validate(&self) -> Result<()> {
        self.markov.validate()?;
        self.weibull.validate()?;
        if self.longterm_smooth_len == 0 || self.shortterm_smooth_len == 0 {
            return Err(Error::config("smoothing lengths must be >= 1"));
        }
        if self.longterm_smooth_len % 2 == 0 || self.shortterm_smooth_len % 2 == 0 {
            return Err(Error::config("smoothing lengths must be odd"));
        }
        if self.longterm_smooth_len < self.shortterm_smooth_len {
            return Err(Error::config(
                "long-term smoothing must be at least as long as short-term",
            ));
        }
        if self.markov.frame_len_samples != self.weibull.frame_len_samples {
            return Err(Error::config(
                "markov and weibull frame lengths must agree",
            ));
        }
        Ok(())
    }

    pub fn frame_len_samples(&self) -> usize {
        self.markov.frame_len_samples
    }
}

impl Default for GainModel {
    /// Stand-in defaults (10 ms frames at 16 kHz, 500 ms / 30 ms smoothing).
    /// Every value is configurable; trained parameters can be dropped in.
    fn default() -> Self {
        GainModel {
            markov: MarkovGainModel {
                state_gains: [0.1, 0.45, 1.0],
                transition_matrix: [
                    [0.98, 0.01, 0.01],
                    [0.01, 0.98, 0.01],
                    [0.01, 0.01, 0.98],
                ],
                initial_state: 1,
                frame_len_samples: 160,
            },
            weibull: WeibullParams {
                shape: 1.5,
                scale: 1.0,
                frame_len_samples: 160,
            },
            longterm_smooth_len: 8001,
            shortterm_smooth_len: 481,
        }
    }
}

/// One realization of the long-term envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct LongTermTrack {
    pub gains: Vec<f64>,
    pub states: Vec<usize>,
    pub frame_len_samples: usize,
}

/// Simulate the Markov chain and return the per-frame gain and state tracks.
pub fn simulate_long_term_gain(
    model: &MarkovGainModel,
    num_frames: usize,
    rng_stream: &RngStream,
) -> Result<LongTermTrack> {
    model.validate()?;
    let mut rng = rng_stream.rng();
    let mut states = Vec::with_capacity(num_frames);
    let mut gains = Vec::with_capacity(num_frames);
    let mut state = model.initial_state;
    for _ in 0..num_frames {
        states.push(state);
        gains.push(model.state_gains[state]);
        let u: f64 = rng.random();
        let row = &model.transition_matrix[state];
        let mut cumulative = 0.0;
        let mut next = NUM_WIND_STATES - 1;
        for (s, &p) in row.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                next = s;
                break;
            }
        }
        state = next;
    }
    Ok(LongTermTrack {
        gains,
        states,
        frame_len_samples: model.frame_len_samples,
    })
}

/// Per-frame short-term gains: frame energies drawn i.i.d. from
/// `Weibull(shape, scale)` by inverse-CDF sampling
/// `E = scale * (-ln(1 - u))^(1/shape)`, returned as `sqrt(E)`.
pub fn simulate_short_term_gain(
    params: &WeibullParams,
    num_frames: usize,
    rng_stream: &RngStream,
) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = rng_stream.rng();
    let inv_shape = 1.0 / params.shape;
    Ok((0..num_frames)
        .map(|_| {
            let u: f64 = rng.random();
            let energy = params.scale * (-(-u).ln_1p()).powf(inv_shape);
            energy.sqrt()
        })
        .collect())
}

/// Expand a framewise gain track to sample rate and smooth it with a
/// unit-area Hann kernel.
///
/// The track is held piecewise-constant over each frame and edge-replicated
/// beyond its ends, so a constant track stays exactly constant and the
/// output is a convex combination of track values (bounded by the track
/// min/max). `smooth_len` must be odd; 1 disables smoothing.
pub fn smooth_gain(framewise: &[f64], frame_len: usize, smooth_len: usize) -> Result<Vec<f64>> {
    if framewise.is_empty() {
        return Err(Error::argument("gain track must not be empty"));
    }
    if frame_len == 0 {
        return Err(Error::argument("frame length must be positive"));
    }
    if smooth_len % 2 == 0 {
        return Err(Error::argument("smoothing length must be odd"));
    }
    let num_frames = framewise.len();
    let out_len = num_frames * frame_len;
    if smooth_len == 1 {
        let mut out = Vec::with_capacity(out_len);
        for &g in framewise {
            out.extend(std::iter::repeat(g).take(frame_len));
        }
        return Ok(out);
    }

    // Symmetric Hann kernel, normalized to unit area.
    let m = smooth_len;
    let mut kernel: Vec<f64> = (0..m)
        .map(|n| 0.5 * (1.0 - (std::f64::consts::TAU * n as f64 / (m - 1) as f64).cos()))
        .collect();
    let area: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= area;
    }
    // Prefix sums let each output sample integrate the kernel frame by frame
    // instead of tap by tap (the input is piecewise constant).
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    for &k in &kernel {
        prefix.push(prefix.last().unwrap() + k);
    }

    let half = (m - 1) / 2;
    let clamp_frame = |s: i64| -> usize {
        if s < 0 {
            0
        } else {
            ((s as usize) / frame_len).min(num_frames - 1)
        }
    };
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        // out[n] = sum_j kernel[j] * track(n + half - j), replicate-padded.
        let hi_pos = n as i64 + half as i64; // j = 0
        let lo_pos = hi_pos - (m as i64 - 1); // j = m-1
        let mut acc = 0.0;
        let mut pos = lo_pos;
        while pos <= hi_pos {
            let f = clamp_frame(pos);
            // End of the run of window positions that read frame f
            // (edge frames extend over the replicated padding).
            let f_end = if f == num_frames - 1 {
                hi_pos
            } else {
                ((f + 1) * frame_len) as i64 - 1
            };
            let seg_lo = pos;
            let seg_hi = f_end.min(hi_pos);
            // Positions map to kernel taps j = hi_pos - pos, so the run
            // [seg_lo, seg_hi] covers taps [hi_pos - seg_hi, hi_pos - seg_lo].
            let j_lo = (hi_pos - seg_hi) as usize;
            let j_hi = (hi_pos - seg_lo) as usize;
            acc += framewise[f] * (prefix[j_hi + 1] - prefix[j_lo]);
            pos = seg_hi + 1;
        }
        out.push(acc);
    }
    Ok(out)
}

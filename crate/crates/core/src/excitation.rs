//! Excitation signals: Gaussian noise mixed with codebook snippets.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Seed of the built-in synthetic codebook, fixed so default runs are
/// reproducible across processes.
pub const DEFAULT_CODEBOOK_SEED: u64 = 0x51D2_C0DE;

/// Codebook of excitation snippets plus the Gaussian/codebook mix weight.
///
/// Entries are normalized to unit RMS on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationCodebook {
    entries: Vec<Vec<f64>>,
    mix_weight: f64,
}

impl ExcitationCodebook {
    /// Build from raw snippets. An empty entry list is only permitted with
    /// `mix_weight == 0` (pure Gaussian excitation).
    pub fn from_entries(entries: Vec<Vec<f64>>, mix_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mix_weight) || !mix_weight.is_finite() {
            return Err(Error::config(format!(
                "codebook mix weight {mix_weight} must be in [0, 1]"
            )));
        }
        if entries.is_empty() && mix_weight > 0.0 {
            return Err(Error::config(
                "codebook is empty but the mix weight is positive",
            ));
        }
        let mut normalized = Vec::with_capacity(entries.len());
        for (i, mut e) in entries.into_iter().enumerate() {
            if e.is_empty() {
                return Err(Error::config(format!("codebook entry {i} is empty")));
            }
            let rms = (e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64).sqrt();
            if !(rms.is_finite() && rms > 0.0) {
                return Err(Error::config(format!("codebook entry {i} is silent")));
            }
            for v in &mut e {
                *v /= rms;
            }
            normalized.push(e);
        }
        Ok(ExcitationCodebook {
            entries: normalized,
            mix_weight,
        })
    }

    /// Synthetic default codebook: near-white Gaussian snippets (one-pole
    /// low-pass at 2 kHz) with a slow log-normal amplitude texture. The
    /// spectral shaping of the output is left to the AR filter, so entries
    /// stay close to white.
    pub fn synthetic_default(mix_weight: f64, num_entries: usize, entry_len: usize) -> Result<Self> {
        Self::synthetic_with_seed(mix_weight, num_entries, entry_len, DEFAULT_CODEBOOK_SEED)
    }

    pub fn synthetic_with_seed(
        mix_weight: f64,
        num_entries: usize,
        entry_len: usize,
        seed: u64,
    ) -> Result<Self> {
        if num_entries == 0 || entry_len == 0 {
            return Err(Error::config("synthetic codebook needs entries and length"));
        }
        // 2 kHz one-pole at 16 kHz; the exact rate does not matter for an
        // excitation-domain texture.
        let lp = (-std::f64::consts::TAU * 2000.0 / 16000.0).exp();
        let am: f64 = (-1.0f64 / (0.050 * 16000.0)).exp();
        let am_gain = (1.0 - am * am).sqrt();
        let mut entries = Vec::with_capacity(num_entries);
        for idx in 0..num_entries {
            let stream = RngStream::new(seed, idx as u64);
            let mut rng = stream.rng();
            let mut e = Vec::with_capacity(entry_len);
            let mut lp_state = 0.0f64;
            let mut am_state = 0.0f64;
            for _ in 0..entry_len {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                lp_state = lp * lp_state + (1.0 - lp) * g;
                let t: f64 = rng.sample(rand_distr::StandardNormal);
                am_state = am * am_state + am_gain * t;
                e.push(lp_state * (0.5 * am_state).exp());
            }
            entries.push(e);
        }
        Self::from_entries(entries, mix_weight)
    }

    pub fn mix_weight(&self) -> f64 {
        self.mix_weight
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize) -> &[f64] {
        &self.entries[i]
    }
}

/// Generate a unit-RMS excitation of `length` samples:
/// `(1 - beta) * gaussian + beta * codebook component`.
///
/// The codebook component is assembled tile by tile; each tile draws a fresh
/// entry index and a random circular start offset from the `choice` stream,
/// so different realizations (and different channels) stay uncorrelated even
/// when they pick the same entry. For `length` up to one entry the component
/// is a single contiguous crop.
pub fn generate_excitation(
    codebook: &ExcitationCodebook,
    length: usize,
    noise: &RngStream,
    choice: &RngStream,
) -> Result<Vec<f64>> {
    let beta = codebook.mix_weight;
    if beta > 0.0 && codebook.entries.is_empty() {
        return Err(Error::config(
            "codebook is empty but the mix weight is positive",
        ));
    }
    if length == 0 {
        return Ok(Vec::new());
    }

    let mut rng_noise = noise.rng();
    let mut out: Vec<f64> = (0..length)
        .map(|_| {
            let g: f64 = rng_noise.sample(rand_distr::StandardNormal);
            (1.0 - beta) * g
        })
        .collect();

    if beta > 0.0 {
        let mut rng_choice = choice.rng();
        let mut pos = 0;
        while pos < length {
            let idx = rng_choice.random_range(0..codebook.entries.len());
            let entry = &codebook.entries[idx];
            let offset = rng_choice.random_range(0..entry.len());
            let tile = (length - pos).min(entry.len());
            for n in 0..tile {
                out[pos + n] += beta * entry[(offset + n) % entry.len()];
            }
            pos += tile;
        }
    }

    let rms = (out.iter().map(|v| v * v).sum::<f64>() / length as f64).sqrt();
    if rms > 0.0 {
        for v in &mut out {
            *v /= rms;
        }
    }
    Ok(out)
}

//! Coherence estimation from signals and validation against the model.
//!
//! The estimator is Welch-style: with the STFT coefficients `V_i(l, k)` of
//! each channel,
//!
//! ```text
//! gamma_hat_ij(k) = sum_l V_i V_j* / sqrt(sum_l |V_i|^2 * sum_l |V_j|^2)
//! ```
//!
//! using the same window and FFT grid as the generation-side mixing so the
//! model and estimation grids coincide.

use std::io::Write;

use num_complex::Complex64;

use crate::buffer::MultichannelBuffer;
use crate::corcos::{coherence_pair, CorcosParams};
use crate::error::{Error, Result};
use crate::stft::stft;
use crate::window::WindowSpec;

/// Minimum number of STFT frames the estimator accepts.
pub const MIN_FRAMES: usize = 8;

/// Estimated complex coherence for every channel pair.
///
/// Bins where a channel had no energy across all frames are *missing*
/// (`None`) rather than zero, and are excluded from nMSE sums.
#[derive(Debug, Clone)]
pub struct CoherenceEstimate {
    pairs: Vec<Option<Complex64>>,
    num_channels: usize,
    num_bins: usize,
    num_frames_averaged: usize,
    fft_length: usize,
    sample_rate_hz: f64,
    window: WindowSpec,
}

impl CoherenceEstimate {
    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn num_frames_averaged(&self) -> usize {
        self.num_frames_averaged
    }

    pub fn fft_length(&self) -> usize {
        self.fft_length
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz / self.fft_length as f64
    }

    fn pair_offset(&self, i: usize, j: usize) -> usize {
        // Upper-triangle (i < j) row-major offset.
        debug_assert!(i < j && j < self.num_channels);
        let n = self.num_channels;
        (i * (2 * n - i - 1)) / 2 + (j - i - 1)
    }

    /// Assemble an estimate from externally computed values, e.g. synthetic
    /// fixtures or a foreign estimator. `pairs` holds one value per
    /// (pair, bin), pairs ordered `(0,1), (0,2), ..., (n-2,n-1)`, bins
    /// `0..=K/2` innermost.
    pub fn from_pair_values(
        num_channels: usize,
        window: WindowSpec,
        fft_length: usize,
        sample_rate_hz: f64,
        num_frames_averaged: usize,
        pairs: Vec<Option<Complex64>>,
    ) -> Result<Self> {
        if num_channels < 1 {
            return Err(Error::argument("need at least one channel"));
        }
        let num_bins = fft_length / 2 + 1;
        let expected = num_channels * (num_channels - 1) / 2 * num_bins;
        if pairs.len() != expected {
            return Err(Error::argument(format!(
                "expected {expected} pair values, got {}",
                pairs.len()
            )));
        }
        Ok(CoherenceEstimate {
            pairs,
            num_channels,
            num_bins,
            num_frames_averaged,
            fft_length,
            sample_rate_hz,
            window,
        })
    }

    /// `gamma_hat_ij(k)`; unit on the diagonal, conjugate-symmetric in the
    /// pair order, `None` where the estimate is undefined.
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> Option<Complex64> {
        assert!(i < self.num_channels && j < self.num_channels && k < self.num_bins);
        if i == j {
            return Some(Complex64::ONE);
        }
        let (lo, hi, conj) = if i < j { (i, j, false) } else { (j, i, true) };
        let v = self.pairs[self.pair_offset(lo, hi) * self.num_bins + k];
        if conj {
            v.map(|g| g.conj())
        } else {
            v
        }
    }
}

/// Welch-averaged complex coherence of all channel pairs.
pub fn estimate_coherence(
    buffer: &MultichannelBuffer,
    window: &WindowSpec,
    fft_length: usize,
) -> Result<CoherenceEstimate> {
    let frames = stft(buffer, window, fft_length)?;
    if frames.num_frames() < MIN_FRAMES {
        return Err(Error::argument(format!(
            "coherence estimation needs at least {MIN_FRAMES} frames, got {}",
            frames.num_frames()
        )));
    }
    let n = frames.num_channels();
    let bins = frames.num_bins();
    let num_pairs = n * (n - 1) / 2;

    // Per-channel auto spectra.
    let mut auto = vec![0.0f64; n * bins];
    for c in 0..n {
        for l in 0..frames.num_frames() {
            let row = frames.frame(c, l);
            for (k, v) in row.iter().enumerate() {
                auto[c * bins + k] += v.norm_sqr();
            }
        }
    }

    let mut pairs = vec![None; num_pairs * bins];
    let mut pair_idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            let mut cross = vec![Complex64::ZERO; bins];
            for l in 0..frames.num_frames() {
                let vi = frames.frame(i, l);
                let vj = frames.frame(j, l);
                for (k, c) in cross.iter_mut().enumerate() {
                    *c += vi[k] * vj[k].conj();
                }
            }
            for k in 0..bins {
                let denom = auto[i * bins + k] * auto[j * bins + k];
                pairs[pair_idx * bins + k] = if denom > 0.0 {
                    Some(cross[k] / denom.sqrt())
                } else {
                    None
                };
            }
            pair_idx += 1;
        }
    }

    Ok(CoherenceEstimate {
        pairs,
        num_channels: n,
        num_bins: bins,
        num_frames_averaged: frames.num_frames(),
        fft_length,
        sample_rate_hz: buffer.sample_rate_hz(),
        window: *window,
    })
}

fn check_grid(estimate: &CoherenceEstimate, params: &CorcosParams) -> Result<()> {
    params.validate()?;
    if estimate.fft_length != params.fft_length {
        return Err(Error::argument(format!(
            "estimate fft length {} does not match the model's {}",
            estimate.fft_length, params.fft_length
        )));
    }
    if estimate.sample_rate_hz != params.sample_rate_hz {
        return Err(Error::argument(
            "estimate and model sample rates differ",
        ));
    }
    Ok(())
}

/// Detailed normalized-MSE outcome for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairNmse {
    pub pair: (usize, usize),
    pub value: f64,
    pub bins_used: usize,
    pub bins_missing: usize,
}

fn nmse_detail(
    estimate: &CoherenceEstimate,
    params: &CorcosParams,
    pair: (usize, usize),
    band_limit_hz: Option<f64>,
) -> Result<PairNmse> {
    check_grid(estimate, params)?;
    let (i, j) = pair;
    if i >= estimate.num_channels || j >= estimate.num_channels {
        return Err(Error::argument(format!(
            "pair ({i}, {j}) out of range for {} channels",
            estimate.num_channels
        )));
    }
    if i >= params.num_channels || j >= params.num_channels {
        return Err(Error::argument("pair out of range for the model"));
    }

    // Eq-style sum over k = 0 .. K/2 - 1, optionally band-limited.
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut used = 0;
    let mut missing = 0;
    for k in 0..params.fft_length / 2 {
        if let Some(limit) = band_limit_hz {
            if estimate.bin_frequency_hz(k) > limit {
                break;
            }
        }
        let model = coherence_pair(params, k, i, j);
        match estimate.gamma(i, j, k) {
            Some(est) => {
                numerator += (est - model).norm_sqr();
                denominator += model.norm_sqr();
                used += 1;
            }
            None => missing += 1,
        }
    }
    if denominator == 0.0 {
        return Err(Error::argument(
            "no usable bins in the requested band",
        ));
    }
    Ok(PairNmse {
        pair,
        value: numerator / denominator,
        bins_used: used,
        bins_missing: missing,
    })
}

/// Normalized mean squared error between the estimated and model coherence
/// of a pair: `sum_k |gh - g|^2 / sum_k |g|^2`, `k` up to `K/2 - 1` or to
/// `band_limit_hz` when given. Missing bins are excluded from both sums.
pub fn nmse(
    estimate: &CoherenceEstimate,
    params: &CorcosParams,
    pair: (usize, usize),
    band_limit_hz: Option<f64>,
) -> Result<f64> {
    Ok(nmse_detail(estimate, params, pair, band_limit_hz)?.value)
}

/// One row of the tabular estimate-vs-model report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub pair: (usize, usize),
    pub frequency_hz: f64,
    /// Missing when the estimate is undefined at this bin.
    pub estimate: Option<Complex64>,
    pub model: Complex64,
}

/// Estimate-vs-model curves for every pair plus per-pair nMSE summaries.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<PairNmse>,
    pub band_limit_hz: f64,
}

/// Build the report for all pairs `i < j` with frequencies up to
/// `band_limit_hz`. Model columns are computed by the same
/// [`coherence_pair`] code the generator uses.
pub fn coherence_report(
    estimate: &CoherenceEstimate,
    params: &CorcosParams,
    band_limit_hz: f64,
) -> Result<CoherenceReport> {
    check_grid(estimate, params)?;
    if estimate.num_channels != params.num_channels {
        return Err(Error::argument(format!(
            "estimate has {} channels, model {}",
            estimate.num_channels, params.num_channels
        )));
    }
    if !(band_limit_hz.is_finite() && band_limit_hz > 0.0) {
        return Err(Error::argument("band limit must be positive"));
    }

    let n = estimate.num_channels;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..estimate.num_bins {
                let f = estimate.bin_frequency_hz(k);
                if f > band_limit_hz {
                    break;
                }
                rows.push(ReportRow {
                    pair: (i, j),
                    frequency_hz: f,
                    estimate: estimate.gamma(i, j, k),
                    model: coherence_pair(params, k, i, j),
                });
            }
            summaries.push(nmse_detail(estimate, params, (i, j), Some(band_limit_hz))?);
        }
    }
    Ok(CoherenceReport {
        rows,
        summaries,
        band_limit_hz,
    })
}

impl CoherenceReport {
    /// Comma-separated output: a header row, one row per (pair, frequency),
    /// then the per-pair nMSE summary as trailing `#` comment lines.
    /// Channel indices are 1-based here (microphone numbering); empty fields
    /// mark missing estimates.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "pair_i,pair_j,frequency_hz,re_coherence_est,im_coherence_est,re_coherence_model,im_coherence_model"
        )?;
        for row in &self.rows {
            let (i, j) = row.pair;
            match row.estimate {
                Some(g) => writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    i + 1,
                    j + 1,
                    row.frequency_hz,
                    g.re,
                    g.im,
                    row.model.re,
                    row.model.im
                )?,
                None => writeln!(
                    out,
                    "{},{},{},,,{},{}",
                    i + 1,
                    j + 1,
                    row.frequency_hz,
                    row.model.re,
                    row.model.im
                )?,
            }
        }
        writeln!(out, "# nmse summary (band limit {} Hz)", self.band_limit_hz)?;
        for s in &self.summaries {
            writeln!(
                out,
                "# nmse pair_i={} pair_j={} value={} bins_used={} bins_missing={}",
                s.pair.0 + 1,
                s.pair.1 + 1,
                s.value,
                s.bins_used,
                s.bins_missing
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_noise, RngStream};

    fn params(n: usize) -> CorcosParams {
        CorcosParams {
            mic_spacing_m: 0.004,
            freefield_speed_mps: 1.8,
            convective_ratio: 0.8,
            doa_rad: std::f64::consts::FRAC_PI_2,
            alpha_longitudinal: 0.125,
            alpha_lateral: 0.7,
            sample_rate_hz: 16000.0,
            fft_length: 2048,
            num_channels: n,
        }
    }

    fn spec() -> WindowSpec {
        WindowSpec::hann_75(2048).unwrap()
    }

    #[test]
    fn identical_channels_have_unit_coherence() {
        let x = gaussian_noise(&RngStream::new(21, 0), 32000);
        let buf = MultichannelBuffer::new(vec![x.clone(), x], 16000.0).unwrap();
        let est = estimate_coherence(&buf, &spec(), 2048).unwrap();
        for k in 0..est.num_bins() {
            let g = est.gamma(0, 1, k).unwrap();
            assert!((g - Complex64::ONE).norm() < 1e-9, "bin {k}: {g}");
        }
    }

    #[test]
    fn sign_flipped_channel_has_minus_one_coherence() {
        let x = gaussian_noise(&RngStream::new(22, 0), 32000);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let buf = MultichannelBuffer::new(vec![x, y], 16000.0).unwrap();
        let est = estimate_coherence(&buf, &spec(), 2048).unwrap();
        for k in 0..est.num_bins() {
            let g = est.gamma(0, 1, k).unwrap();
            assert!((g + Complex64::ONE).norm() < 1e-9, "bin {k}: {g}");
        }
    }

    #[test]
    fn independent_noise_coherence_is_small() {
        // Estimator bias for independent signals scales like 1/sqrt(L).
        let secs = 60;
        let x = gaussian_noise(&RngStream::new(23, 0), secs * 16000);
        let y = gaussian_noise(&RngStream::new(23, 1), secs * 16000);
        let buf = MultichannelBuffer::new(vec![x, y], 16000.0).unwrap();
        let est = estimate_coherence(&buf, &spec(), 2048).unwrap();
        let frames = est.num_frames_averaged() as f64;
        let mean_mag: f64 = (0..est.num_bins())
            .map(|k| est.gamma(0, 1, k).unwrap().norm())
            .sum::<f64>()
            / est.num_bins() as f64;
        assert!(mean_mag <= 2.0 / frames.sqrt(), "mean {mean_mag}");
    }

    #[test]
    fn estimate_magnitudes_bounded_and_hermitian() {
        let x = gaussian_noise(&RngStream::new(24, 0), 64000);
        let y = gaussian_noise(&RngStream::new(24, 1), 64000);
        let buf = MultichannelBuffer::new(vec![x, y], 16000.0).unwrap();
        let est = estimate_coherence(&buf, &spec(), 2048).unwrap();
        for k in 0..est.num_bins() {
            let g = est.gamma(0, 1, k).unwrap();
            assert!(g.norm() <= 1.0 + 1e-9);
            assert_eq!(est.gamma(1, 0, k).unwrap(), g.conj());
            assert_eq!(est.gamma(1, 1, k).unwrap(), Complex64::ONE);
        }
    }

    #[test]
    fn too_few_frames_rejected() {
        let buf =
            MultichannelBuffer::new(vec![vec![0.1; 2048], vec![0.1; 2048]], 16000.0).unwrap();
        assert!(estimate_coherence(&buf, &spec(), 2048).is_err());
    }

    #[test]
    fn silent_channel_yields_missing_bins() {
        let x = gaussian_noise(&RngStream::new(25, 0), 32000);
        let z = vec![0.0; 32000];
        let buf = MultichannelBuffer::new(vec![x, z], 16000.0).unwrap();
        let est = estimate_coherence(&buf, &spec(), 2048).unwrap();
        for k in [0, 100, 1024] {
            assert!(est.gamma(0, 1, k).is_none());
        }
    }

    #[test]
    fn nmse_of_model_with_itself_is_zero() {
        // Synthesize an estimate equal to the model.
        let p = params(2);
        let est = synthetic_estimate(&p, |k| coherence_pair(&p, k, 0, 1));
        let v = nmse(&est, &p, (0, 1), None).unwrap();
        assert!(v.abs() <= 1e-12, "nmse {v}");
    }

    #[test]
    fn nmse_of_zero_estimate_is_one() {
        let p = params(2);
        let est = synthetic_estimate(&p, |_| Complex64::ZERO);
        let v = nmse(&est, &p, (0, 1), None).unwrap();
        assert!((v - 1.0).abs() <= 1e-12, "nmse {v}");
        let v = nmse(&est, &p, (0, 1), Some(1000.0)).unwrap();
        assert!((v - 1.0).abs() <= 1e-12, "banded nmse {v}");
    }

    #[test]
    fn nmse_constant_offset_matches_direct_sum() {
        let p = params(2);
        let delta = 0.1;
        let est = synthetic_estimate(&p, |k| {
            coherence_pair(&p, k, 0, 1) + Complex64::new(delta, 0.0)
        });
        let v = nmse(&est, &p, (0, 1), None).unwrap();
        // Direct-summation oracle: delta^2 * bins / sum |gamma|^2.
        let bins = p.fft_length / 2;
        let denom: f64 = (0..bins)
            .map(|k| coherence_pair(&p, k, 0, 1).norm_sqr())
            .sum();
        let expected = delta * delta * bins as f64 / denom;
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn nmse_rejects_grid_mismatch() {
        let p = params(2);
        let est = synthetic_estimate(&p, |_| Complex64::ZERO);
        let mut other = p;
        other.fft_length = 1024;
        assert!(nmse(&est, &other, (0, 1), None).is_err());
        let mut other = p;
        other.sample_rate_hz = 48000.0;
        assert!(nmse(&est, &other, (0, 1), None).is_err());
    }

    #[test]
    fn report_has_expected_shape() {
        let p = params(2);
        let est = synthetic_estimate(&p, |k| coherence_pair(&p, k, 0, 1));
        let report = coherence_report(&est, &p, 1000.0).unwrap();
        // One off-diagonal pair; 1000 Hz at K=2048/Fs=16k covers k=0..128.
        assert_eq!(report.summaries.len(), 1);
        assert_eq!(report.rows.len(), 129);
        assert_eq!(report.rows[0].model, Complex64::ONE);
        assert_eq!(report.rows[0].frequency_hz, 0.0);

        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "pair_i,pair_j,frequency_hz,re_coherence_est,im_coherence_est,re_coherence_model,im_coherence_model"
        );
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 130);
        assert!(text.lines().any(|l| l.starts_with("# nmse pair_i=1 pair_j=2")));
    }

    #[test]
    fn report_pair_count_scales_with_channels() {
        let p = params(3);
        let x = gaussian_noise(&RngStream::new(26, 0), 32000);
        let y = gaussian_noise(&RngStream::new(26, 1), 32000);
        let z = gaussian_noise(&RngStream::new(26, 2), 32000);
        let buf = MultichannelBuffer::new(vec![x, y, z], 16000.0).unwrap();
        let est = estimate_coherence(&buf, &spec(), 2048).unwrap();
        let report = coherence_report(&est, &p, 1000.0).unwrap();
        assert_eq!(report.summaries.len(), 3);
        assert_eq!(report.rows.len(), 3 * 129);
    }

    /// Build a CoherenceEstimate whose (0,1) pair equals `f(k)`.
    fn synthetic_estimate(
        p: &CorcosParams,
        f: impl Fn(usize) -> Complex64,
    ) -> CoherenceEstimate {
        CoherenceEstimate::from_pair_values(
            2,
            spec(),
            p.fft_length,
            p.sample_rate_hz,
            1000,
            (0..p.num_bins()).map(|k| Some(f(k))).collect(),
        )
        .unwrap()
    }
}

//! All-pole filtering and autoregressive coefficient fitting.
//!
//! Coefficient sign convention, used everywhere in this crate:
//! `A(z) = 1 + a_1 z^-1 + ... + a_p z^-p` and the filter output is
//!
//! ```text
//! y[n] = x[n] - sum_{m=1..p} a_m * y[n-m]
//! ```
//!
//! i.e. the coefficients are the ones that appear *inside* `A(z)`, not their
//! negations.

use crate::error::{Error, Result};

/// Causal IIR filtering by `1/A(z)` with zero initial state.
///
/// Rejects coefficient sets whose poles are not strictly inside the unit
/// circle (checked through the reflection-coefficient recursion, see
/// [`ar_is_stable`]).
pub fn allpole_filter(input: &[f64], coefficients: &[f64]) -> Result<Vec<f64>> {
    if !ar_is_stable(coefficients) {
        return Err(Error::config(
            "all-pole coefficients describe an unstable filter",
        ));
    }
    Ok(allpole_filter_unchecked(input, coefficients))
}

pub(crate) fn allpole_filter_unchecked(input: &[f64], coefficients: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(input.len());
    for (n, &x) in input.iter().enumerate() {
        let mut y = x;
        for (m, &a) in coefficients.iter().enumerate() {
            if n > m {
                y -= a * out[n - 1 - m];
            }
        }
        out.push(y);
    }
    out
}

/// Stability of `1/A(z)` via the step-down (Schur-Cohn) recursion: stable iff
/// every reflection coefficient has magnitude < 1.
pub fn ar_is_stable(coefficients: &[f64]) -> bool {
    if coefficients.iter().any(|a| !a.is_finite()) {
        return false;
    }
    let mut a = coefficients.to_vec();
    while let Some(&k) = a.last() {
        if k.abs() >= 1.0 {
            return false;
        }
        let p = a.len();
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (0..p - 1)
            .map(|j| (a[j] - k * a[p - 2 - j]) / denom)
            .collect();
        a = prev;
    }
    true
}

/// Levinson-Durbin recursion on an autocorrelation sequence `r[0..=order]`.
///
/// Returns the AR coefficients (in the [`allpole_filter`] sign convention)
/// and the final prediction-error variance.
pub fn levinson_durbin(autocorrelation: &[f64], order: usize) -> Result<(Vec<f64>, f64)> {
    if autocorrelation.len() < order + 1 {
        return Err(Error::argument(format!(
            "need {} autocorrelation lags for order {order}",
            order + 1
        )));
    }
    let r = autocorrelation;
    if r[0] <= 0.0 || !r[0].is_finite() {
        return Err(Error::argument("autocorrelation at lag 0 must be positive"));
    }
    let mut a = vec![0.0f64; order];
    let mut err = r[0];
    for i in 1..=order {
        let mut acc = r[i];
        for j in 1..i {
            acc += a[j - 1] * r[i - j];
        }
        let k = -acc / err;
        if !k.is_finite() {
            return Err(Error::argument(
                "autocorrelation sequence is numerically singular",
            ));
        }
        let mut next = a.clone();
        next[i - 1] = k;
        for j in 0..i - 1 {
            next[j] = a[j] + k * a[i - 2 - j];
        }
        a = next;
        err *= 1.0 - k * k;
    }
    Ok((a, err))
}

/// Piecewise power-law spectral envelope used to derive default AR
/// coefficients: flat up to `corner_hz`, then `slope_db_per_octave`, with a
/// flat floor at `floor_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPsd {
    pub corner_hz: f64,
    pub slope_db_per_octave: f64,
    pub floor_db: f64,
}

impl Default for TargetPsd {
    fn default() -> Self {
        TargetPsd {
            corner_hz: 300.0,
            slope_db_per_octave: -18.0,
            floor_db: -60.0,
        }
    }
}

impl TargetPsd {
    pub fn validate(&self) -> Result<()> {
        if !(self.corner_hz.is_finite() && self.corner_hz > 0.0) {
            return Err(Error::config("target psd corner must be positive"));
        }
        if !(self.slope_db_per_octave.is_finite() && self.slope_db_per_octave < 0.0) {
            return Err(Error::config("target psd slope must be negative"));
        }
        if !(self.floor_db.is_finite() && self.floor_db < 0.0) {
            return Err(Error::config("target psd floor must be negative dB"));
        }
        Ok(())
    }

    /// Power density (linear) at `freq_hz`, normalized to 1 in the flat band.
    pub fn power(&self, freq_hz: f64) -> f64 {
        let floor = 10f64.powf(self.floor_db / 10.0);
        if freq_hz <= self.corner_hz {
            return 1.0;
        }
        let exponent = self.slope_db_per_octave / (10.0 * std::f64::consts::LOG10_2);
        (freq_hz / self.corner_hz).powf(exponent).max(floor)
    }
}

/// Fit AR coefficients of `order` to a target spectral envelope.
///
/// The target is sampled on a dense grid, turned into the first
/// `order + 1` autocorrelation lags by an inverse DFT, and passed through
/// [`levinson_durbin`]. The result is minimum-phase, hence always stable.
pub fn fit_ar_to_psd(
    target: &TargetPsd,
    order: usize,
    sample_rate_hz: f64,
    grid_len: usize,
) -> Result<(Vec<f64>, f64)> {
    target.validate()?;
    if order == 0 {
        return Err(Error::argument("ar order must be at least 1"));
    }
    if grid_len < 2 * (order + 1) {
        return Err(Error::argument("psd grid is too short for the order"));
    }
    let half = grid_len / 2;
    let psd: Vec<f64> = (0..=half)
        .map(|k| target.power(k as f64 * sample_rate_hz / grid_len as f64))
        .collect();
    // r[tau] = (1/G) sum_k S(k) cos(2 pi k tau / G) over the full symmetric
    // grid; only the first order+1 lags are needed.
    let mut r = vec![0.0f64; order + 1];
    for (tau, r_tau) in r.iter_mut().enumerate() {
        let mut acc = psd[0];
        for (k, &s) in psd.iter().enumerate().skip(1) {
            let c = (std::f64::consts::TAU * k as f64 * tau as f64 / grid_len as f64).cos();
            let weight = if k == half && grid_len % 2 == 0 {
                1.0
            } else {
                2.0
            };
            acc += weight * s * c;
        }
        *r_tau = acc / grid_len as f64;
    }
    let (a, err) = levinson_durbin(&r, order)?;
    debug_assert!(ar_is_stable(&a));
    Ok((a, err))
}

/// Magnitude-squared response of `1/A(z)` at `freq_hz`.
pub fn ar_power_response(coefficients: &[f64], freq_hz: f64, sample_rate_hz: f64) -> f64 {
    let w = std::f64::consts::TAU * freq_hz / sample_rate_hz;
    let mut re = 1.0;
    let mut im = 0.0;
    for (m, &a) in coefficients.iter().enumerate() {
        let phi = w * (m + 1) as f64;
        re += a * phi.cos();
        im -= a * phi.sin();
    }
    1.0 / (re * re + im * im)
}

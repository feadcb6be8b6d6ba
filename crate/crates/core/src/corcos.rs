//! Corcos coherence model for a uniform linear array and its per-bin
//! Cholesky mixing factors.
//!
//! The complex coherence between microphones `i` and `j` at bin `k` is
//!
//! ```text
//! gamma_ij(k) = exp(-alpha(theta) * w_k * d * |i-j| / Uc)
//!             * exp(+- I * w_k * d * |i-j| * cos(theta) / Uc)
//! ```
//!
//! with `w_k = 2 pi k Fs / K`, convective speed `Uc = ratio * U`, the
//! direction-dependent decay `alpha(theta) = a1 |cos theta| + a2 |sin theta|`
//! and the positive phase sign for `i >= j`, negative for `i < j`, which
//! makes each matrix Hermitian with a unit diagonal.

use num_complex::Complex64;

use crate::cholesky::{cholesky_upper, regularize, ComplexMatrix};
use crate::error::{Error, Result};

/// Physical scene description for the coherence model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorcosParams {
    /// Adjacent-microphone spacing of the ULA in meters.
    pub mic_spacing_m: f64,
    /// Free-field wind speed in m/s.
    pub freefield_speed_mps: f64,
    /// Convective speed as a fraction of the free-field speed (~0.8).
    pub convective_ratio: f64,
    /// Wind direction of arrival in radians; 0 is downwind (parallel to the
    /// array axis), pi/2 crosswind.
    pub doa_rad: f64,
    /// Longitudinal coherence decay rate.
    pub alpha_longitudinal: f64,
    /// Lateral coherence decay rate.
    pub alpha_lateral: f64,
    pub sample_rate_hz: f64,
    pub fft_length: usize,
    pub num_channels: usize,
}

impl CorcosParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mic_spacing_m", self.mic_spacing_m),
            ("freefield_speed_mps", self.freefield_speed_mps),
            ("convective_ratio", self.convective_ratio),
            ("alpha_longitudinal", self.alpha_longitudinal),
            ("alpha_lateral", self.alpha_lateral),
            ("sample_rate_hz", self.sample_rate_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !self.doa_rad.is_finite() {
            return Err(Error::config("doa_rad must be finite"));
        }
        if self.fft_length < 2 || self.fft_length % 2 != 0 {
            return Err(Error::config(format!(
                "fft_length {} must be even and >= 2",
                self.fft_length
            )));
        }
        if self.num_channels < 1 {
            return Err(Error::config("num_channels must be >= 1"));
        }
        Ok(())
    }

    /// Convective turbulence speed `Uc = ratio * U`.
    pub fn convective_speed_mps(&self) -> f64 {
        self.convective_ratio * self.freefield_speed_mps
    }

    /// Angular frequency of bin `k`.
    pub fn angular_frequency(&self, bin: usize) -> f64 {
        std::f64::consts::TAU * bin as f64 * self.sample_rate_hz / self.fft_length as f64
    }

    /// One-sided bin count `K/2 + 1`.
    pub fn num_bins(&self) -> usize {
        self.fft_length / 2 + 1
    }
}

/// Direction-dependent decay `a1 |cos theta| + a2 |sin theta|`.
pub fn decay_alpha(theta_rad: f64, alpha_longitudinal: f64, alpha_lateral: f64) -> Result<f64> {
    if !theta_rad.is_finite() || !alpha_longitudinal.is_finite() || !alpha_lateral.is_finite() {
        return Err(Error::argument("decay_alpha inputs must be finite"));
    }
    if alpha_longitudinal <= 0.0 || alpha_lateral <= 0.0 {
        return Err(Error::argument("decay rates must be positive"));
    }
    Ok(alpha_longitudinal * theta_rad.cos().abs() + alpha_lateral * theta_rad.sin().abs())
}

/// Model coherence between channels `i` and `j` at bin `k`.
///
/// Unit magnitude at `k = 0` or `i = j`; magnitude strictly below 1
/// otherwise. The phase sign follows the pair orientation (positive for
/// `i >= j`).
pub fn coherence_pair(params: &CorcosParams, bin: usize, i: usize, j: usize) -> Complex64 {
    let separation = i.abs_diff(j) as f64;
    if separation == 0.0 || bin == 0 {
        return Complex64::ONE;
    }
    // Snap the cosine to zero within 1e-15 rad of a quarter turn so the
    // crosswind coherence is exactly real.
    let cos_theta = {
        let c = params.doa_rad.cos();
        if c.abs() < 1e-15 {
            0.0
        } else {
            c
        }
    };
    let alpha = params.alpha_longitudinal * cos_theta.abs()
        + params.alpha_lateral * params.doa_rad.sin().abs();
    let uc = params.convective_speed_mps();
    let scale = params.angular_frequency(bin) * params.mic_spacing_m * separation / uc;
    let magnitude = (-alpha * scale).exp();
    let phase = scale * cos_theta;
    // `+ 0.0` normalizes the negative zero that negating a zero phase leaves.
    let signed_phase = (if i >= j { phase } else { -phase }) + 0.0;
    Complex64::from_polar(magnitude, signed_phase)
}

/// The `N x N` coherence matrix at bin `k` (time-invariant; Hermitian with
/// unit diagonal by construction).
pub fn coherence_matrix(params: &CorcosParams, bin: usize) -> ComplexMatrix {
    let n = params.num_channels;
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = coherence_pair(params, bin, i, j);
        }
    }
    m
}

/// Per-bin coherence matrices and their Cholesky mixing factors.
#[derive(Debug, Clone)]
pub struct CoherenceMatrixSet {
    matrices: Vec<ComplexMatrix>,
    factors: Vec<ComplexMatrix>,
    regularization: Vec<f64>,
    fft_length: usize,
    sample_rate_hz: f64,
}

impl CoherenceMatrixSet {
    pub fn num_bins(&self) -> usize {
        self.matrices.len()
    }

    pub fn num_channels(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn fft_length(&self) -> usize {
        self.fft_length
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn matrix(&self, bin: usize) -> &ComplexMatrix {
        &self.matrices[bin]
    }

    /// Upper-triangular `C(k)` with `C^H(k) C(k) = Γ_reg(k)`.
    pub fn factor(&self, bin: usize) -> &ComplexMatrix {
        &self.factors[bin]
    }

    /// Diagonal load that bin `k` needed (0 for cleanly factorizable bins).
    pub fn regularization(&self, bin: usize) -> f64 {
        self.regularization[bin]
    }

    /// The regularized matrix the factor reproduces.
    pub fn regularized_matrix(&self, bin: usize) -> ComplexMatrix {
        regularize(&self.matrices[bin], self.regularization[bin])
    }
}

/// Build `Γ(k)` and `C(k)` for every bin `k = 0..=K/2`.
pub fn build_matrix_set(params: &CorcosParams) -> Result<CoherenceMatrixSet> {
    params.validate()?;
    let bins = params.num_bins();
    let mut matrices = Vec::with_capacity(bins);
    let mut factors = Vec::with_capacity(bins);
    let mut regularization = Vec::with_capacity(bins);
    for k in 0..bins {
        let gamma = coherence_matrix(params, k);
        let f = cholesky_upper(&gamma, 0.0)
            .map_err(|e| Error::model(format!("bin {k}: {e}")))?;
        matrices.push(gamma);
        factors.push(f.upper);
        regularization.push(f.regularization);
    }
    Ok(CoherenceMatrixSet {
        matrices,
        factors,
        regularization,
        fft_length: params.fft_length,
        sample_rate_hz: params.sample_rate_hz,
    })
}

//! Shared fixtures for the pipeline benchmarks.

use windfield::corcos::CorcosParams;
use windfield::engine::SimulationConfig;
use windfield::excitation::ExcitationCodebook;
use windfield::filter::{fit_ar_to_psd, TargetPsd};
use windfield::gain::GainModel;
use windfield::window::WindowSpec;

/// Default-parameter crosswind configuration used by all benchmarks.
pub fn bench_config(num_channels: usize, duration_s: f64) -> SimulationConfig {
    let ar_coeffs = fit_ar_to_psd(&TargetPsd::default(), 5, 16000.0, 65536)
        .expect("default target fits")
        .0;
    SimulationConfig {
        corcos: CorcosParams {
            mic_spacing_m: 0.004,
            freefield_speed_mps: 1.8,
            convective_ratio: 0.8,
            doa_rad: std::f64::consts::FRAC_PI_2,
            alpha_longitudinal: 0.125,
            alpha_lateral: 0.7,
            sample_rate_hz: 16000.0,
            fft_length: 2048,
            num_channels,
        },
        gain: GainModel::default(),
        codebook: ExcitationCodebook::synthetic_default(0.5, 16, 8000).expect("codebook"),
        ar_coeffs,
        window: WindowSpec::hann_75(2048).expect("window"),
        duration_s,
        master_seed: 0xBE7C,
    }
}

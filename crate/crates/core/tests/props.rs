//! Property tests for the crate-wide invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use windfield::cholesky::{cholesky_upper, ComplexMatrix};
use windfield::corcos::{coherence_matrix, coherence_pair, CorcosParams};
use windfield::gain::smooth_gain;
use windfield::rng::{gaussian_noise, RngStream};
use windfield::stft::{istft, stft};
use windfield::window::{WindowKind, WindowSpec};
use windfield::MultichannelBuffer;

fn arb_params(n: usize) -> impl Strategy<Value = CorcosParams> {
    (
        1e-4..0.1f64,   // spacing
        0.5..10.0f64,   // speed
        0.0..std::f64::consts::TAU, // doa
        0.01..2.0f64,   // alpha longitudinal
        0.01..2.0f64,   // alpha lateral
    )
        .prop_map(move |(d, u, doa, a1, a2)| CorcosParams {
            mic_spacing_m: d,
            freefield_speed_mps: u,
            convective_ratio: 0.8,
            doa_rad: doa,
            alpha_longitudinal: a1,
            alpha_lateral: a2,
            sample_rate_hz: 16000.0,
            fft_length: 256,
            num_channels: n,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stft_round_trip_over_cola_configs(
        seed in 0u64..1000,
        len in 600usize..5000,
        win_pow in 5u32..9,
        quarter_hop in proptest::bool::ANY,
        pad_fft in proptest::bool::ANY,
    ) {
        let window_len = 1usize << win_pow;
        let hop = if quarter_hop { window_len / 4 } else { window_len / 2 };
        let spec = WindowSpec::new(window_len, hop, WindowKind::Hann).unwrap();
        let fft_len = if pad_fft { 2 * window_len } else { window_len };
        let x = gaussian_noise(&RngStream::new(seed, 0), len);
        let buf = MultichannelBuffer::new(vec![x], 16000.0).unwrap();
        let back = istft(&stft(&buf, &spec, fft_len).unwrap()).unwrap();
        let num: f64 = buf.channel(0).iter().zip(back.channel(0))
            .map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = buf.channel(0).iter().map(|a| a * a).sum();
        prop_assert!((num / den).sqrt() < 1e-10);
    }

    #[test]
    fn coherence_pairs_are_hermitian_and_bounded(params in arb_params(5), k in 0usize..=128) {
        for i in 0..5 {
            for j in 0..5 {
                let gij = coherence_pair(&params, k, i, j);
                let gji = coherence_pair(&params, k, j, i);
                prop_assert!((gij - gji.conj()).norm() < 1e-14);
                prop_assert!(gij.norm() <= 1.0 + 1e-12);
            }
        }
        let m = coherence_matrix(&params, k);
        prop_assert!(m.is_hermitian(0.0));
    }

    #[test]
    fn coherence_magnitude_decays_with_distance_and_bin(params in arb_params(2), k in 1usize..=127) {
        // Strictly decreasing until the exponential underflows.
        let g = coherence_pair(&params, k, 0, 1).norm();
        let next = coherence_pair(&params, k + 1, 0, 1).norm();
        let wider = CorcosParams { mic_spacing_m: params.mic_spacing_m * 2.0, ..params };
        let far = coherence_pair(&wider, k, 0, 1).norm();
        if g > 1e-300 {
            prop_assert!(next < g);
            prop_assert!(far < g);
        } else {
            prop_assert!(next <= g);
            prop_assert!(far <= g);
        }
    }

    #[test]
    fn cholesky_reconstructs_model_matrices(params in arb_params(4), k in 0usize..=128) {
        let gamma = coherence_matrix(&params, k);
        let f = cholesky_upper(&gamma, 0.0).unwrap();
        let reg = windfield::cholesky::regularize(&gamma, f.regularization);
        prop_assert!(f.upper.adjoint_times_self().frobenius_distance(&reg) <= 1e-10);
        // Factorization is deterministic.
        let f2 = cholesky_upper(&gamma, 0.0).unwrap();
        prop_assert!(f.upper == f2.upper);
    }

    #[test]
    fn cholesky_reconstructs_random_hermitian_pd(seed in 0u64..500, n in 2usize..6) {
        // Build A = B^H B + I from a random complex B: Hermitian PD.
        let raw = gaussian_noise(&RngStream::new(seed, 9), 2 * n * n);
        let mut b = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = Complex64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1]);
            }
        }
        let mut a = b.adjoint_times_self();
        for i in 0..n {
            a[(i, i)] += Complex64::ONE;
        }
        let f = cholesky_upper(&a, 0.0).unwrap();
        prop_assert_eq!(f.regularization, 0.0);
        prop_assert!(f.upper.adjoint_times_self().frobenius_distance(&a) <= 1e-10);
    }

    #[test]
    fn smoothing_stays_within_track_bounds(
        track in proptest::collection::vec(0.0..5.0f64, 1..40),
        frame_len in 1usize..30,
        half_len in 0usize..40,
    ) {
        let smooth_len = 2 * half_len + 1;
        let out = smooth_gain(&track, frame_len, smooth_len).unwrap();
        prop_assert_eq!(out.len(), track.len() * frame_len);
        let lo = track.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = track.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for &v in &out {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        }
    }
}

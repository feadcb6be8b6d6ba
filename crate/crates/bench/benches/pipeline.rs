use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use windfield::analysis::estimate_coherence;
use windfield::corcos::build_matrix_set;
use windfield::engine::{apply_spatial_mixing, channel_streams, generate_uncorrelated_channels};
use windfield::channel::generate_single_channel;
use windfield::rng::{gaussian_noise, RngStream};
use windfield::stft::{istft, stft};
use windfield::window::WindowSpec;
use windfield::MultichannelBuffer;

use windfield_bench::bench_config;

fn bench_stft_round_trip(c: &mut Criterion) {
    let spec = WindowSpec::hann_75(2048).unwrap();
    let x = gaussian_noise(&RngStream::new(1, 0), 16000);
    let buf = MultichannelBuffer::new(vec![x], 16000.0).unwrap();
    c.bench_function("stft_istft_1s", |b| {
        b.iter(|| {
            let frames = stft(black_box(&buf), &spec, 2048).unwrap();
            black_box(istft(&frames).unwrap())
        })
    });
}

fn bench_matrix_set(c: &mut Criterion) {
    let config = bench_config(4, 10.0);
    c.bench_function("build_matrix_set_n4_k2048", |b| {
        b.iter(|| black_box(build_matrix_set(black_box(&config.corcos)).unwrap()))
    });
}

fn bench_single_channel(c: &mut Criterion) {
    let config = bench_config(1, 5.0);
    let streams = channel_streams(config.master_seed, 0);
    c.bench_function("single_channel_5s", |b| {
        b.iter(|| {
            black_box(
                generate_single_channel(
                    &config.gain,
                    &config.codebook,
                    &config.ar_coeffs,
                    config.duration_s,
                    config.corcos.sample_rate_hz,
                    &streams,
                    None,
                )
                .unwrap(),
            )
        })
    });
}

fn bench_mixing(c: &mut Criterion) {
    let config = bench_config(2, 5.0);
    let premix = generate_uncorrelated_channels(&config).unwrap();
    let set = build_matrix_set(&config.corcos).unwrap();
    c.bench_function("apply_spatial_mixing_n2_5s", |b| {
        b.iter(|| black_box(apply_spatial_mixing(&premix, &set, &config.window).unwrap()))
    });
}

fn bench_estimation(c: &mut Criterion) {
    let config = bench_config(2, 10.0);
    let premix = generate_uncorrelated_channels(&config).unwrap();
    c.bench_function("estimate_coherence_n2_10s", |b| {
        b.iter(|| black_box(estimate_coherence(&premix, &config.window, 2048).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_stft_round_trip,
    bench_matrix_set,
    bench_single_channel,
    bench_mixing,
    bench_estimation
);
criterion_main!(benches);

//! WAV input/output.
//!
//! Default output format is 32-bit float RIFF WAVE (quantization would
//! perturb coherence estimates); 16-bit PCM with TPDF dithering is opt-in.

use std::path::{Path, PathBuf};

use rand::Rng;

use windfield::error::{Error, Result};
use windfield::rng::RngStream;
use windfield::MultichannelBuffer;

/// Reserved stream id for the PCM dither noise.
pub const DITHER_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Float32,
    /// 16-bit PCM with triangular dither, seeded for reproducibility.
    Pcm16 { dither_seed: u64 },
}

fn wav_spec(channels: u16, sample_rate: u32, format: OutputFormat) -> hound::WavSpec {
    match format {
        OutputFormat::Float32 => hound::WavSpec {
            channels,
            sample_rate,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        },
        OutputFormat::Pcm16 { .. } => hound::WavSpec {
            channels,
            sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        },
    }
}

fn to_io(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(other.to_string())),
    }
}

/// Write all channels interleaved into one WAV file (channel order =
/// microphone order of the array).
pub fn write_wav(path: &Path, buffer: &MultichannelBuffer, format: OutputFormat) -> Result<()> {
    let spec = wav_spec(
        buffer.num_channels() as u16,
        buffer.sample_rate_hz().round() as u32,
        format,
    );
    let mut writer = hound::WavWriter::create(path, spec).map_err(to_io)?;
    match format {
        OutputFormat::Float32 => {
            for n in 0..buffer.len() {
                for c in 0..buffer.num_channels() {
                    writer
                        .write_sample(buffer.channel(c)[n] as f32)
                        .map_err(to_io)?;
                }
            }
        }
        OutputFormat::Pcm16 { dither_seed } => {
            let mut rng = RngStream::new(dither_seed, DITHER_STREAM).rng();
            for n in 0..buffer.len() {
                for c in 0..buffer.num_channels() {
                    // TPDF dither of one LSB peak amplitude before rounding.
                    let dither: f64 = rng.random::<f64>() - rng.random::<f64>();
                    let v = buffer.channel(c)[n] * 32767.0 + dither;
                    writer
                        .write_sample(v.round().clamp(-32768.0, 32767.0) as i16)
                        .map_err(to_io)?;
                }
            }
        }
    }
    writer.finalize().map_err(to_io)
}

/// Split-mono naming: `out.wav` becomes `out.ch1.wav`, `out.ch2.wav`, ...
pub fn split_path(path: &Path, channel: usize) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "wav".to_string());
    path.with_file_name(format!("{stem}.ch{}.{ext}", channel + 1))
}

/// Write one mono WAV per channel; returns the written paths.
pub fn write_wav_split(
    path: &Path,
    buffer: &MultichannelBuffer,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for c in 0..buffer.num_channels() {
        let mono = MultichannelBuffer::new(
            vec![buffer.channel(c).to_vec()],
            buffer.sample_rate_hz(),
        )?;
        let p = split_path(path, c);
        write_wav(&p, &mono, format)?;
        paths.push(p);
    }
    Ok(paths)
}

/// Read a WAV file (float32 or int16) into a buffer.
pub fn read_wav(path: &Path) -> Result<MultichannelBuffer> {
    let mut reader = hound::WavReader::open(path).map_err(to_io)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Argument("wav file has no channels".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(to_io)?,
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32767.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(to_io)?,
        (fmt, bits) => {
            return Err(Error::Argument(format!(
                "unsupported wav format: {bits}-bit {fmt:?}"
            )))
        }
    };
    let frames = interleaved.len() / channels;
    let mut chans = vec![Vec::with_capacity(frames); channels];
    for (n, v) in interleaved.into_iter().enumerate() {
        chans[n % channels].push(v);
    }
    // Drop a trailing partial frame if the file is malformed.
    let min_len = chans.iter().map(Vec::len).min().unwrap_or(0);
    for c in &mut chans {
        c.truncate(min_len);
    }
    MultichannelBuffer::new(chans, spec.sample_rate as f64)
}

/// Load codebook entries from a directory of mono WAV snippets
/// (sorted by file name for reproducibility).
pub fn load_codebook_dir(dir: &Path) -> Result<Vec<Vec<f64>>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .map(|e| e.eq_ignore_ascii_case("wav"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "codebook directory {} contains no wav files",
            dir.display()
        )));
    }
    let mut entries = Vec::with_capacity(paths.len());
    for p in paths {
        let buf = read_wav(&p)?;
        if buf.num_channels() != 1 {
            return Err(Error::Config(format!(
                "codebook snippet {} must be mono, has {} channels",
                p.display(),
                buf.num_channels()
            )));
        }
        entries.push(buf.into_channels().pop().unwrap());
    }
    Ok(entries)
}

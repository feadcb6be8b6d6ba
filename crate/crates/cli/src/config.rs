//! Flat key-value run configuration.
//!
//! The file format is one `key = value` per line with `#` comments. Unknown
//! keys are rejected; every key has a documented default, printable via
//! `--dump-config`, and re-feeding a dump reproduces the run exactly.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use windfield::corcos::CorcosParams;
use windfield::engine::SimulationConfig;
use windfield::error::{Error, Result};
use windfield::excitation::{ExcitationCodebook, DEFAULT_CODEBOOK_SEED};
use windfield::filter::{fit_ar_to_psd, TargetPsd};
use windfield::gain::{GainModel, MarkovGainModel, WeibullParams};
use windfield::window::{WindowKind, WindowSpec};

/// Grid length used when fitting default AR coefficients.
const AR_FIT_GRID: usize = 65536;
/// Order of the spectral-shaping all-pole filter.
const AR_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // scene
    pub channels: usize,
    pub spacing_m: f64,
    pub speed_mps: f64,
    pub doa_rad: f64,
    pub convective_ratio: f64,
    pub alpha_longitudinal: f64,
    pub alpha_lateral: f64,
    // stft grid
    pub sample_rate_hz: f64,
    pub fft_length: usize,
    pub window_length: usize,
    pub hop_length: usize,
    // run
    pub duration_s: f64,
    pub seed: u64,
    // temporal gain model
    pub gain_frame_samples: usize,
    pub markov_gains: [f64; 3],
    pub markov_transitions: [f64; 9],
    pub markov_initial_state: usize,
    pub weibull_shape: f64,
    pub weibull_scale: f64,
    pub longterm_smooth_samples: usize,
    pub shortterm_smooth_samples: usize,
    // excitation
    pub codebook_mix: f64,
    pub codebook_entries: usize,
    pub codebook_entry_samples: usize,
    pub codebook_seed: u64,
    pub codebook_dir: Option<PathBuf>,
    // spectral shaping
    pub ar_coeffs: Option<Vec<f64>>,
    pub ar_corner_hz: f64,
    pub ar_slope_db_per_octave: f64,
    pub ar_floor_db: f64,
    // analysis
    pub band_limit_hz: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            channels: 2,
            spacing_m: 0.004,
            speed_mps: 1.8,
            doa_rad: std::f64::consts::FRAC_PI_2,
            convective_ratio: 0.8,
            alpha_longitudinal: 0.125,
            alpha_lateral: 0.7,
            sample_rate_hz: 16000.0,
            fft_length: 2048,
            window_length: 2048,
            hop_length: 512,
            duration_s: 600.0,
            seed: 1,
            gain_frame_samples: 160,
            markov_gains: [0.1, 0.45, 1.0],
            markov_transitions: [0.98, 0.01, 0.01, 0.01, 0.98, 0.01, 0.01, 0.01, 0.98],
            markov_initial_state: 1,
            weibull_shape: 1.5,
            weibull_scale: 1.0,
            longterm_smooth_samples: 8001,
            shortterm_smooth_samples: 481,
            codebook_mix: 0.5,
            codebook_entries: 16,
            codebook_entry_samples: 8000,
            codebook_seed: DEFAULT_CODEBOOK_SEED,
            codebook_dir: None,
            ar_coeffs: None,
            ar_corner_hz: 300.0,
            ar_slope_db_per_octave: -18.0,
            ar_floor_db: -60.0,
            band_limit_hz: 1000.0,
        }
    }
}

/// Angles accept plain radians, a `rad` suffix, or a `deg` suffix
/// (`1.5708`, `90deg`, `0.5rad`).
pub fn parse_angle(raw: &str) -> Result<f64> {
    let s = raw.trim();
    let (num, factor) = if let Some(stripped) = s.strip_suffix("deg") {
        (stripped, std::f64::consts::PI / 180.0)
    } else if let Some(stripped) = s.strip_suffix("rad") {
        (stripped, 1.0)
    } else {
        (s, 1.0)
    };
    num.trim()
        .parse::<f64>()
        .map(|v| v * factor)
        .map_err(|_| Error::Config(format!("cannot parse angle '{raw}'")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse number '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse integer '{v}'")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse integer '{v}'")))
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|item| parse_f64(key, item))
        .collect()
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "channels" => self.channels = parse_usize(key, value)?,
            "spacing_m" => self.spacing_m = parse_f64(key, value)?,
            "speed_mps" => self.speed_mps = parse_f64(key, value)?,
            "doa" => self.doa_rad = parse_angle(value)?,
            "convective_ratio" => self.convective_ratio = parse_f64(key, value)?,
            "alpha_longitudinal" => self.alpha_longitudinal = parse_f64(key, value)?,
            "alpha_lateral" => self.alpha_lateral = parse_f64(key, value)?,
            "sample_rate_hz" => self.sample_rate_hz = parse_f64(key, value)?,
            "fft_length" => self.fft_length = parse_usize(key, value)?,
            "window_length" => self.window_length = parse_usize(key, value)?,
            "hop_length" => self.hop_length = parse_usize(key, value)?,
            "duration_s" => self.duration_s = parse_f64(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "gain_frame_samples" => self.gain_frame_samples = parse_usize(key, value)?,
            "markov_gains" => {
                let v = parse_f64_list(key, value)?;
                self.markov_gains = v.try_into().map_err(|_| {
                    Error::Config(format!("key '{key}': expected 3 comma-separated gains"))
                })?;
            }
            "markov_transitions" => {
                let v = parse_f64_list(key, value)?;
                self.markov_transitions = v.try_into().map_err(|_| {
                    Error::Config(format!(
                        "key '{key}': expected 9 row-major probabilities"
                    ))
                })?;
            }
            "markov_initial_state" => self.markov_initial_state = parse_usize(key, value)?,
            "weibull_shape" => self.weibull_shape = parse_f64(key, value)?,
            "weibull_scale" => self.weibull_scale = parse_f64(key, value)?,
            "longterm_smooth_samples" => {
                self.longterm_smooth_samples = parse_usize(key, value)?
            }
            "shortterm_smooth_samples" => {
                self.shortterm_smooth_samples = parse_usize(key, value)?
            }
            "codebook_mix" => self.codebook_mix = parse_f64(key, value)?,
            "codebook_entries" => self.codebook_entries = parse_usize(key, value)?,
            "codebook_entry_samples" => {
                self.codebook_entry_samples = parse_usize(key, value)?
            }
            "codebook_seed" => self.codebook_seed = parse_u64(key, value)?,
            "codebook_dir" => {
                let v = value.trim();
                self.codebook_dir = if v.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(v))
                };
            }
            "ar_coeffs" => {
                let v = value.trim();
                self.ar_coeffs = if v.is_empty() {
                    None
                } else {
                    Some(parse_f64_list(key, v)?)
                };
            }
            "ar_corner_hz" => self.ar_corner_hz = parse_f64(key, value)?,
            "ar_slope_db_per_octave" => {
                self.ar_slope_db_per_octave = parse_f64(key, value)?
            }
            "ar_floor_db" => self.ar_floor_db = parse_f64(key, value)?,
            "band_limit_hz" => self.band_limit_hz = parse_f64(key, value)?,
            _ => return Err(Error::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Parse a config file body, rejecting unknown keys and duplicate
    /// definitions.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: key '{key}' defined twice",
                    lineno + 1
                )));
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    #[cfg(test)]
    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// Effective AR coefficients: explicit ones, or the Levinson-Durbin fit
    /// of the configured target envelope.
    pub fn effective_ar_coeffs(&self) -> Result<Vec<f64>> {
        match &self.ar_coeffs {
            Some(c) => Ok(c.clone()),
            None => {
                let target = TargetPsd {
                    corner_hz: self.ar_corner_hz,
                    slope_db_per_octave: self.ar_slope_db_per_octave,
                    floor_db: self.ar_floor_db,
                };
                Ok(fit_ar_to_psd(&target, AR_ORDER, self.sample_rate_hz, AR_FIT_GRID)?.0)
            }
        }
    }

    pub fn corcos_params(&self) -> CorcosParams {
        CorcosParams {
            mic_spacing_m: self.spacing_m,
            freefield_speed_mps: self.speed_mps,
            convective_ratio: self.convective_ratio,
            doa_rad: self.doa_rad,
            alpha_longitudinal: self.alpha_longitudinal,
            alpha_lateral: self.alpha_lateral,
            sample_rate_hz: self.sample_rate_hz,
            fft_length: self.fft_length,
            num_channels: self.channels,
        }
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        WindowSpec::new(self.window_length, self.hop_length, WindowKind::Hann)
    }

    pub fn gain_model(&self) -> GainModel {
        let t = &self.markov_transitions;
        GainModel {
            markov: MarkovGainModel {
                state_gains: self.markov_gains,
                transition_matrix: [
                    [t[0], t[1], t[2]],
                    [t[3], t[4], t[5]],
                    [t[6], t[7], t[8]],
                ],
                initial_state: self.markov_initial_state,
                frame_len_samples: self.gain_frame_samples,
            },
            weibull: WeibullParams {
                shape: self.weibull_shape,
                scale: self.weibull_scale,
                frame_len_samples: self.gain_frame_samples,
            },
            longterm_smooth_len: self.longterm_smooth_samples,
            shortterm_smooth_len: self.shortterm_smooth_samples,
        }
    }

    /// Assemble the full simulation configuration. `codebook_entries_override`
    /// carries entries loaded from `codebook_dir` when that is set.
    pub fn simulation_config(
        &self,
        codebook_entries_override: Option<Vec<Vec<f64>>>,
    ) -> Result<SimulationConfig> {
        let codebook = match codebook_entries_override {
            Some(entries) => ExcitationCodebook::from_entries(entries, self.codebook_mix)?,
            None => ExcitationCodebook::synthetic_with_seed(
                self.codebook_mix,
                self.codebook_entries,
                self.codebook_entry_samples,
                self.codebook_seed,
            )?,
        };
        let config = SimulationConfig {
            corcos: self.corcos_params(),
            gain: self.gain_model(),
            codebook,
            ar_coeffs: self.effective_ar_coeffs()?,
            window: self.window_spec()?,
            duration_s: self.duration_s,
            master_seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Full effective configuration as reparseable `key = value` text.
    /// AR coefficients are printed in their effective (fitted) form.
    pub fn dump(&self) -> Result<String> {
        let mut s = String::new();
        let list = |values: &[f64]| -> String {
            values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(s, "# scene").unwrap();
        writeln!(s, "channels = {}", self.channels).unwrap();
        writeln!(s, "spacing_m = {}", self.spacing_m).unwrap();
        writeln!(s, "speed_mps = {}", self.speed_mps).unwrap();
        writeln!(s, "doa = {}", self.doa_rad).unwrap();
        writeln!(s, "convective_ratio = {}", self.convective_ratio).unwrap();
        writeln!(s, "alpha_longitudinal = {}", self.alpha_longitudinal).unwrap();
        writeln!(s, "alpha_lateral = {}", self.alpha_lateral).unwrap();
        writeln!(s, "\n# stft grid").unwrap();
        writeln!(s, "sample_rate_hz = {}", self.sample_rate_hz).unwrap();
        writeln!(s, "fft_length = {}", self.fft_length).unwrap();
        writeln!(s, "window_length = {}", self.window_length).unwrap();
        writeln!(s, "hop_length = {}", self.hop_length).unwrap();
        writeln!(s, "\n# run").unwrap();
        writeln!(s, "duration_s = {}", self.duration_s).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "\n# temporal gains").unwrap();
        writeln!(s, "gain_frame_samples = {}", self.gain_frame_samples).unwrap();
        writeln!(s, "markov_gains = {}", list(&self.markov_gains)).unwrap();
        writeln!(s, "markov_transitions = {}", list(&self.markov_transitions)).unwrap();
        writeln!(s, "markov_initial_state = {}", self.markov_initial_state).unwrap();
        writeln!(s, "weibull_shape = {}", self.weibull_shape).unwrap();
        writeln!(s, "weibull_scale = {}", self.weibull_scale).unwrap();
        writeln!(s, "longterm_smooth_samples = {}", self.longterm_smooth_samples).unwrap();
        writeln!(s, "shortterm_smooth_samples = {}", self.shortterm_smooth_samples).unwrap();
        writeln!(s, "\n# excitation").unwrap();
        writeln!(s, "codebook_mix = {}", self.codebook_mix).unwrap();
        writeln!(s, "codebook_entries = {}", self.codebook_entries).unwrap();
        writeln!(s, "codebook_entry_samples = {}", self.codebook_entry_samples).unwrap();
        writeln!(s, "codebook_seed = {}", self.codebook_seed).unwrap();
        if let Some(dir) = &self.codebook_dir {
            writeln!(s, "codebook_dir = {}", dir.display()).unwrap();
        }
        writeln!(s, "\n# spectral shaping").unwrap();
        writeln!(s, "ar_coeffs = {}", list(&self.effective_ar_coeffs()?)).unwrap();
        writeln!(s, "ar_corner_hz = {}", self.ar_corner_hz).unwrap();
        writeln!(s, "ar_slope_db_per_octave = {}", self.ar_slope_db_per_octave).unwrap();
        writeln!(s, "ar_floor_db = {}", self.ar_floor_db).unwrap();
        writeln!(s, "\n# analysis").unwrap();
        writeln!(s, "band_limit_hz = {}", self.band_limit_hz).unwrap();
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_a_valid_simulation() {
        let mut c = RunConfig::default();
        c.duration_s = 1.0;
        c.simulation_config(None).unwrap();
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let err = RunConfig::from_text("speling_m = 0.004").unwrap_err();
        assert!(err.to_string().contains("speling_m"));
    }

    #[test]
    fn duplicate_key_rejected() {
        assert!(RunConfig::from_text("seed = 1\nseed = 2").is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let c = RunConfig::from_text("# hello\n\nseed = 7 # trailing\n").unwrap();
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn angle_suffixes() {
        assert!((parse_angle("90deg").unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((parse_angle("0.5rad").unwrap() - 0.5).abs() < 1e-15);
        assert!((parse_angle("1.25").unwrap() - 1.25).abs() < 1e-15);
        assert!(parse_angle("ninety").is_err());
    }

    #[test]
    fn dump_round_trips() {
        let mut c = RunConfig::default();
        c.set("doa", "0deg").unwrap();
        c.set("channels", "4").unwrap();
        c.set("duration_s", "12.5").unwrap();
        let dump = c.dump().unwrap();
        let reparsed = RunConfig::from_text(&dump).unwrap();
        // The dump pins the fitted AR coefficients explicitly.
        assert_eq!(reparsed.ar_coeffs.as_deref().unwrap(), c.effective_ar_coeffs().unwrap());
        let mut c_explicit = c.clone();
        c_explicit.ar_coeffs = Some(c.effective_ar_coeffs().unwrap());
        assert_eq!(reparsed, c_explicit);
        // Re-dumping is a fixed point.
        assert_eq!(reparsed.dump().unwrap(), dump);
    }

    #[test]
    fn markov_list_lengths_checked() {
        assert!(RunConfig::from_text("markov_gains = 1,2").is_err());
        assert!(RunConfig::from_text("markov_transitions = 1,0,0,0,1,0").is_err());
    }
}

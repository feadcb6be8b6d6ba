//! `windfield` command line: generate | analyze | validate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use windfield_cli::config::{parse_angle, RunConfig};
use windfield_cli::wav::{self, OutputFormat};
use windfield::analysis::{coherence_report, estimate_coherence, nmse, CoherenceEstimate};
use windfield::engine::generate;
use windfield::error::{Error, Result};

/// Acceptance bound on the per-pair normalized MSE.
const NMSE_LIMIT: f64 = 0.05;
/// Acceptance bound on the residual imaginary part for crosswind scenes.
const CROSSWIND_IM_LIMIT: f64 = 0.05;

#[derive(Parser)]
#[command(
    name = "windfield",
    version,
    about = "Multi-channel wind-noise generator with a Corcos spatial-coherence constraint"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an N-channel wind-noise WAV file.
    Generate(GenerateArgs),
    /// Estimate the coherence of a WAV file and compare it to the model.
    Analyze(AnalyzeArgs),
    /// Run the built-in validation scenes end to end.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file: one `key = value` per line, `#` comments.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable), e.g. --set alpha_lateral=0.7
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the full effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            config.apply_text(&text)?;
        }
        for assignment in &self.set {
            let (key, value) = assignment.split_once('=').ok_or_else(|| {
                Error::Config(format!("--set expects KEY=VALUE, got '{assignment}'"))
            })?;
            config.set(key.trim(), value)?;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Master seed; fixes every random stream of the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Signal duration in seconds.
    #[arg(long, value_name = "SECONDS")]
    duration: Option<f64>,
    /// Number of microphones in the uniform linear array.
    #[arg(long, value_name = "N")]
    channels: Option<usize>,
    /// Adjacent microphone spacing in meters.
    #[arg(long, value_name = "METERS")]
    spacing: Option<f64>,
    /// Free-field wind speed in m/s.
    #[arg(long, value_name = "MPS")]
    speed: Option<f64>,
    /// Wind direction: radians, or with a deg/rad suffix ("90deg").
    #[arg(long, value_name = "ANGLE")]
    doa: Option<String>,
    /// Output WAV path (32-bit float, one file with N channels).
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Write one mono WAV per channel (out.ch1.wav, ...).
    #[arg(long)]
    split: bool,
    /// Write 16-bit PCM with TPDF dithering instead of 32-bit float.
    #[arg(long)]
    pcm16: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input multichannel WAV to analyze.
    input: PathBuf,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Report CSV path (default: alongside the input).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Upper analysis frequency in Hz.
    #[arg(long, value_name = "HZ")]
    band_limit: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Duration per scene in seconds (default from the config: 600).
    #[arg(long, value_name = "SECONDS")]
    duration: Option<f64>,
    /// Print the scene matrix without running anything.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Argument(_) => ExitCode::from(2),
                Error::Io(_) => ExitCode::from(3),
                Error::Model(_) => ExitCode::from(4),
            }
        }
    }
}

fn build_config(args: &GenerateArgs) -> Result<RunConfig> {
    let mut config = args.cfg.load()?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(d) = args.duration {
        config.duration_s = d;
    }
    if let Some(n) = args.channels {
        config.channels = n;
    }
    if let Some(d) = args.spacing {
        config.spacing_m = d;
    }
    if let Some(u) = args.speed {
        config.speed_mps = u;
    }
    if let Some(doa) = &args.doa {
        config.doa_rad = parse_angle(doa)?;
    }
    Ok(config)
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let config = build_config(&args)?;
    if args.cfg.dump_config {
        print!("{}", config.dump()?);
        return Ok(ExitCode::SUCCESS);
    }
    let output = args
        .output
        .as_ref()
        .ok_or_else(|| Error::Argument("--output is required".into()))?;

    let codebook_entries = match &config.codebook_dir {
        Some(dir) => Some(wav::load_codebook_dir(dir)?),
        None => None,
    };
    let sim = config.simulation_config(codebook_entries)?;
    let result = generate(&sim)?;

    let format = if args.pcm16 {
        OutputFormat::Pcm16 {
            dither_seed: config.seed,
        }
    } else {
        OutputFormat::Float32
    };
    if args.split {
        let paths = wav::write_wav_split(output, &result.buffer, format)?;
        for p in &paths {
            println!("wrote {}", p.display());
        }
    } else {
        wav::write_wav(output, &result.buffer, format)?;
        println!("wrote {}", output.display());
    }
    println!("master_seed = {}", config.seed);
    println!("normalization_gain = {}", result.normalization_gain);
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let mut config = args.cfg.load()?;
    if let Some(b) = args.band_limit {
        config.band_limit_hz = b;
    }
    if args.cfg.dump_config {
        print!("{}", config.dump()?);
        return Ok(ExitCode::SUCCESS);
    }

    let buffer = wav::read_wav(&args.input)?;
    if buffer.num_channels() != config.channels {
        return Err(Error::Argument(format!(
            "input has {} channels but the configuration expects {}",
            buffer.num_channels(),
            config.channels
        )));
    }
    if buffer.sample_rate_hz() != config.sample_rate_hz {
        return Err(Error::Argument(format!(
            "input sample rate {} does not match the configured {}",
            buffer.sample_rate_hz(),
            config.sample_rate_hz
        )));
    }

    let estimate = estimate_coherence(&buffer, &config.window_spec()?, config.fft_length)?;
    let report = coherence_report(&estimate, &config.corcos_params(), config.band_limit_hz)?;

    let report_path = args
        .report
        .unwrap_or_else(|| args.input.with_extension("coherence.csv"));
    let file = std::fs::File::create(&report_path)?;
    report.write_csv(std::io::BufWriter::new(file))?;

    for s in &report.summaries {
        println!(
            "nmse pair ({},{}) = {}",
            s.pair.0 + 1,
            s.pair.1 + 1,
            s.value
        );
    }
    println!("report written to {}", report_path.display());
    Ok(ExitCode::SUCCESS)
}

/// One validation scene: scene parameters plus which checks run on it.
struct Scene {
    name: &'static str,
    description: &'static str,
    channels: usize,
    spacing_m: f64,
    speed_mps: f64,
    doa_rad: f64,
    check_crosswind_imag: bool,
    check_separation_ordering: bool,
}

const SCENES: [Scene; 3] = [
    Scene {
        name: "scene-a-crosswind",
        description: "crosswind, U=1.8 m/s, d=4 mm, N=2",
        channels: 2,
        spacing_m: 0.004,
        speed_mps: 1.8,
        doa_rad: std::f64::consts::FRAC_PI_2,
        check_crosswind_imag: true,
        check_separation_ordering: false,
    },
    Scene {
        name: "scene-b-downwind",
        description: "downwind, U=2.8 m/s, d=20 mm, N=2",
        channels: 2,
        spacing_m: 0.02,
        speed_mps: 2.8,
        doa_rad: 0.0,
        check_crosswind_imag: false,
        check_separation_ordering: false,
    },
    Scene {
        name: "scene-c-four-channel",
        description: "crosswind, U=1.8 m/s, d=4 mm, N=4",
        channels: 4,
        spacing_m: 0.004,
        speed_mps: 1.8,
        doa_rad: std::f64::consts::FRAC_PI_2,
        check_crosswind_imag: false,
        check_separation_ordering: true,
    },
];

fn mean_magnitude(
    estimate: &CoherenceEstimate,
    pair: (usize, usize),
    lo_hz: f64,
    hi_hz: f64,
) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for k in 0..estimate.num_bins() {
        let f = estimate.bin_frequency_hz(k);
        if f < lo_hz || f > hi_hz {
            continue;
        }
        if let Some(g) = estimate.gamma(pair.0, pair.1, k) {
            acc += g.norm();
            count += 1;
        }
    }
    acc / count.max(1) as f64
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let mut base = args.cfg.load()?;
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    if let Some(d) = args.duration {
        base.duration_s = d;
    }
    if args.cfg.dump_config {
        print!("{}", base.dump()?);
        return Ok(ExitCode::SUCCESS);
    }

    if args.list {
        println!("validation scenes (duration {} s, seed {}):", base.duration_s, base.seed);
        for s in &SCENES {
            let mut checks = vec![format!("adjacent-pair nMSE <= {NMSE_LIMIT}")];
            if s.check_crosswind_imag {
                checks.push(format!("max |Im coherence| <= {CROSSWIND_IM_LIMIT}"));
            }
            if s.check_separation_ordering {
                checks.push("mean |gamma(1,3)| < mean |gamma(1,2)| in 50-500 Hz".into());
            }
            println!("  {} — {} — checks: {}", s.name, s.description, checks.join("; "));
        }
        return Ok(ExitCode::SUCCESS);
    }

    let mut all_pass = true;
    let mut verdict = |pass: bool, scene: &str, what: String| {
        println!("{} {scene}: {what}", if pass { "PASS" } else { "FAIL" });
        all_pass &= pass;
    };

    for scene in &SCENES {
        let mut config = base.clone();
        config.channels = scene.channels;
        config.spacing_m = scene.spacing_m;
        config.speed_mps = scene.speed_mps;
        config.doa_rad = scene.doa_rad;

        let codebook_entries = match &config.codebook_dir {
            Some(dir) => Some(wav::load_codebook_dir(dir)?),
            None => None,
        };
        let sim = config.simulation_config(codebook_entries)?;
        let result = generate(&sim)?;
        let estimate =
            estimate_coherence(&result.buffer, &config.window_spec()?, config.fft_length)?;
        let params = config.corcos_params();
        let band = Some(config.band_limit_hz);

        for j in 1..scene.channels {
            let pair = (j - 1, j);
            let value = nmse(&estimate, &params, pair, band)?;
            verdict(
                value <= NMSE_LIMIT,
                scene.name,
                format!(
                    "nmse({},{}) = {value:.5} (limit {NMSE_LIMIT})",
                    pair.0 + 1,
                    pair.1 + 1
                ),
            );
        }
        if scene.check_crosswind_imag {
            let mut worst = 0.0f64;
            for k in 0..estimate.num_bins() {
                if estimate.bin_frequency_hz(k) > config.band_limit_hz {
                    break;
                }
                if let Some(g) = estimate.gamma(0, 1, k) {
                    worst = worst.max(g.im.abs());
                }
            }
            verdict(
                worst <= CROSSWIND_IM_LIMIT,
                scene.name,
                format!("max |Im coherence| = {worst:.5} (limit {CROSSWIND_IM_LIMIT})"),
            );
        }
        if scene.check_separation_ordering {
            let near = mean_magnitude(&estimate, (0, 1), 50.0, 500.0);
            let far = mean_magnitude(&estimate, (0, 2), 50.0, 500.0);
            verdict(
                far < near,
                scene.name,
                format!("separation ordering: mean |gamma(1,3)| = {far:.4} < mean |gamma(1,2)| = {near:.4}"),
            );
        }
    }

    if all_pass {
        println!("all validation criteria passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("validation failed");
        Ok(ExitCode::from(1))
    }
}

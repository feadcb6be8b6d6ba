//! Multi-channel wind-noise synthesis and analysis.
//!
//! The library generates N-channel wind-noise signals whose temporal and
//! spectral statistics follow a source-filter model (Markov long-term gain,
//! Weibull short-term gain, codebook-weighted Gaussian excitation, AR(5)
//! spectral shaping) and whose inter-channel complex coherence follows the
//! Corcos turbulent-boundary-layer model for a uniform linear microphone
//! array. A Welch-based analysis side estimates the coherence of generated
//! (or recorded) signals and scores it against the model via a normalized
//! MSE.
//!
//! Pipeline overview:
//!
//! 1. [`engine::generate_uncorrelated_channels`] runs N single-channel
//!    generators that share one long-term gain track but use independent
//!    excitation and short-term gain streams.
//! 2. [`corcos::build_matrix_set`] evaluates the per-bin coherence matrices
//!    and their upper-triangular Cholesky factors `C(k)`.
//! 3. [`engine::apply_spatial_mixing`] multiplies every STFT coefficient
//!    vector by `C^H(k)` and resynthesizes, imposing the model coherence.
//! 4. [`analysis::estimate_coherence`] / [`analysis::nmse`] validate the
//!    result on the same STFT grid.
//!
//! All randomness flows through [`rng::RngStream`] (ChaCha12, seed plus
//! stream id), making every run bit-reproducible from one master seed.

pub mod analysis;
pub mod buffer;
pub mod channel;
pub mod cholesky;
pub mod corcos;
pub mod engine;
pub mod error;
pub mod excitation;
pub mod filter;
pub mod gain;
pub mod rng;
pub mod stft;
pub mod window;

pub use analysis::{estimate_coherence, nmse, CoherenceEstimate, CoherenceReport};
pub use buffer::MultichannelBuffer;
pub use channel::{generate_single_channel, ChannelStreams};
pub use cholesky::{cholesky_upper, CholeskyFactor, ComplexMatrix};
pub use corcos::{build_matrix_set, coherence_matrix, coherence_pair, decay_alpha,
                 CoherenceMatrixSet, CorcosParams};
pub use engine::{apply_spatial_mixing, generate, generate_uncorrelated_channels,
                 GenerationResult, SimulationConfig};
pub use error::{Error, Result};
pub use excitation::{generate_excitation, ExcitationCodebook};
pub use filter::{allpole_filter, fit_ar_to_psd, levinson_durbin, TargetPsd};
pub use gain::{simulate_long_term_gain, simulate_short_term_gain, smooth_gain, GainModel,
               LongTermTrack, MarkovGainModel, WeibullParams};
pub use rng::{gaussian_noise, RngStream};
pub use stft::{istft, stft, SpectralFrames};
pub use window::{make_window, WindowKind, WindowSpec};

//! Deterministic room-acoustics simulation for replay-attack research.
//!
//! The crate builds multichannel microphone-array recordings of genuine and
//! replayed speech. A genuine trial convolves dry speech with simulated room
//! impulse responses from a talker to an array; a replay trial first records
//! the talker through a spoofing microphone, then re-emits that capture from
//! a loudspeaker with a measured directivity pattern, in a second room.
//! Diffuse or uncorrelated noise is injected at a controlled SNR, and
//! evaluation helpers score genuine/replay trials with an interpolated
//! equal error rate.
//!
//! Modules are layered bottom-up:
//!
//! - [`dsp`]: buffers, FFT, STFT, fractional delay, resampling, SNR
//! - [`audio_io`]: WAV files and deterministic seed streams
//! - [`directivity`]: analytic and measured transducer patterns
//! - [`rir`]: shoebox image-source room impulse responses
//! - [`noise`]: omnidirectional and spatially coherent noise injection
//! - [`scenario`]: scene sampling, the three signal chains, dataset assembly
//! - [`metrics`]: equal error rate and confidence intervals
//! - [`demo`]: self-contained synthetic corpus for examples and tests
//! - [`cli`]: the command-line front end used by the `replaysim` binary

pub mod audio_io;
pub mod cli;
pub mod demo;
pub mod directivity;
pub mod dsp;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod rir;
pub mod scenario;

pub use error::{Error, Result};

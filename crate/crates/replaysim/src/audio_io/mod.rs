//! File I/O and deterministic randomness: WAV files and seeded RNG streams.
//!
//! The directivity-grid format lives in [`crate::directivity`] and the
//! manifest/config formats in [`crate::scenario`]; this module holds the
//! byte-level plumbing they share.

pub mod rng;
pub mod wav;

pub use rng::{derive_stream, RngStream};
pub use wav::{read_wav, write_wav, SampleFormat, WavFile};

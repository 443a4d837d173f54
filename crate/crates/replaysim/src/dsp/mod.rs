//! Signal-processing primitives: sample buffers, FFT helpers, STFT
//! analysis/synthesis, fractional delays, rate conversion, and SNR tools.

pub mod delay;
pub mod fft;
pub mod resample;
pub mod signal;
pub mod snr;
pub mod stft;

pub use delay::{delay_signal, fractional_delay_kernel};
pub use fft::{fast_convolve, fast_convolve_raw, fft, fft_complex, ifft, next_pow2};
pub use resample::{resample, resample_multichannel, CUTOFF_FACTOR, RESAMPLE_TAPS};
pub use signal::{MonoSignal, MultichannelSignal};
pub use snr::{measure_snr, scale_to_snr};
pub use stft::{
    default_frame_ms, frame_len_for_ms, hann_window, istft, stft, stft_samples, Spectrogram,
};

//! STFT analysis/synthesis with a periodic Hann window at 50% overlap.
//!
//! The periodic Hann window sums to one at hop = frame/2, so overlap-add
//! reconstruction is exact up to FFT round-off wherever full overlap exists.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

use super::signal::MonoSignal;

/// One-sided complex STFT of a mono signal.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    /// `frames[t][f]` with `f` in `0..=frame_len/2`.
    pub frames: Vec<Vec<Complex<f64>>>,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
    /// Length of the analyzed signal; `istft` truncates back to this.
    pub signal_len: usize,
    /// Set when the signal was shorter than one frame and had to be padded.
    pub padded: bool,
}

impl Spectrogram {
    /// Number of one-sided frequency bins (`frame_len / 2 + 1`).
    pub fn bin_count(&self) -> usize {
        self.frame_len / 2 + 1
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Center frequency of bin `f` in Hz.
    pub fn bin_frequency(&self, f: usize) -> f64 {
        f as f64 * self.sample_rate as f64 / self.frame_len as f64
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Frame length in samples for a duration in milliseconds, rounded to the
/// nearest even integer.
pub fn frame_len_for_ms(frame_ms: f64, sample_rate: u32) -> usize {
    let exact = frame_ms * sample_rate as f64 / 1000.0;
    ((exact / 2.0).round() as usize).max(1) * 2
}

/// Default analysis frame duration used by the engine: 32 ms at 16 kHz,
/// 46 ms at 48 kHz and anything faster.
pub fn default_frame_ms(sample_rate: u32) -> f64 {
    if sample_rate >= 48_000 {
        46.0
    } else {
        32.0
    }
}

/// STFT with the frame length given in milliseconds. Only 50% overlap is
/// supported.
pub fn stft(x: &MonoSignal, frame_ms: f64, overlap: f64) -> Result<Spectrogram> {
    if frame_ms <= 0.0 {
        return Err(Error::InvalidArgument("frame_ms must be positive".into()));
    }
    if (overlap - 0.5).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "only 50% overlap is supported, got {overlap}"
        )));
    }
    stft_samples(x, frame_len_for_ms(frame_ms, x.sample_rate))
}

/// STFT with an explicit even frame length in samples, hop = frame/2.
pub fn stft_samples(x: &MonoSignal, frame_len: usize) -> Result<Spectrogram> {
    if x.is_empty() {
        return Err(Error::EmptyInput("stft input"));
    }
    if frame_len < 2 || frame_len % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "frame length must be even and >= 2, got {frame_len}"
        )));
    }
    let hop = frame_len / 2;
    let window = hann_window(frame_len);
    let bins = frame_len / 2 + 1;
    let padded = x.len() < frame_len;
    let n_frames = if padded {
        1
    } else {
        (x.len() - frame_len) / hop + usize::from((x.len() - frame_len) % hop != 0) + 1
    };

    let fft = FftPlanner::new().plan_fft_forward(frame_len);
    let mut frames = Vec::with_capacity(n_frames);
    let mut buf = vec![Complex::new(0.0, 0.0); frame_len];
    for t in 0..n_frames {
        let start = t * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            let s = x.samples.get(start + i).copied().unwrap_or(0.0);
            *b = Complex::new(s * window[i], 0.0);
        }
        fft.process(&mut buf);
        frames.push(buf[..bins].to_vec());
    }

    Ok(Spectrogram {
        frames,
        frame_len,
        hop,
        sample_rate: x.sample_rate,
        signal_len: x.len(),
        padded,
    })
}

/// Overlap-add inverse STFT. Interior samples reconstruct the analyzed
/// signal exactly up to round-off; the outermost half-frames rely on the
/// window-sum compensation and lose the very first/last sample where the
/// window vanishes.
pub fn istft(spec: &Spectrogram) -> Result<MonoSignal> {
    if spec.frames.is_empty() {
        return Err(Error::EmptyInput("istft input"));
    }
    let frame_len = spec.frame_len;
    let bins = spec.bin_count();
    for (t, frame) in spec.frames.iter().enumerate() {
        if frame.len() != bins {
            return Err(Error::InvalidArgument(format!(
                "frame {t} has {} bins, expected {bins}",
                frame.len()
            )));
        }
    }

    let ifft = FftPlanner::new().plan_fft_inverse(frame_len);
    let window = hann_window(frame_len);
    let out_len = (spec.frames.len() - 1) * spec.hop + frame_len;
    let mut acc = vec![0.0; out_len];
    let mut wsum = vec![0.0; out_len];
    let mut buf = vec![Complex::new(0.0, 0.0); frame_len];
    let scale = 1.0 / frame_len as f64;

    for (t, frame) in spec.frames.iter().enumerate() {
        buf[..bins].copy_from_slice(frame);
        // Rebuild the negative frequencies by conjugate symmetry.
        for f in 1..frame_len - bins + 1 {
            buf[frame_len - f] = frame[f].conj();
        }
        ifft.process(&mut buf);
        let start = t * spec.hop;
        for i in 0..frame_len {
            acc[start + i] += buf[i].re * scale;
            wsum[start + i] += window[i];
        }
    }

    let mut samples = vec![0.0; spec.signal_len.min(out_len)];
    for (i, s) in samples.iter_mut().enumerate() {
        if wsum[i] > 1e-12 {
            *s = acc[i] / wsum[i];
        }
    }
    samples.resize(spec.signal_len, 0.0);
    MonoSignal::new(samples, spec.sample_rate)
}

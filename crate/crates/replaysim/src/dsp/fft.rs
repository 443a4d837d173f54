//! FFT wrappers and FFT-based fast convolution.
//!
//! Transforms zero-pad to the next power of two, so `fft` followed by `ifft`
//! returns a buffer at the padded length; callers truncate as needed.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

use super::signal::MonoSignal;

/// Smallest power of two >= `n` (and >= 1).
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Forward FFT of a complex sequence, zero-padded to the next power of two.
pub fn fft_complex(x: &[Complex<f64>]) -> Result<Vec<Complex<f64>>> {
    if x.is_empty() {
        return Err(Error::EmptyInput("fft input"));
    }
    let n = next_pow2(x.len());
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    buf[..x.len()].copy_from_slice(x);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf)
}

/// Forward FFT of a real sequence, zero-padded to the next power of two.
pub fn fft(x: &[f64]) -> Result<Vec<Complex<f64>>> {
    if x.is_empty() {
        return Err(Error::EmptyInput("fft input"));
    }
    let n = next_pow2(x.len());
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (dst, &src) in buf.iter_mut().zip(x.iter()) {
        *dst = Complex::new(src, 0.0);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf)
}

/// Inverse FFT with 1/N normalization. The input length must already be a
/// power of two (as produced by [`fft`]).
pub fn ifft(spectrum: &[Complex<f64>]) -> Result<Vec<Complex<f64>>> {
    if spectrum.is_empty() {
        return Err(Error::EmptyInput("ifft input"));
    }
    if !spectrum.len().is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "ifft length {} is not a power of two",
            spectrum.len()
        )));
    }
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

/// Linear convolution of two real sequences via the frequency domain.
///
/// Output length is `x.len() + h.len() - 1`, matching direct summation.
pub fn fast_convolve_raw(x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() || h.is_empty() {
        return Err(Error::EmptyInput("convolution operand"));
    }
    let out_len = x.len() + h.len() - 1;
    let n = next_pow2(out_len);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut xa = vec![Complex::new(0.0, 0.0); n];
    for (dst, &src) in xa.iter_mut().zip(x.iter()) {
        *dst = Complex::new(src, 0.0);
    }
    let mut ha = vec![Complex::new(0.0, 0.0); n];
    for (dst, &src) in ha.iter_mut().zip(h.iter()) {
        *dst = Complex::new(src, 0.0);
    }
    fwd.process(&mut xa);
    fwd.process(&mut ha);
    for (a, b) in xa.iter_mut().zip(ha.iter()) {
        *a *= *b;
    }
    inv.process(&mut xa);
    let scale = 1.0 / n as f64;
    Ok(xa[..out_len].iter().map(|c| c.re * scale).collect())
}

/// Convolves a mono signal with an FIR kernel; the result keeps the signal's
/// sample rate and has length `len(x) + len(h) - 1`.
pub fn fast_convolve(x: &MonoSignal, h: &[f64]) -> Result<MonoSignal> {
    let samples = fast_convolve_raw(&x.samples, h)?;
    Ok(MonoSignal {
        samples,
        sample_rate: x.sample_rate,
    })
}

//! Fractional-delay kernels for sub-sample propagation delays.
//!
//! A Hann-windowed sinc interpolator models the fractional part of a delay;
//! the integer part is a plain shift. Integer delays collapse to an exact
//! shifted unit impulse because the sinc hits its zero crossings.

use crate::error::{Error, Result};

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Windowed-sinc interpolation kernel for the fractional delay `frac` in
/// [0, 1). `taps` must be odd; the kernel's group delay is `(taps - 1) / 2 +
/// frac` samples.
pub fn fractional_delay_kernel(frac: f64, taps: usize) -> Result<Vec<f64>> {
    if taps == 0 || taps % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "kernel taps must be odd, got {taps}"
        )));
    }
    if !(0.0..1.0).contains(&frac) {
        return Err(Error::InvalidArgument(format!(
            "fractional delay must be in [0, 1), got {frac}"
        )));
    }
    let center = (taps - 1) as f64 / 2.0;
    let n = taps as f64;
    let kernel = (0..taps)
        .map(|i| {
            let u = i as f64 - center - frac;
            let w = 0.5 * (1.0 + (2.0 * std::f64::consts::PI * u / n).cos());
            sinc(u) * w
        })
        .collect();
    Ok(kernel)
}

/// Delays `x` by `delay` samples (may be fractional), producing a signal of
/// length `len(x) + ceil(delay) + taps`. Energy ahead of the nominal start is
/// pre-ring of the interpolator.
pub fn delay_signal(x: &[f64], delay: f64, taps: usize) -> Result<Vec<f64>> {
    if delay < 0.0 || !delay.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delay must be finite and non-negative, got {delay}"
        )));
    }
    let int_part = delay.floor() as usize;
    let frac = delay - delay.floor();
    let kernel = fractional_delay_kernel(frac, taps)?;
    let center = (taps - 1) as isize / 2;
    let mut out = vec![0.0; x.len() + int_part + taps];
    for (k, &h) in kernel.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        // Tap k lands at offset int_part + k - center; samples that would
        // fall before the origin are clipped.
        let off = int_part as isize + k as isize - center;
        for (i, &s) in x.iter().enumerate() {
            let t = i as isize + off;
            if t >= 0 {
                out[t as usize] += s * h;
            }
        }
    }
    Ok(out)
}

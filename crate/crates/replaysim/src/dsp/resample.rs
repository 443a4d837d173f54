//! Rational resampling between the two engine rates, 48 kHz and 16 kHz.
//!
//! Both directions are a factor-of-3 polyphase windowed-sinc design with the
//! cutoff at 0.45 times the lower rate (7.2 kHz). The tap count is chosen so
//! the transition band rolls off gently: content just under the 16 kHz
//! Nyquist (7.9 kHz) is attenuated but clearly present, while content above
//! it (9 kHz) is suppressed by more than 40 dB before decimation.

use crate::error::{Error, Result};

use super::signal::{MonoSignal, MultichannelSignal};

/// Length of the anti-alias / interpolation kernel.
pub const RESAMPLE_TAPS: usize = 61;

/// Cutoff as a fraction of the lower sample rate.
pub const CUTOFF_FACTOR: f64 = 0.45;

const RATIO: usize = 3;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Hann-windowed sinc lowpass at `cutoff_hz`, sampled at `fs`, normalized to
/// unit DC gain.
fn lowpass(cutoff_hz: f64, fs: f64) -> Vec<f64> {
    let taps = RESAMPLE_TAPS;
    let center = (taps - 1) as f64 / 2.0;
    let fc = cutoff_hz / fs;
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let u = i as f64 - center;
            let w = 0.5 * (1.0 + (2.0 * std::f64::consts::PI * u / taps as f64).cos());
            2.0 * fc * sinc(2.0 * fc * u) * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    for v in &mut h {
        *v /= sum;
    }
    h
}

/// Sample with edge replication outside the valid range.
fn edge(x: &[f64], i: isize) -> f64 {
    if i < 0 {
        x[0]
    } else if i as usize >= x.len() {
        x[x.len() - 1]
    } else {
        x[i as usize]
    }
}

fn decimate_by_3(x: &[f64]) -> Vec<f64> {
    let h = lowpass(CUTOFF_FACTOR * 16_000.0, 48_000.0);
    let c = (RESAMPLE_TAPS - 1) as isize / 2;
    let out_len = x.len().div_ceil(RATIO);
    (0..out_len)
        .map(|i| {
            let t = (RATIO * i) as isize;
            h.iter()
                .enumerate()
                .map(|(m, &hm)| hm * edge(x, t + c - m as isize))
                .sum()
        })
        .collect()
}

fn interpolate_by_3(x: &[f64]) -> Vec<f64> {
    let mut h = lowpass(CUTOFF_FACTOR * 16_000.0, 48_000.0);
    // Normalize each polyphase branch so a constant input maps to the same
    // constant exactly.
    for p in 0..RATIO {
        let s: f64 = h.iter().skip(p).step_by(RATIO).sum();
        for v in h.iter_mut().skip(p).step_by(RATIO) {
            *v /= s;
        }
    }
    let c = (RESAMPLE_TAPS - 1) as isize / 2;
    let out_len = x.len() * RATIO;
    let mut out = vec![0.0; out_len];
    for (j, o) in out.iter_mut().enumerate() {
        // Taps with m = j + c - 3 i hit the zero-stuffed input at index i.
        let jc = j as isize + c;
        let i_lo = (jc - RESAMPLE_TAPS as isize + 1).div_euclid(RATIO as isize)
            + isize::from((jc - RESAMPLE_TAPS as isize + 1).rem_euclid(RATIO as isize) != 0);
        let i_hi = jc.div_euclid(RATIO as isize);
        let mut acc = 0.0;
        for i in i_lo..=i_hi {
            let m = (jc - RATIO as isize * i) as usize;
            acc += h[m] * edge(x, i);
        }
        *o = acc;
    }
    out
}

/// Resamples to `target_rate`. Only the identity and the 16 kHz / 48 kHz
/// pair are supported.
pub fn resample(x: &MonoSignal, target_rate: u32) -> Result<MonoSignal> {
    if x.is_empty() {
        return Err(Error::EmptyInput("resample input"));
    }
    let samples = match (x.sample_rate, target_rate) {
        (a, b) if a == b => return Ok(x.clone()),
        (48_000, 16_000) => decimate_by_3(&x.samples),
        (16_000, 48_000) => interpolate_by_3(&x.samples),
        (from, to) => return Err(Error::UnsupportedRatePair { from, to }),
    };
    MonoSignal::new(samples, target_rate)
}

/// Per-channel [`resample`].
pub fn resample_multichannel(x: &MultichannelSignal, target_rate: u32) -> Result<MultichannelSignal> {
    let channels = x
        .channels
        .iter()
        .map(|ch| resample(ch, target_rate))
        .collect::<Result<Vec<_>>>()?;
    MultichannelSignal::new(channels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, fs: u32, seconds: f64) -> MonoSignal {
        let n = (fs as f64 * seconds) as usize;
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs as f64).sin())
            .collect();
        MonoSignal::new(samples, fs).unwrap()
    }

    fn amplitude_db(x: &MonoSignal) -> f64 {
        let trim = RESAMPLE_TAPS;
        let seg = &x.samples[trim..x.len() - trim];
        let p = seg.iter().map(|s| s * s).sum::<f64>() / seg.len() as f64;
        10.0 * (2.0 * p).log10()
    }

    #[test]
    fn output_lengths_are_exact_factor_of_three() {
        let x = MonoSignal::zeros(96_000, 48_000);
        assert_eq!(resample(&x, 16_000).unwrap().len(), 32_000);
        let y = MonoSignal::zeros(32_000, 16_000);
        assert_eq!(resample(&y, 48_000).unwrap().len(), 96_000);
    }

    #[test]
    fn constant_survives_both_directions_exactly() {
        let x = MonoSignal::new(vec![0.7; 4800], 48_000).unwrap();
        let y = resample(&x, 16_000).unwrap();
        for &v in &y.samples {
            assert!((v - 0.7).abs() < 1e-12, "decimated value {v}");
        }
        let x = MonoSignal::new(vec![-0.3; 1600], 16_000).unwrap();
        let y = resample(&x, 48_000).unwrap();
        for &v in &y.samples {
            assert!((v + 0.3).abs() < 1e-12, "interpolated value {v}");
        }
    }

    #[test]
    fn one_khz_tone_decimates_onto_the_analytic_tone() {
        let x = tone(1000.0, 48_000, 1.0);
        let y = resample(&x, 16_000).unwrap();
        let r = tone(1000.0, 16_000, 1.0);
        let dot: f64 = y.samples.iter().zip(&r.samples).map(|(a, b)| a * b).sum();
        let na: f64 = y.samples.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nb: f64 = r.samples.iter().map(|b| b * b).sum::<f64>().sqrt();
        let corr = dot / (na * nb);
        assert!(corr >= 0.999, "correlation {corr}");
    }

    #[test]
    fn transition_band_tone_survives_decimation() {
        let y = resample(&tone(7900.0, 48_000, 1.0), 16_000).unwrap();
        let db = amplitude_db(&y);
        assert!(db >= -20.0, "7.9 kHz level {db} dB");
    }

    #[test]
    fn above_nyquist_tone_is_rejected() {
        let y = resample(&tone(9000.0, 48_000, 1.0), 16_000).unwrap();
        let db = amplitude_db(&y);
        assert!(db <= -40.0, "9 kHz level {db} dB");
    }

    #[test]
    fn round_trip_preserves_bandlimited_content() {
        let x = tone(1234.0, 16_000, 1.0);
        let up = resample(&x, 48_000).unwrap();
        let back = resample(&up, 16_000).unwrap();
        assert_eq!(back.len(), x.len());
        let trim = RESAMPLE_TAPS;
        let mut max_err = 0.0f64;
        for i in trim..x.len() - trim {
            max_err = max_err.max((back.samples[i] - x.samples[i]).abs());
        }
        assert!(max_err < 1e-3, "round-trip error {max_err}");
    }

    #[test]
    fn unsupported_pairs_are_reported() {
        let x = MonoSignal::zeros(100, 44_100);
        match resample(&x, 16_000) {
            Err(Error::UnsupportedRatePair { from, to }) => {
                assert_eq!((from, to), (44_100, 16_000));
            }
            other => panic!("expected UnsupportedRatePair, got {other:?}"),
        }
    }

    #[test]
    fn identity_resample_is_a_clone() {
        let x = tone(440.0, 16_000, 0.1);
        let y = resample(&x, 16_000).unwrap();
        assert_eq!(x.samples, y.samples);
    }
}

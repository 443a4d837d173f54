//! Signal-to-noise ratio measurement and gain solving.

use crate::error::{Error, Result};

/// SNR in dB between a signal and a noise sequence, `10 log10(Ps / Pn)`.
/// Powers are mean squares over each full sequence.
pub fn measure_snr(signal: &[f64], noise: &[f64]) -> Result<f64> {
    let ps = mean_square(signal, "signal")?;
    let pn = mean_square(noise, "noise")?;
    if pn == 0.0 {
        return Err(Error::SilentSignal("noise"));
    }
    if ps == 0.0 {
        return Err(Error::SilentSignal("signal"));
    }
    Ok(10.0 * (ps / pn).log10())
}

/// Gain to apply to `noise` so that `signal + gain * noise` has the requested
/// SNR: `g = sqrt(Ps / (Pn * 10^(snr/10)))`.
pub fn scale_to_snr(signal: &[f64], noise: &[f64], snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target SNR must be finite, got {snr_db}"
        )));
    }
    let ps = mean_square(signal, "signal")?;
    let pn = mean_square(noise, "noise")?;
    if pn == 0.0 {
        return Err(Error::SilentSignal("noise"));
    }
    if ps == 0.0 {
        return Err(Error::SilentSignal("signal"));
    }
    Ok((ps / (pn * 10f64.powf(snr_db / 10.0))).sqrt())
}

fn mean_square(x: &[f64], label: &'static str) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput(label));
    }
    Ok(x.iter().map(|s| s * s).sum::<f64>() / x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_power_is_zero_db() {
        let s = [1.0, -1.0, 1.0, -1.0];
        let n = [-1.0, 1.0, -1.0, 1.0];
        assert!(measure_snr(&s, &n).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ten_times_amplitude_is_twenty_db() {
        let s = [10.0, -10.0];
        let n = [1.0, -1.0];
        assert!((measure_snr(&s, &n).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_noise_meets_target() {
        let s: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.1).sin()).collect();
        let n: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).cos() * 3.0).collect();
        for target in [-10.0, 0.0, 15.0, 40.0] {
            let g = scale_to_snr(&s, &n, target).unwrap();
            let scaled: Vec<f64> = n.iter().map(|v| v * g).collect();
            let got = measure_snr(&s, &scaled).unwrap();
            assert!((got - target).abs() < 1e-9, "target {target} got {got}");
        }
    }

    #[test]
    fn silent_inputs_are_rejected() {
        let s = [1.0, 2.0];
        let z = [0.0, 0.0];
        assert!(matches!(measure_snr(&s, &z), Err(Error::SilentSignal(_))));
        assert!(matches!(measure_snr(&z, &s), Err(Error::SilentSignal(_))));
        assert!(matches!(scale_to_snr(&s, &z, 0.0), Err(Error::SilentSignal(_))));
        assert!(measure_snr(&[], &s).is_err());
    }
}

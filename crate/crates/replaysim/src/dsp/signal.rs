//! Time-domain signal containers.

use crate::error::{Error, Result};

/// A single-channel sample buffer with its sample rate.
///
/// Samples are dimensionless amplitudes, nominally in `[-1, 1)` when headed
/// for PCM emission. All values must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoSignal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl MonoSignal {
    /// Builds a signal after validating that every sample is finite and the
    /// rate is positive.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if let Some(pos) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite sample at index {pos}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Mean squared amplitude.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.power().sqrt()
    }

    pub fn scaled(&self, gain: f64) -> MonoSignal {
        MonoSignal {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Wraps this signal as a one-channel multichannel signal.
    pub fn into_multichannel(self) -> MultichannelSignal {
        MultichannelSignal {
            channels: vec![self],
        }
    }
}

/// A set of equally long channels sharing one sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSignal {
    pub channels: Vec<MonoSignal>,
}

impl MultichannelSignal {
    pub fn new(channels: Vec<MonoSignal>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptyInput("multichannel signal needs >= 1 channel"));
        }
        let len = channels[0].len();
        let rate = channels[0].sample_rate;
        for (i, ch) in channels.iter().enumerate() {
            if ch.len() != len {
                return Err(Error::InvalidArgument(format!(
                    "channel {i} has length {} but channel 0 has {len}",
                    ch.len()
                )));
            }
            if ch.sample_rate != rate {
                return Err(Error::InvalidArgument(format!(
                    "channel {i} has rate {} but channel 0 has {rate}",
                    ch.sample_rate
                )));
            }
        }
        Ok(Self { channels })
    }

    pub fn from_channel_data(data: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        let channels = data
            .into_iter()
            .map(|samples| MonoSignal::new(samples, sample_rate))
            .collect::<Result<Vec<_>>>()?;
        Self::new(channels)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.channels[0].sample_rate
    }

    /// Mean squared amplitude pooled over every channel.
    pub fn power(&self) -> f64 {
        let total: f64 = self
            .channels
            .iter()
            .flat_map(|c| c.samples.iter())
            .map(|s| s * s)
            .sum();
        let n = self.channel_count() * self.len();
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }

    pub fn scaled(&self, gain: f64) -> MultichannelSignal {
        MultichannelSignal {
            channels: self.channels.iter().map(|c| c.scaled(gain)).collect(),
        }
    }

    /// Truncates every channel to `len` samples, zero-padding if shorter.
    pub fn resized(&self, len: usize) -> MultichannelSignal {
        MultichannelSignal {
            channels: self
                .channels
                .iter()
                .map(|c| {
                    let mut samples = c.samples.clone();
                    samples.resize(len, 0.0);
                    MonoSignal {
                        samples,
                        sample_rate: c.sample_rate,
                    }
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_samples() {
        assert!(MonoSignal::new(vec![0.0, f64::NAN], 48_000).is_err());
        assert!(MonoSignal::new(vec![0.0, f64::INFINITY], 48_000).is_err());
        assert!(MonoSignal::new(vec![0.0, 1.0], 48_000).is_ok());
    }

    #[test]
    fn rejects_zero_rate() {
        assert!(MonoSignal::new(vec![0.0], 0).is_err());
    }

    #[test]
    fn multichannel_requires_equal_shape() {
        let a = MonoSignal::new(vec![0.0; 4], 48_000).unwrap();
        let b = MonoSignal::new(vec![0.0; 5], 48_000).unwrap();
        assert!(MultichannelSignal::new(vec![a.clone(), b]).is_err());
        let c = MonoSignal::new(vec![0.0; 4], 16_000).unwrap();
        assert!(MultichannelSignal::new(vec![a.clone(), c]).is_err());
        assert!(MultichannelSignal::new(vec![a.clone(), a]).is_ok());
        assert!(MultichannelSignal::new(vec![]).is_err());
    }

    #[test]
    fn power_pools_channels() {
        let x = MultichannelSignal::from_channel_data(vec![vec![1.0, 1.0], vec![0.0, 0.0]], 8_000)
            .unwrap();
        assert!((x.power() - 0.5).abs() < 1e-15);
    }
}

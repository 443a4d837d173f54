//! Noise injection: omnidirectional duplication and spatially coherent
//! diffuse fields.
//!
//! Omnidirectional mode adds the same mono noise to every channel, scaled
//! per channel to hit the target SNR against that channel's clean signal.
//! Diffuse mode synthesizes a multichannel field whose pairwise coherence
//! follows the spherically isotropic model sinc(2 pi f d / c), then applies
//! one global gain so the aggregate SNR over all channels hits the target.
//!
//! Both injectors return the scaled noise component alongside the output so
//! callers can verify `output = clean + component` sample for sample.

use rand::Rng;

use crate::dsp::{istft, stft_samples, MonoSignal, MultichannelSignal};
use crate::error::{Error, Result};

/// Targets above this cap are treated as "effectively clean".
pub const SNR_CAP_DB: f64 = 80.0;

/// STFT frame length used by the diffuse synthesizer and the Welch
/// coherence estimator.
pub const DIFFUSE_FRAME: usize = 1024;

/// Which injection procedure a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Omnidirectional,
    Diffuse,
}

impl std::fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseMode::Omnidirectional => "omnidirectional",
            NoiseMode::Diffuse => "diffuse",
        })
    }
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omnidirectional" => Ok(NoiseMode::Omnidirectional),
            "diffuse" => Ok(NoiseMode::Diffuse),
            other => Err(Error::InvalidArgument(format!(
                "unknown noise mode {other:?}"
            ))),
        }
    }
}

/// Result of an injection: the mixture, the exact noise component that was
/// added, and the gain applied per channel.
#[derive(Debug, Clone)]
pub struct Injection {
    pub output: MultichannelSignal,
    pub noise_component: MultichannelSignal,
    pub channel_gains: Vec<f64>,
}

/// Unnormalized sinc, sin(x)/x with sinc(0) = 1.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Pairwise coherence model of a microphone array in a spherically
/// isotropic field: Gamma_ij(f) = sinc(2 pi f d_ij / c).
#[derive(Debug, Clone)]
pub struct CoherenceTarget {
    pub positions: Vec<[f64; 3]>,
    pub speed_of_sound: f64,
}

impl CoherenceTarget {
    pub fn new(positions: Vec<[f64; 3]>, speed_of_sound: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "coherence target needs at least 2 microphones, got {}",
                positions.len()
            )));
        }
        if !(speed_of_sound.is_finite() && speed_of_sound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "speed of sound must be positive, got {speed_of_sound}"
            )));
        }
        Ok(CoherenceTarget {
            positions,
            speed_of_sound,
        })
    }

    pub fn mic_count(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let a = self.positions[i];
        let b = self.positions[j];
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Target coherence between mics `i` and `j` at frequency `f` Hz.
    pub fn coherence(&self, i: usize, j: usize, f: f64) -> f64 {
        sinc(2.0 * std::f64::consts::PI * f * self.distance(i, j) / self.speed_of_sound)
    }

    /// Coherence matrix at frequency `f`.
    fn matrix(&self, f: f64) -> nalgebra::DMatrix<f64> {
        let c = self.mic_count();
        nalgebra::DMatrix::from_fn(c, c, |i, j| self.coherence(i, j, f))
    }

    /// Symmetric mixing factor B with B Bᵀ = Gamma(f); negative eigenvalues
    /// are clamped to zero.
    fn mixing_matrix(&self, f: f64) -> nalgebra::DMatrix<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.matrix(f));
        let mut clamped = false;
        let sqrt_vals = eig.eigenvalues.map(|v| {
            if v < 0.0 {
                clamped = true;
                0.0
            } else {
                v.sqrt()
            }
        });
        if clamped {
            log::debug!("clamped negative coherence eigenvalue at {f:.1} Hz");
        }
        &eig.eigenvectors
            * nalgebra::DMatrix::from_diagonal(&sqrt_vals)
            * eig.eigenvectors.transpose()
    }
}

/// Repeats `noise` to reach `len` samples, crossfading 50 ms at each splice
/// to avoid clicks. Already-long noise is truncated.
pub fn loop_to_length(noise: &MonoSignal, len: usize) -> Result<MonoSignal> {
    if noise.is_empty() {
        return Err(Error::EmptyInput("noise"));
    }
    if noise.len() >= len {
        return MonoSignal::new(noise.samples[..len].to_vec(), noise.sample_rate);
    }
    let fade = ((noise.sample_rate as f64 * 0.05) as usize).min(noise.len() / 2);
    let mut out = noise.samples.clone();
    while out.len() < len + fade {
        let splice = out.len() - fade;
        for i in 0..fade {
            let w = (i + 1) as f64 / (fade + 1) as f64;
            out[splice + i] = out[splice + i] * (1.0 - w) + noise.samples[i] * w;
        }
        out.extend_from_slice(&noise.samples[fade..]);
    }
    out.truncate(len);
    MonoSignal::new(out, noise.sample_rate)
}

fn effective_target(snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target SNR must be finite, got {snr_db}"
        )));
    }
    Ok(snr_db.min(SNR_CAP_DB))
}

/// Adds the same mono noise to every channel, each channel scaled so its
/// own SNR equals `snr_db` (capped at +80 dB).
pub fn inject_omni(
    clean: &MultichannelSignal,
    noise: &MonoSignal,
    snr_db: f64,
) -> Result<Injection> {
    if clean.sample_rate() != noise.sample_rate {
        return Err(Error::InvalidArgument(format!(
            "clean at {} Hz but noise at {} Hz",
            clean.sample_rate(),
            noise.sample_rate
        )));
    }
    let target = effective_target(snr_db)?;
    let looped = loop_to_length(noise, clean.len())?;

    let mut gains = Vec::with_capacity(clean.channel_count());
    let mut out_channels = Vec::with_capacity(clean.channel_count());
    let mut component_channels = Vec::with_capacity(clean.channel_count());
    for ch in &clean.channels {
        let g = crate::dsp::scale_to_snr(&ch.samples, &looped.samples, target)?;
        gains.push(g);
        let component: Vec<f64> = looped.samples.iter().map(|v| v * g).collect();
        let mixed: Vec<f64> = ch
            .samples
            .iter()
            .zip(&component)
            .map(|(s, n)| s + n)
            .collect();
        component_channels.push(MonoSignal::new(component, clean.sample_rate())?);
        out_channels.push(MonoSignal::new(mixed, clean.sample_rate())?);
    }
    Ok(Injection {
        output: MultichannelSignal::new(out_channels)?,
        noise_component: MultichannelSignal::new(component_channels)?,
        channel_gains: gains,
    })
}

/// Synthesizes a multichannel noise field over the array described by
/// `target`, with the coherence of a spherically isotropic field.
///
/// Per STFT bin the mono noise coefficient is copied to every channel with
/// independent random phases (random signs on the real DC/Nyquist bins),
/// and the copies are mixed through the matrix square root of the target
/// coherence. Draws happen in (frame, bin, channel) order, so output is
/// deterministic for a given generator state.
pub fn synthesize_diffuse(
    noise: &MonoSignal,
    target: &CoherenceTarget,
    rng: &mut impl Rng,
) -> Result<MultichannelSignal> {
    let c = target.mic_count();
    let spec = stft_samples(noise, DIFFUSE_FRAME)?;
    let bins = spec.bin_count();
    let fs = noise.sample_rate as f64;

    // One mixing matrix per bin, reused across frames.
    let mixers: Vec<nalgebra::DMatrix<f64>> = (0..bins)
        .map(|k| target.mixing_matrix(k as f64 * fs / DIFFUSE_FRAME as f64))
        .collect();

    let mut channel_frames: Vec<Vec<Vec<rustfft::num_complex::Complex<f64>>>> =
        vec![Vec::with_capacity(spec.frame_count()); c];
    let mut z = vec![rustfft::num_complex::Complex::new(0.0, 0.0); c];
    for frame in &spec.frames {
        for ch_frames in channel_frames.iter_mut() {
            ch_frames.push(vec![rustfft::num_complex::Complex::new(0.0, 0.0); bins]);
        }
        for (k, &coeff) in frame.iter().enumerate() {
            let real_bin = k == 0 || k == bins - 1;
            for zc in z.iter_mut() {
                *zc = if real_bin {
                    // DC and Nyquist must stay real: random sign only.
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    coeff * sign
                } else {
                    let theta = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                    coeff * rustfft::num_complex::Complex::from_polar(1.0, theta)
                };
            }
            let b = &mixers[k];
            for i in 0..c {
                let mut acc = rustfft::num_complex::Complex::new(0.0, 0.0);
                for (j, &zj) in z.iter().enumerate() {
                    acc += zj * b[(i, j)];
                }
                let t = channel_frames[i].len() - 1;
                channel_frames[i][t][k] = acc;
            }
        }
    }

    let channels = channel_frames
        .into_iter()
        .map(|frames| {
            let ch_spec = crate::dsp::Spectrogram {
                frames,
                frame_len: spec.frame_len,
                hop: spec.hop,
                sample_rate: spec.sample_rate,
                signal_len: spec.signal_len,
                padded: spec.padded,
            };
            istft(&ch_spec)
        })
        .collect::<Result<Vec<_>>>()?;
    MultichannelSignal::new(channels)
}

/// Adds an already-synthesized diffuse field to the clean signal with one
/// global gain chosen so the aggregate SNR over all channels is `snr_db`
/// (capped at +80 dB).
pub fn inject_diffuse(
    clean: &MultichannelSignal,
    diffuse: &MultichannelSignal,
    snr_db: f64,
) -> Result<Injection> {
    if clean.channel_count() != diffuse.channel_count()
        || clean.len() != diffuse.len()
        || clean.sample_rate() != diffuse.sample_rate()
    {
        return Err(Error::InvalidArgument(format!(
            "clean ({} ch x {} @ {}) and diffuse ({} ch x {} @ {}) shapes differ",
            clean.channel_count(),
            clean.len(),
            clean.sample_rate(),
            diffuse.channel_count(),
            diffuse.len(),
            diffuse.sample_rate()
        )));
    }
    let target = effective_target(snr_db)?;
    let ps = clean.power();
    let pn = diffuse.power();
    if ps == 0.0 {
        return Err(Error::SilentSignal("clean signal"));
    }
    if pn == 0.0 {
        return Err(Error::SilentSignal("diffuse noise"));
    }
    let g = (ps / (pn * 10f64.powf(target / 10.0))).sqrt();

    let mut out_channels = Vec::with_capacity(clean.channel_count());
    let mut component_channels = Vec::with_capacity(clean.channel_count());
    for (ch, nch) in clean.channels.iter().zip(&diffuse.channels) {
        let component: Vec<f64> = nch.samples.iter().map(|v| v * g).collect();
        let mixed: Vec<f64> = ch
            .samples
            .iter()
            .zip(&component)
            .map(|(s, n)| s + n)
            .collect();
        component_channels.push(MonoSignal::new(component, clean.sample_rate())?);
        out_channels.push(MonoSignal::new(mixed, clean.sample_rate())?);
    }
    Ok(Injection {
        output: MultichannelSignal::new(out_channels)?,
        noise_component: MultichannelSignal::new(component_channels)?,
        channel_gains: vec![g; clean.channel_count()],
    })
}

/// Welch estimate of the complex coherence between channels `i` and `j`:
/// segments of `segment` samples, Hann window, 50% overlap. Returns
/// (frequency, Re coherence, magnitude-squared coherence) per bin.
pub fn estimate_coherence(
    x: &MultichannelSignal,
    i: usize,
    j: usize,
    segment: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    use rustfft::num_complex::Complex;
    if i >= x.channel_count() || j >= x.channel_count() {
        return Err(Error::InvalidArgument(format!(
            "channel pair ({i}, {j}) out of range for {} channels",
            x.channel_count()
        )));
    }
    if x.len() < 2 * segment {
        return Err(Error::NotEnoughData {
            needed: 2 * segment,
            got: x.len(),
        });
    }
    let si = stft_samples(&x.channels[i], segment)?;
    let sj = stft_samples(&x.channels[j], segment)?;
    let bins = si.bin_count();
    let mut sii = vec![0.0f64; bins];
    let mut sjj = vec![0.0f64; bins];
    let mut sij = vec![Complex::new(0.0, 0.0); bins];
    for (fi, fj) in si.frames.iter().zip(&sj.frames) {
        for k in 0..bins {
            sii[k] += fi[k].norm_sqr();
            sjj[k] += fj[k].norm_sqr();
            sij[k] += fi[k] * fj[k].conj();
        }
    }
    let fs = x.sample_rate() as f64;
    Ok((0..bins)
        .map(|k| {
            let denom = (sii[k] * sjj[k]).sqrt();
            let gamma = if denom > 0.0 {
                sij[k] / denom
            } else {
                Complex::new(0.0, 0.0)
            };
            (
                k as f64 * fs / segment as f64,
                gamma.re,
                gamma.norm_sqr(),
            )
        })
        .collect())
}

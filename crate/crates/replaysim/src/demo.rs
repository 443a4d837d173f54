//! Self-contained demonstration corpus: speech-like utterances, noise
//! beds, and four loudspeaker directivity grids. Everything is synthesized
//! deterministically from one seed, so runs built on the demo corpus are
//! reproducible end to end without external data.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;

use crate::audio_io::{write_wav, RngStream, SampleFormat, WavFile};
use crate::directivity::{save_grid, Direction, MeasuredGrid};
use crate::dsp::MonoSignal;
use crate::error::Result;

/// Sizing of the generated corpus.
#[derive(Debug, Clone)]
pub struct DemoSpec {
    pub speech_files: usize,
    pub noise_files: usize,
    pub grid_files: usize,
    /// Duration of each speech and noise file, seconds.
    pub seconds: f64,
    pub sample_rate: u32,
    pub seed: u64,
}

impl Default for DemoSpec {
    fn default() -> Self {
        DemoSpec {
            speech_files: 3,
            noise_files: 2,
            grid_files: 4,
            seconds: 2.5,
            sample_rate: 48_000,
            seed: 7,
        }
    }
}

/// Harmonic voice stand-in: a vibrato-modulated harmonic stack under a
/// syllable-rate envelope that never fully closes, plus a breath-noise
/// floor. Not speech, but speech-shaped enough to exercise every chain.
fn synth_speech(index: usize, spec: &DemoSpec) -> MonoSignal {
    let fs = spec.sample_rate as f64;
    let n = (spec.seconds * fs).round() as usize;
    let mut rng = RngStream::root(spec.seed)
        .child("demo-speech")
        .child_index(index)
        .rng();
    let f0 = 100.0 + 18.0 * index as f64;
    let syllable_rate = 2.8 + 0.3 * index as f64;
    let harmonics = 12;
    let phases: Vec<f64> = (0..harmonics).map(|_| rng.gen_range(0.0..TAU)).collect();

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fs;
        let vibrato = 3.0 * (TAU * 5.0 * t).sin();
        let inst = f0 + vibrato;
        let mut v = 0.0;
        for (h, phase) in phases.iter().enumerate() {
            let k = (h + 1) as f64;
            v += (TAU * inst * k * t + phase).sin() / k.powf(1.5);
        }
        let envelope = 0.25 + 0.75 * (0.5 - 0.5 * (TAU * syllable_rate * t).cos()).powf(1.5);
        let breath: f64 = rng.gen_range(-1.0..1.0);
        samples.push(v * envelope + 0.015 * breath);
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = 0.5 / peak;
    for v in &mut samples {
        *v *= gain;
    }
    MonoSignal::new(samples, spec.sample_rate).expect("nonempty synthesized speech")
}

/// Noise beds: even indices are white, odd indices are one-pole lowpassed
/// rumble.
fn synth_noise(index: usize, spec: &DemoSpec) -> MonoSignal {
    let fs = spec.sample_rate as f64;
    let n = (spec.seconds * fs).round() as usize;
    let mut rng = RngStream::root(spec.seed)
        .child("demo-noise")
        .child_index(index)
        .rng();
    let mut samples = Vec::with_capacity(n);
    let mut state = 0.0;
    for _ in 0..n {
        let w: f64 = rng.gen_range(-1.0..1.0);
        if index % 2 == 0 {
            samples.push(w);
        } else {
            state = 0.97 * state + 0.03 * w;
            samples.push(state);
        }
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = 0.5 / peak;
    for v in &mut samples {
        *v *= gain;
    }
    MonoSignal::new(samples, spec.sample_rate).expect("nonempty synthesized noise")
}

/// A loudspeaker directivity family: direction-dependent gain plus a
/// two-tap spectral tilt that closes toward the rear, and for later
/// families a small boxy echo. 12 azimuths x 3 elevations per grid.
pub fn demo_grid(index: usize, sample_rate: u32) -> MeasuredGrid {
    let mut entries = Vec::new();
    for az_deg in (0..360).step_by(30) {
        for el_deg in [-45.0, 0.0, 45.0] {
            let d = Direction::from_degrees(az_deg as f64, el_deg).expect("grid angle");
            let u = d.unit_vector();
            // Angle off the +x boresight.
            let cos_g = u[0];
            let gain = match index % 4 {
                0 => 0.6 + 0.4 * cos_g,
                1 => 0.5 * (1.0 + cos_g),
                2 => (0.5 * (1.0 + cos_g)).powi(2),
                _ => 0.5 * (1.0 + cos_g),
            };
            let mut ir = vec![0.0; 64];
            ir[4] = gain;
            // Rear directions lose high end: stronger first-order smear.
            ir[5] = gain * 0.2 * (1.0 - cos_g);
            if index % 4 == 3 {
                ir[20] = gain * 0.1;
            }
            entries.push((d, ir));
        }
    }
    MeasuredGrid::new(format!("spk{index}"), sample_rate, entries).expect("valid demo grid")
}

/// Writes the corpus under `root`: `speech/*.wav`, `noise/*.wav`, and
/// `grids/*.toml`.
pub fn make_demo_corpus(root: impl AsRef<Path>, spec: &DemoSpec) -> Result<()> {
    let root = root.as_ref();
    let speech_dir = root.join("speech");
    let noise_dir = root.join("noise");
    let grids_dir = root.join("grids");
    for dir in [&speech_dir, &noise_dir, &grids_dir] {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
    }

    for i in 0..spec.speech_files {
        let signal = synth_speech(i, spec).into_multichannel();
        let wav = WavFile::from_signal(&signal, SampleFormat::Pcm24)?;
        write_wav(speech_dir.join(format!("utt{i:02}.wav")), &wav)?;
    }
    for i in 0..spec.noise_files {
        let signal = synth_noise(i, spec).into_multichannel();
        let wav = WavFile::from_signal(&signal, SampleFormat::Pcm16)?;
        write_wav(noise_dir.join(format!("noise{i:02}.wav")), &wav)?;
    }
    for i in 0..spec.grid_files {
        let grid = demo_grid(i, spec.sample_rate);
        save_grid(grids_dir.join(format!("spk{i}.toml")), &grid)?;
    }
    log::info!(
        "demo corpus at {}: {} speech, {} noise, {} grids",
        root.display(),
        spec.speech_files,
        spec.noise_files,
        spec.grid_files
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_io::read_wav;
    use crate::directivity::load_grid;

    #[test]
    fn corpus_has_the_requested_shape() {
        let dir = tempfile::tempdir().unwrap();
        let spec = DemoSpec {
            seconds: 0.3,
            ..DemoSpec::default()
        };
        make_demo_corpus(dir.path(), &spec).unwrap();

        let count = |sub: &str| std::fs::read_dir(dir.path().join(sub)).unwrap().count();
        assert_eq!(count("speech"), 3);
        assert_eq!(count("noise"), 2);
        assert_eq!(count("grids"), 4);

        let wav = read_wav(dir.path().join("speech/utt00.wav")).unwrap();
        assert_eq!(wav.sample_rate, 48_000);
        assert_eq!(wav.channel_count(), 1);
        assert_eq!(wav.frame_count(), 14_400);
        let rms: f64 = (wav.channels[0].iter().map(|v| v * v).sum::<f64>()
            / wav.frame_count() as f64)
            .sqrt();
        assert!(rms > 0.01, "speech rms {rms}");

        let grid = load_grid(dir.path().join("grids/spk0.toml")).unwrap();
        assert_eq!(grid.fs, 48_000);
        assert_eq!(grid.ir_len(), 64);
        assert_eq!(grid.entries.len(), 36);
    }

    #[test]
    fn corpus_generation_is_deterministic() {
        let spec = DemoSpec {
            seconds: 0.2,
            ..DemoSpec::default()
        };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        make_demo_corpus(a.path(), &spec).unwrap();
        make_demo_corpus(b.path(), &spec).unwrap();
        for rel in ["speech/utt01.wav", "noise/noise01.wav", "grids/spk2.toml"] {
            let x = std::fs::read(a.path().join(rel)).unwrap();
            let y = std::fs::read(b.path().join(rel)).unwrap();
            assert_eq!(x, y, "{rel} differs between runs");
        }
    }

    #[test]
    fn demo_grids_are_front_loaded() {
        let grid = demo_grid(1, 48_000);
        let front = grid.lookup(&Direction::from_degrees(0.0, 0.0).unwrap());
        let back = grid.lookup(&Direction::from_degrees(180.0, 0.0).unwrap());
        let e = |ir: &[f64]| ir.iter().map(|v| v * v).sum::<f64>();
        assert!(e(front) > 10.0 * e(back));
    }
}

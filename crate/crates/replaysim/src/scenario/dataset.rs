//! Dataset generation: sampled scenes driven through the three chains,
//! noise-injected, quantized, and cataloged in a manifest.
//!
//! Every random draw comes from a stream labeled by (master seed,
//! utterance, trial, purpose), so trials are independent work items and
//! parallel generation is byte-identical to serial generation.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio_io::{read_wav, write_wav, RngStream, SampleFormat, WavFile};
use crate::directivity::{load_grid_at, MeasuredGrid};
use crate::dsp::{resample, resample_multichannel, MonoSignal, MultichannelSignal};
use crate::error::{Error, Result};
use crate::metrics::TrialLabel;
use crate::noise::{
    inject_diffuse, inject_omni, loop_to_length, synthesize_diffuse, CoherenceTarget, NoiseMode,
};
use crate::scenario::chains::{
    simulate_genuine, simulate_replay, simulate_spoof, SimParams, SpoofingConfig,
};
use crate::scenario::manifest::{write_manifest, Manifest, TrialRecord};
use crate::scenario::scene::{sample_scene, RoomChoice, SceneConstraints};

/// All chains run at this rate; other output rates are downsampled from it.
pub const ENGINE_RATE: u32 = 48_000;

/// Generation parameters. Everything defaulted here is recorded in the
/// manifest metadata, so a run is reproducible from the manifest alone
/// plus the corpora.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub master_seed: u64,
    /// Scenes to generate; speech files are reused round-robin when there
    /// are fewer files than utterances.
    pub utterances: usize,
    /// Output rates; each must be reachable from 48 kHz.
    pub sample_rates: Vec<u32>,
    /// Per-trial SNR bounds, dB.
    pub snr_range_db: (f64, f64),
    /// Emitted clip length, seconds.
    pub clip_seconds: f64,
    /// Linear gain applied before quantization.
    pub output_gain: f64,
    pub noise_mode: NoiseMode,
    pub spoofing_mode: SpoofingConfig,
    pub genuine_room: RoomChoice,
    /// Worker threads; 0 uses the default pool.
    pub jobs: usize,
    pub constraints: SceneConstraints,
    /// Image-source order; unset picks one per room.
    pub max_order: Option<u32>,
    pub kernel_taps: usize,
    pub speed_of_sound: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            master_seed: 1,
            utterances: 10,
            sample_rates: vec![48_000, 16_000],
            snr_range_db: (-10.0, 40.0),
            clip_seconds: 2.0,
            output_gain: 0.25,
            noise_mode: NoiseMode::Diffuse,
            spoofing_mode: SpoofingConfig::Reverberant,
            genuine_room: RoomChoice::EnvA,
            jobs: 0,
            constraints: SceneConstraints::default(),
            max_order: None,
            kernel_taps: 81,
            speed_of_sound: 343.0,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.utterances == 0 {
            return bad("utterances must be >= 1".into());
        }
        if self.sample_rates.is_empty() {
            return bad("need at least one output sample rate".into());
        }
        for &r in &self.sample_rates {
            if r != 48_000 && r != 16_000 {
                return bad(format!("unsupported output rate {r} Hz (48000 or 16000)"));
            }
        }
        if self.sample_rates.len()
            != self
                .sample_rates
                .iter()
                .collect::<std::collections::HashSet<_>>()
                .len()
        {
            return bad("duplicate output sample rate".into());
        }
        if !(self.snr_range_db.0 <= self.snr_range_db.1) {
            return bad(format!(
                "SNR range [{}, {}] is not ordered",
                self.snr_range_db.0, self.snr_range_db.1
            ));
        }
        if !(self.clip_seconds > 0.0) {
            return bad("clip_seconds must be positive".into());
        }
        if !(self.output_gain > 0.0 && self.output_gain.is_finite()) {
            return bad("output_gain must be positive and finite".into());
        }
        if self.kernel_taps < 3 || self.kernel_taps % 2 == 0 {
            return bad(format!("kernel_taps {} must be odd and >= 3", self.kernel_taps));
        }
        self.constraints
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    fn sim_params(&self) -> SimParams {
        SimParams {
            fs: ENGINE_RATE,
            max_order: self.max_order,
            kernel_taps: self.kernel_taps,
            speed_of_sound: self.speed_of_sound,
            genuine_room: self.genuine_room,
        }
    }
}

/// Files with this extension under `dir`, sorted by name for determinism.
fn list_sorted(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::Corpus(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file() && p.extension().and_then(|s| s.to_str()) == Some(ext)
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a corpus WAV as mono 48 kHz: channels averaged, then resampled.
fn load_mono_48k(path: &Path) -> Result<MonoSignal> {
    let wav = read_wav(path)?;
    let frames = wav.frame_count();
    if frames == 0 {
        return Err(Error::Corpus(format!("{} holds no samples", path.display())));
    }
    let scale = 1.0 / wav.channel_count() as f64;
    let mut mono = vec![0.0; frames];
    for ch in &wav.channels {
        for (m, &v) in mono.iter_mut().zip(ch) {
            *m += v * scale;
        }
    }
    resample(&MonoSignal::new(mono, wav.sample_rate)?, ENGINE_RATE)
}

fn load_all<T>(
    paths: &[PathBuf],
    what: &str,
    mut load: impl FnMut(&Path) -> Result<T>,
) -> Result<Vec<(String, T)>> {
    let mut out = Vec::new();
    for p in paths {
        let stem = p
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("unnamed")
            .to_owned();
        match load(p) {
            Ok(v) => out.push((stem, v)),
            Err(e) => log::warn!("skipping unreadable {what} {}: {e}", p.display()),
        }
    }
    if out.is_empty() {
        return Err(Error::Corpus(format!("no readable {what} files")));
    }
    Ok(out)
}

/// Center-truncates or zero-pads to exactly `len` samples.
fn normalize_length(x: &MonoSignal, len: usize) -> MonoSignal {
    let mut samples = if x.len() >= len {
        let start = (x.len() - len) / 2;
        x.samples[start..start + len].to_vec()
    } else {
        let mut v = x.samples.clone();
        v.resize(len, 0.0);
        v
    };
    if samples.iter().all(|&v| v == 0.0) {
        // A silent clip would poison the whole run; keep a tick instead.
        samples[0] = f64::EPSILON;
    }
    MonoSignal {
        samples,
        sample_rate: x.sample_rate,
    }
}

struct UtteranceOutput {
    records: Vec<TrialRecord>,
    clipped_samples: u64,
}

#[allow(clippy::too_many_arguments)]
fn generate_utterance(
    u: usize,
    config: &DatasetConfig,
    speech: &[(String, MonoSignal)],
    noises: &[(String, MonoSignal)],
    grids: &[(String, MeasuredGrid)],
    out_dir: &Path,
) -> Result<UtteranceOutput> {
    let ustream = RngStream::root(config.master_seed)
        .child("utt")
        .child_index(u);
    let scene_seed = ustream.child("scene-seed").rng().gen::<u64>();
    let scene = sample_scene(scene_seed, &config.constraints)?;
    let params = config.sim_params();

    let clip_len = (config.clip_seconds * ENGINE_RATE as f64).round() as usize;
    let source = normalize_length(&speech[u % speech.len()].1, clip_len);

    let genuine = simulate_genuine(&scene, &source, &params)?;
    let spoofed = simulate_spoof(&scene, &source, config.spoofing_mode, &params)?;

    let mut wet: Vec<(String, TrialLabel, Option<String>, MultichannelSignal)> = Vec::new();
    wet.push((format!("u{u:03}_gen"), TrialLabel::Genuine, None, genuine));
    for (g, (grid_id, grid)) in grids.iter().enumerate() {
        let replay = simulate_replay(&scene, &spoofed, grid, &params)?;
        wet.push((
            format!("u{u:03}_rep{g}"),
            TrialLabel::Replay,
            Some(grid_id.clone()),
            replay,
        ));
    }

    let mut records = Vec::new();
    let mut clipped_samples = 0u64;
    for (t, (trial_id, label, loudspeaker_id, signal)) in wet.into_iter().enumerate() {
        let tstream = ustream.child("trial").child_index(t);
        let (lo, hi) = config.snr_range_db;
        let snr_db = if lo == hi {
            lo
        } else {
            tstream.child("snr").rng().gen_range(lo..hi)
        };
        let noise_idx = tstream.child("noise-pick").rng().gen_range(0..noises.len());

        let clean = signal.resized(clip_len);
        let looped = loop_to_length(&noises[noise_idx].1, clip_len)?;
        let injection = match config.noise_mode {
            NoiseMode::Omnidirectional => inject_omni(&clean, &looped, snr_db)?,
            NoiseMode::Diffuse => {
                let target =
                    CoherenceTarget::new(scene.mic_positions(), config.speed_of_sound)?;
                let mut nrng = tstream.child("diffuse").rng();
                let field = synthesize_diffuse(&looped, &target, &mut nrng)?;
                inject_diffuse(&clean, &field, snr_db)?
            }
        };
        let out48 = injection.output.scaled(config.output_gain);

        for &rate in &config.sample_rates {
            let emitted = resample_multichannel(&out48, rate)?;
            let wav_path = format!("audio/{rate}/{trial_id}.wav");
            let wav = WavFile::from_signal(&emitted, SampleFormat::Pcm24)?;
            let clipped = write_wav(out_dir.join(&wav_path), &wav)?;
            if clipped > 0 {
                log::warn!("{wav_path}: {clipped} samples clipped at quantization");
                clipped_samples += clipped;
            }
            let mut scene_for_row = scene.clone();
            scene_for_row.loudspeaker_grid = loudspeaker_id.clone();
            records.push(TrialRecord {
                trial_id: trial_id.clone(),
                label,
                loudspeaker_id: loudspeaker_id.clone(),
                snr_db,
                sample_rate: rate,
                seed: scene_seed,
                genuine_room: config.genuine_room,
                spoofing_mode: config.spoofing_mode,
                noise_mode: config.noise_mode,
                wav_path,
                scene: scene_for_row,
            });
        }
    }
    Ok(UtteranceOutput {
        records,
        clipped_samples,
    })
}

fn manifest_meta(config: &DatasetConfig, grids: &[(String, MeasuredGrid)]) -> Vec<(String, String)> {
    let grid_ids: Vec<&str> = grids.iter().map(|(id, _)| id.as_str()).collect();
    let rates: Vec<String> = config.sample_rates.iter().map(|r| r.to_string()).collect();
    vec![
        ("engine".into(), format!("replaysim {}", env!("CARGO_PKG_VERSION"))),
        ("master_seed".into(), config.master_seed.to_string()),
        ("engine_rate".into(), ENGINE_RATE.to_string()),
        ("sample_rates".into(), rates.join(" ")),
        ("utterances".into(), config.utterances.to_string()),
        ("noise_mode".into(), config.noise_mode.to_string()),
        ("spoofing_mode".into(), config.spoofing_mode.to_string()),
        ("genuine_room".into(), config.genuine_room.to_string()),
        ("snr_range_db".into(), format!("{} {}", config.snr_range_db.0, config.snr_range_db.1)),
        ("clip_seconds".into(), config.clip_seconds.to_string()),
        ("output_gain".into(), config.output_gain.to_string()),
        ("speed_of_sound".into(), config.speed_of_sound.to_string()),
        ("kernel_taps".into(), config.kernel_taps.to_string()),
        (
            "max_order".into(),
            config
                .max_order
                .map(|o| o.to_string())
                .unwrap_or_else(|| "auto".into()),
        ),
        ("loudspeaker_grids".into(), grid_ids.join(" ")),
    ]
}

/// Generates the dataset into `out_dir` and returns the manifest that was
/// written to `out_dir/manifest.csv`.
///
/// Per utterance: one genuine trial plus one replay trial per loudspeaker
/// grid, each emitted at every configured rate under `audio/<rate>/`.
pub fn generate_dataset(
    config: &DatasetConfig,
    speech_dir: &Path,
    noise_dir: &Path,
    grids_dir: &Path,
    out_dir: &Path,
) -> Result<Manifest> {
    config.validate()?;
    let speech = load_all(&list_sorted(speech_dir, "wav")?, "speech", load_mono_48k)?;
    let noises = load_all(&list_sorted(noise_dir, "wav")?, "noise", load_mono_48k)?;
    let grids = load_all(&list_sorted(grids_dir, "toml")?, "grid", |p| {
        load_grid_at(p, ENGINE_RATE)
    })?;

    for &rate in &config.sample_rates {
        let dir = out_dir.join(format!("audio/{rate}"));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    let run = || -> Result<Vec<UtteranceOutput>> {
        (0..config.utterances)
            .into_par_iter()
            .map(|u| generate_utterance(u, config, &speech, &noises, &grids, out_dir))
            .collect()
    };
    let outputs = if config.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Generation(format!("cannot build worker pool: {e}")))?
            .install(run)
    } else {
        run()
    }
    .map_err(|e| match e {
        e @ (Error::Corpus(_) | Error::Config(_) | Error::Io { .. }) => e,
        other => Error::Generation(other.to_string()),
    })?;

    let records: Vec<TrialRecord> = outputs.iter().flat_map(|o| o.records.clone()).collect();
    if records.is_empty() {
        return Err(Error::Generation("no trials were generated".into()));
    }
    let clipped: u64 = outputs.iter().map(|o| o.clipped_samples).sum();
    if clipped > 0 {
        log::warn!("{clipped} samples clipped across the run; consider lowering output_gain");
    }

    let meta = manifest_meta(config, &grids);
    write_manifest(out_dir.join("manifest.csv"), &records, &meta)?;
    Ok(Manifest { meta, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo::{make_demo_corpus, DemoSpec};
    use crate::scenario::manifest::{audit_manifest, read_manifest};

    /// Small corpus + config tuned for test speed: short clips, low image
    /// order, one output rate unless a test needs both.
    fn quick_setup(grids: usize) -> (tempfile::TempDir, DatasetConfig) {
        let dir = tempfile::tempdir().unwrap();
        let spec = DemoSpec {
            speech_files: 2,
            noise_files: 2,
            grid_files: grids,
            seconds: 0.6,
            ..DemoSpec::default()
        };
        make_demo_corpus(dir.path(), &spec).unwrap();
        let config = DatasetConfig {
            master_seed: 11,
            utterances: 2,
            sample_rates: vec![48_000],
            clip_seconds: 0.5,
            max_order: Some(4),
            ..DatasetConfig::default()
        };
        (dir, config)
    }

    fn dirs(root: &Path) -> (PathBuf, PathBuf, PathBuf) {
        (
            root.join("speech"),
            root.join("noise"),
            root.join("grids"),
        )
    }

    #[test]
    fn generates_the_expected_trial_tree() {
        let (corpus, config) = quick_setup(2);
        let (speech, noise, grids) = dirs(corpus.path());
        let out = corpus.path().join("out");
        let manifest = generate_dataset(&config, &speech, &noise, &grids, &out).unwrap();

        // 2 utterances x (1 genuine + 2 replay) x 1 rate.
        assert_eq!(manifest.records.len(), 6);
        let (g, r) = audit_manifest(&manifest, &config.constraints).unwrap();
        assert_eq!((g, r), (2, 4));
        for rec in &manifest.records {
            let wav = read_wav(out.join(&rec.wav_path)).unwrap();
            assert_eq!(wav.sample_rate, rec.sample_rate);
            assert_eq!(wav.channel_count(), 2);
            assert_eq!(wav.frame_count(), 24_000);
            assert!((-10.0..40.0).contains(&rec.snr_db));
        }
        let reread = read_manifest(out.join("manifest.csv")).unwrap();
        assert_eq!(reread.records, manifest.records);
        assert_eq!(reread.meta_value("master_seed"), Some("11"));
    }

    #[test]
    fn same_seed_is_byte_identical_and_jobs_independent() {
        let (corpus, config) = quick_setup(1);
        let (speech, noise, grids) = dirs(corpus.path());

        let mut serial = config.clone();
        serial.jobs = 1;
        let mut parallel = config.clone();
        parallel.jobs = 4;

        let out_a = corpus.path().join("a");
        let out_b = corpus.path().join("b");
        generate_dataset(&serial, &speech, &noise, &grids, &out_a).unwrap();
        generate_dataset(&parallel, &speech, &noise, &grids, &out_b).unwrap();

        let manifest_a = std::fs::read(out_a.join("manifest.csv")).unwrap();
        let manifest_b = std::fs::read(out_b.join("manifest.csv")).unwrap();
        assert_eq!(manifest_a, manifest_b);
        for rel in ["audio/48000/u000_gen.wav", "audio/48000/u001_rep0.wav"] {
            let a = std::fs::read(out_a.join(rel)).unwrap();
            let b = std::fs::read(out_b.join(rel)).unwrap();
            assert_eq!(a, b, "{rel} differs between jobs=1 and jobs=4");
        }
    }

    #[test]
    fn both_rates_share_one_snr_per_trial() {
        let (corpus, mut config) = quick_setup(1);
        config.sample_rates = vec![48_000, 16_000];
        let (speech, noise, grids) = dirs(corpus.path());
        let out = corpus.path().join("out");
        let manifest = generate_dataset(&config, &speech, &noise, &grids, &out).unwrap();

        assert_eq!(manifest.records.len(), 8);
        for rec in &manifest.records {
            let twin = manifest
                .records
                .iter()
                .find(|r| r.trial_id == rec.trial_id && r.sample_rate != rec.sample_rate)
                .unwrap();
            assert_eq!(rec.snr_db, twin.snr_db);
            assert_eq!(rec.seed, twin.seed);
        }
        let wav = read_wav(out.join("audio/16000/u000_gen.wav")).unwrap();
        assert_eq!(wav.sample_rate, 16_000);
        assert_eq!(wav.frame_count(), 8_000);
    }

    #[test]
    fn omni_mode_runs_and_differs_from_diffuse() {
        let (corpus, mut config) = quick_setup(1);
        let (speech, noise, grids) = dirs(corpus.path());
        config.noise_mode = NoiseMode::Omnidirectional;
        let out_o = corpus.path().join("omni");
        let m = generate_dataset(&config, &speech, &noise, &grids, &out_o).unwrap();
        assert!(m.records.iter().all(|r| r.noise_mode == NoiseMode::Omnidirectional));

        config.noise_mode = NoiseMode::Diffuse;
        let out_d = corpus.path().join("diffuse");
        generate_dataset(&config, &speech, &noise, &grids, &out_d).unwrap();
        let a = std::fs::read(out_o.join("audio/48000/u000_gen.wav")).unwrap();
        let b = std::fs::read(out_d.join("audio/48000/u000_gen.wav")).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn missing_corpora_are_corpus_errors() {
        let (corpus, config) = quick_setup(1);
        let (speech, noise, _) = dirs(corpus.path());
        let empty = corpus.path().join("nothing");
        std::fs::create_dir_all(&empty).unwrap();
        let out = corpus.path().join("out");
        assert!(matches!(
            generate_dataset(&config, &speech, &noise, &empty, &out),
            Err(Error::Corpus(_))
        ));
        assert!(matches!(
            generate_dataset(&config, &corpus.path().join("absent"), &noise, &empty, &out),
            Err(Error::Corpus(_))
        ));
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let (corpus, mut config) = quick_setup(1);
        let (speech, noise, grids) = dirs(corpus.path());
        let out = corpus.path().join("out");
        config.sample_rates = vec![44_100];
        assert!(matches!(
            generate_dataset(&config, &speech, &noise, &grids, &out),
            Err(Error::Config(_))
        ));
        config.sample_rates = vec![48_000];
        config.utterances = 0;
        assert!(matches!(
            generate_dataset(&config, &speech, &noise, &grids, &out),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unreadable_corpus_entries_are_skipped() {
        let (corpus, config) = quick_setup(1);
        let (speech, noise, grids) = dirs(corpus.path());
        std::fs::write(speech.join("broken.wav"), b"not a wav at all").unwrap();
        let out = corpus.path().join("out");
        let manifest = generate_dataset(&config, &speech, &noise, &grids, &out).unwrap();
        assert_eq!(manifest.records.len(), 4);
    }
}

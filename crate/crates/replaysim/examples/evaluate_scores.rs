//! Scores a freshly generated dataset with two toy replay detectors and
//! reports their equal error rates plus a confidence interval.

use std::fmt::Write as _;
use std::path::Path;

use replaysim::audio_io::read_wav;
use replaysim::demo::{make_demo_corpus, DemoSpec};
use replaysim::dsp::fft;
use replaysim::metrics::{
    compute_eer, confidence_interval, join_scores, read_score_file,
};
use replaysim::scenario::{generate_dataset, DatasetConfig, Manifest};

/// Peak-to-rms ratio: extra reverberation lowers it.
fn crest(x: &[f64]) -> f64 {
    let peak = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    peak / rms.max(1e-12)
}

/// Share of spectral energy above 6 kHz: loudspeakers shape the top octave.
fn hf_share(x: &[f64], fs: f64) -> f64 {
    let spec = fft(x).unwrap();
    let n = spec.len();
    let cut = (6_000.0 / fs * n as f64) as usize;
    let e =
        |range: std::ops::Range<usize>| spec[range].iter().map(|c| c.norm_sqr()).sum::<f64>();
    let total = e(1..n / 2);
    e(cut.min(n / 2)..n / 2) / total.max(1e-30)
}

fn score_dataset(
    manifest: &Manifest,
    out_dir: &Path,
    detector: impl Fn(&[f64], f64) -> f64,
) -> String {
    let mut text = String::from("trial_id,score\n");
    for r in manifest.records.iter().filter(|r| r.sample_rate == 48_000) {
        let wav = read_wav(out_dir.join(&r.wav_path)).unwrap();
        let sig = wav.to_signal().unwrap();
        let score = detector(&sig.channels[0].samples, 48_000.0);
        writeln!(text, "{},{score}", r.trial_id).unwrap();
    }
    text
}

fn main() -> replaysim::Result<()> {
    let root = std::env::temp_dir().join("replaysim-eval-example");
    let corpus = root.join("corpus");
    let out = root.join("run");
    make_demo_corpus(&corpus, &DemoSpec::default())?;
    let config = DatasetConfig {
        master_seed: 31,
        utterances: 4,
        sample_rates: vec![48_000],
        clip_seconds: 1.0,
        snr_range_db: (25.0, 40.0),
        ..DatasetConfig::default()
    };
    let manifest = generate_dataset(
        &config,
        &corpus.join("speech"),
        &corpus.join("noise"),
        &corpus.join("grids"),
        &out,
    )?;
    let labels = manifest.labels();

    let mut eers = Vec::new();
    for (name, text) in [
        ("crest", score_dataset(&manifest, &out, |x, _| crest(x))),
        ("hf_share", score_dataset(&manifest, &out, hf_share)),
    ] {
        let path = root.join(format!("{name}.csv"));
        std::fs::write(&path, text).expect("write score file");
        let trials = join_scores(&read_score_file(&path)?, &labels)?;
        let report = compute_eer(&trials)?;
        println!(
            "{name:9} eer {:.3} at threshold {:.4} ({} genuine, {} replay trials)",
            report.eer, report.threshold, report.n_genuine, report.n_replay
        );
        eers.push(report.eer);
    }
    let (mean, hw) = confidence_interval(&eers, 0.95)?;
    println!("mean eer {mean:.3} +/- {hw:.3} (95% CI over {} detectors)", eers.len());
    Ok(())
}

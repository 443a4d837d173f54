//! Generates a small labeled genuine/replay dataset from the synthetic
//! demo corpus, then re-reads and audits the manifest.

use replaysim::demo::{make_demo_corpus, DemoSpec};
use replaysim::scenario::{audit_manifest, generate_dataset, read_manifest, DatasetConfig};

fn main() -> replaysim::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let root = std::env::temp_dir().join("replaysim-dataset-example");
    let corpus = root.join("corpus");
    let out = root.join("run");

    make_demo_corpus(&corpus, &DemoSpec::default())?;
    let config = DatasetConfig {
        master_seed: 42,
        utterances: 3,
        sample_rates: vec![48_000, 16_000],
        clip_seconds: 1.0,
        ..DatasetConfig::default()
    };
    let manifest = generate_dataset(
        &config,
        &corpus.join("speech"),
        &corpus.join("noise"),
        &corpus.join("grids"),
        &out,
    )?;

    let reread = read_manifest(&out.join("manifest.csv"))?;
    assert_eq!(reread.records.len(), manifest.records.len());
    let (genuine, replay) = audit_manifest(&reread, &config.constraints)?;
    println!();
    println!(
        "{}: {} rows, {genuine} genuine / {replay} replay trials",
        out.join("manifest.csv").display(),
        reread.records.len()
    );
    println!("engine {}", reread.meta_value("engine").unwrap_or("?"));
    for r in reread.records.iter().take(6) {
        println!(
            "  {:12} {:8} snr {:6.1} dB  {} Hz  {}",
            r.trial_id,
            r.label.to_string(),
            r.snr_db,
            r.sample_rate,
            r.wav_path
        );
    }
    Ok(())
}

//! Writes the self-contained synthetic corpus (speech, noise, loudspeaker
//! grids) that the other examples and the CLI can consume.
//!
//! Usage: cargo run --example make_demo_corpus -- [OUT_DIR]

use std::path::PathBuf;

use replaysim::demo::{make_demo_corpus, DemoSpec};

fn main() -> replaysim::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("replaysim-demo-corpus"));

    let spec = DemoSpec::default();
    make_demo_corpus(&out, &spec)?;

    println!("corpus root: {}", out.display());
    println!(
        "  speech/  {} files, {:.1} s each at {} Hz",
        spec.speech_files, spec.seconds, spec.sample_rate
    );
    println!("  noise/   {} files", spec.noise_files);
    println!("  grids/   {} loudspeaker directivity grids", spec.grid_files);
    println!();
    println!("try: replaysim generate --corpus-root {} --out <dir>", out.display());
    Ok(())
}

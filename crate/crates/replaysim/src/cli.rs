//! Command-line surface: `generate`, `rir`, `eval`, and `inspect`.
//!
//! Progress and warnings go to standard error; results go to standard
//! output as `key=value` tokens, one logical result per line. Exit codes:
//! 0 success, 1 configuration error, 2 unreadable or malformed input data
//! (corpora, manifests, score files), 3 generation or processing failure,
//! 4 score files naming trials missing from the manifest.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::audio_io::{write_wav, SampleFormat, WavFile};
use crate::error::{Error, Result};
use crate::metrics::{compute_eer, confidence_interval, join_scores, read_score_file};
use crate::noise::NoiseMode;
use crate::rir::{enumerate_images, render_rir, rt60_estimate, RenderParams, RoomSpec, Transducer};
use crate::scenario::dataset::{generate_dataset, DatasetConfig};
use crate::scenario::manifest::{audit_manifest, read_manifest};

/// Environment variable naming the default corpus root.
pub const CORPUS_ROOT_ENV: &str = "REPLAYSIM_CORPUS_ROOT";

#[derive(Parser, Debug)]
#[command(
    name = "replaysim",
    version,
    about = "Deterministic replay-attack recording simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labeled genuine/replay dataset from a corpus.
    Generate(GenerateArgs),
    /// Render one room impulse response and report T60 and direct delays.
    Rir(RirArgs),
    /// Score one or more score files against a manifest.
    Eval(EvalArgs),
    /// Print manifest statistics and re-validate constraints.
    Inspect(InspectArgs),
}

/// On-disk run configuration: corpus paths plus every dataset parameter.
/// Flags override file values; the fully resolved form is snapshotted next
/// to the outputs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub corpus_root: Option<PathBuf>,
    pub speech_dir: Option<PathBuf>,
    pub noise_dir: Option<PathBuf>,
    pub grids_dir: Option<PathBuf>,
    #[serde(flatten)]
    pub dataset: DatasetConfig,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus root holding speech/, noise/, and grids/. Defaults to the
    /// REPLAYSIM_CORPUS_ROOT environment variable.
    #[arg(long)]
    corpus_root: Option<PathBuf>,
    #[arg(long)]
    speech_dir: Option<PathBuf>,
    #[arg(long)]
    noise_dir: Option<PathBuf>,
    #[arg(long)]
    grids_dir: Option<PathBuf>,
    /// Output directory for audio, manifest, and config snapshot.
    #[arg(long)]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    utterances: Option<usize>,
    /// omni | omnidirectional | diffuse.
    #[arg(long)]
    noise_mode: Option<String>,
    /// reverberant | anechoic.
    #[arg(long)]
    spoofing: Option<String>,
    /// env_a | env_b: room recording the genuine class.
    #[arg(long)]
    genuine_room: Option<String>,
    /// Comma-separated output rates, e.g. 48000,16000.
    #[arg(long)]
    sample_rates: Option<String>,
    /// Worker threads; 0 uses one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Image-source order: a number, or auto.
    #[arg(long)]
    max_order: Option<String>,
    #[arg(long)]
    clip_seconds: Option<f64>,
    /// Per-trial SNR bounds as lo,hi in dB.
    #[arg(long)]
    snr_range: Option<String>,
    #[arg(long)]
    output_gain: Option<f64>,
}

#[derive(Args, Debug)]
struct RirArgs {
    /// Room dimensions as w,l,h in meters.
    #[arg(long, value_parser = parse_point)]
    room: [f64; 3],
    /// One absorption for all surfaces, or six comma-separated values.
    #[arg(long, default_value = "0.3")]
    absorption: String,
    /// Source position as x,y,z.
    #[arg(long, value_parser = parse_point)]
    source: [f64; 3],
    /// Microphone position as x,y,z; repeatable.
    #[arg(long = "mic", required = true, value_parser = parse_point)]
    mics: Vec<[f64; 3]>,
    #[arg(long, default_value_t = 48_000)]
    fs: u32,
    /// Image-source order: a number, or auto.
    #[arg(long, default_value = "auto")]
    max_order: String,
    #[arg(long, default_value_t = 81)]
    taps: usize,
    #[arg(long, default_value_t = 343.0)]
    speed_of_sound: f64,
    /// Output WAV (32-bit float, one channel per microphone).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Score files: `trial_id,score` per line.
    #[arg(required = true)]
    scores: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Optional run config supplying constraint overrides for the audit.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Maps an error to the documented exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnmatchedTrials(_) => 4,
        Error::Config(_) | Error::InvalidArgument(_) | Error::InfeasibleConstraints(_) => 1,
        Error::Corpus(_)
        | Error::Io { .. }
        | Error::MalformedWav { .. }
        | Error::UnsupportedWav { .. }
        | Error::BadGrid { .. }
        | Error::BadManifest { .. }
        | Error::BadScoreFile { .. }
        | Error::SingleClass
        | Error::NotEnoughData { .. } => 2,
        _ => 3,
    }
}

fn parse_point(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .trim()
            .parse()
            .map_err(|e| format!("bad coordinate {p:?}: {e}"))?;
    }
    Ok(out)
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn load_run_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| config_err(format!("bad config {}: {e}", p.display())))
        }
    }
}

fn resolve_generate(args: &GenerateArgs) -> Result<RunConfig> {
    let mut rc = load_run_config(args.config.as_deref())?;

    // Precedence: flags, then config file, then environment, then defaults.
    rc.corpus_root = args
        .corpus_root
        .clone()
        .or(rc.corpus_root)
        .or_else(|| std::env::var_os(CORPUS_ROOT_ENV).map(PathBuf::from));
    let sub = |dir: &Option<PathBuf>, name: &str| -> Option<PathBuf> {
        dir.clone()
            .or_else(|| rc.corpus_root.as_ref().map(|r| r.join(name)))
    };
    rc.speech_dir = args.speech_dir.clone().or_else(|| sub(&rc.speech_dir, "speech"));
    rc.noise_dir = args.noise_dir.clone().or_else(|| sub(&rc.noise_dir, "noise"));
    rc.grids_dir = args.grids_dir.clone().or_else(|| sub(&rc.grids_dir, "grids"));
    for (dir, flag) in [
        (&rc.speech_dir, "--speech-dir"),
        (&rc.noise_dir, "--noise-dir"),
        (&rc.grids_dir, "--grids-dir"),
    ] {
        if dir.is_none() {
            return Err(config_err(format!(
                "no corpus directory: pass {flag}, --corpus-root, set {CORPUS_ROOT_ENV}, \
                 or name it in the config file"
            )));
        }
    }

    let d = &mut rc.dataset;
    if let Some(v) = args.seed {
        d.master_seed = v;
    }
    if let Some(v) = args.utterances {
        d.utterances = v;
    }
    if let Some(v) = &args.noise_mode {
        d.noise_mode = match v.as_str() {
            "omni" | "omnidirectional" => NoiseMode::Omnidirectional,
            "diffuse" => NoiseMode::Diffuse,
            other => return Err(config_err(format!("unknown noise mode {other:?}"))),
        };
    }
    if let Some(v) = &args.spoofing {
        d.spoofing_mode = v.parse().map_err(|e: Error| config_err(e.to_string()))?;
    }
    if let Some(v) = &args.genuine_room {
        d.genuine_room = v.parse().map_err(|e: Error| config_err(e.to_string()))?;
    }
    if let Some(v) = &args.sample_rates {
        d.sample_rates = v
            .split(',')
            .map(|r| {
                r.trim()
                    .parse()
                    .map_err(|e| config_err(format!("bad sample rate {r:?}: {e}")))
            })
            .collect::<Result<_>>()?;
    }
    if let Some(v) = args.jobs {
        d.jobs = v;
    }
    if let Some(v) = &args.max_order {
        d.max_order = parse_max_order(v)?;
    }
    if let Some(v) = args.clip_seconds {
        d.clip_seconds = v;
    }
    if let Some(v) = &args.snr_range {
        let (lo, hi) = v
            .split_once(',')
            .ok_or_else(|| config_err(format!("expected lo,hi dB, got {v:?}")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| config_err(format!("bad SNR bound {s:?}: {e}")))
        };
        d.snr_range_db = (parse(lo)?, parse(hi)?);
    }
    if let Some(v) = args.output_gain {
        d.output_gain = v;
    }
    d.validate()?;
    Ok(rc)
}

fn parse_max_order(s: &str) -> Result<Option<u32>> {
    if s == "auto" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|e| config_err(format!("bad max order {s:?}: {e}")))
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let rc = resolve_generate(args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let snapshot = args.out.join("config.resolved.toml");
    let text = toml::to_string_pretty(&rc)
        .map_err(|e| config_err(format!("cannot serialize resolved config: {e}")))?;
    std::fs::write(&snapshot, text).map_err(|e| Error::io(&snapshot, e))?;

    let manifest = generate_dataset(
        &rc.dataset,
        rc.speech_dir.as_deref().expect("resolved above"),
        rc.noise_dir.as_deref().expect("resolved above"),
        rc.grids_dir.as_deref().expect("resolved above"),
        &args.out,
    )?;
    let (genuine, replay) = audit_manifest(&manifest, &rc.dataset.constraints)
        .map_err(|e| Error::Generation(format!("post-generation audit failed: {e}")))?;
    println!(
        "manifest={} trials={} genuine={genuine} replay={replay} config={}",
        args.out.join("manifest.csv").display(),
        manifest.records.len(),
        snapshot.display()
    );
    Ok(())
}

/// Sub-sample arrival time of the strongest tap: matched-filter search with
/// the renderer's own fractional-delay kernel on a 1/400-sample grid.
fn peak_delay_samples(h: &[f64], taps: usize) -> f64 {
    let i = h
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let half = taps / 2 + 2;
    let lo = i.saturating_sub(half);
    let seg = &h[lo..(i + half + 1).min(h.len())];
    let mut impulse = vec![0.0; seg.len()];
    impulse[0] = 1.0;
    let start = ((i - lo) as f64 - 1.0).max(0.0);
    let steps = 800;
    let mut best = (f64::NEG_INFINITY, i as f64);
    for s in 0..=steps {
        let tau = start + 2.0 * s as f64 / steps as f64;
        let Ok(k) = crate::dsp::delay_signal(&impulse, tau, taps) else {
            continue;
        };
        let c: f64 = seg.iter().zip(&k).map(|(a, b)| a * b).sum();
        if c > best.0 {
            best = (c, lo as f64 + tau);
        }
    }
    best.1
}

fn cmd_rir(args: &RirArgs) -> Result<()> {
    let absorption: [f64; 6] = {
        let parts: Vec<f64> = args
            .absorption
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|e| config_err(format!("bad absorption {p:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        match parts.len() {
            1 => [parts[0]; 6],
            6 => [parts[0], parts[1], parts[2], parts[3], parts[4], parts[5]],
            n => {
                return Err(config_err(format!(
                    "absorption takes 1 or 6 values, got {n}"
                )))
            }
        }
    };
    let room = RoomSpec::new(
        args.room[0],
        args.room[1],
        args.room[2],
        absorption,
        args.speed_of_sound,
    )?;
    let order = match parse_max_order(&args.max_order)? {
        Some(o) => o,
        None => crate::rir::auto_max_order(&room),
    };
    let paths = enumerate_images(&room, args.source, order)?;
    let source = Transducer::omni(args.source);
    let mics: Vec<Transducer> = args.mics.iter().map(|&p| Transducer::omni(p)).collect();
    let params = RenderParams {
        fs: args.fs,
        kernel_taps: args.taps,
        speed_of_sound: args.speed_of_sound,
    };
    let rir = render_rir(&paths, &source, &mics, &params)?;

    let t60 = match rt60_estimate(&rir) {
        Ok(v) => format!("{v:.4}"),
        Err(Error::InsufficientDecay(_)) => "unmeasurable".into(),
        Err(e) => return Err(e),
    };
    // Float WAV samples clip outside [-1, 1), so store a normalized copy
    // and report the gain needed to undo it.
    let peak = rir
        .channels
        .iter()
        .flat_map(|c| &c.samples)
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let gain = if peak > 0.9 { 0.9 / peak } else { 1.0 };
    let wav = WavFile::from_signal(&rir.scaled(gain), SampleFormat::Float32)?;
    write_wav(&args.out, &wav)?;

    println!(
        "rir={} channels={} length={} order={order} paths={} t60={t60} normalization={gain}",
        args.out.display(),
        rir.channel_count(),
        rir.len(),
        paths.len()
    );
    for (i, (ch, mic)) in rir.channels.iter().zip(&args.mics).enumerate() {
        let d = ((args.source[0] - mic[0]).powi(2)
            + (args.source[1] - mic[1]).powi(2)
            + (args.source[2] - mic[2]).powi(2))
        .sqrt();
        println!(
            "mic={i} distance_m={d:.4} direct_delay_samples={:.3}",
            peak_delay_samples(&ch.samples, args.taps)
        );
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    let labels = manifest.labels();
    let mut eers = Vec::new();
    for path in &args.scores {
        let scores = read_score_file(path)?;
        let trials = join_scores(&scores, &labels)?;
        let report = compute_eer(&trials)?;
        println!(
            "scores={} eer={:.6} threshold={:.6} genuine={} replay={}",
            path.display(),
            report.eer,
            report.threshold,
            report.n_genuine,
            report.n_replay
        );
        eers.push(report.eer);
    }
    if eers.len() > 1 {
        let (mean, hw) = confidence_interval(&eers, 0.95)?;
        println!("mean_eer={mean:.6} ci95_half_width={hw:.6} runs={}", eers.len());
    }
    Ok(())
}

fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    let constraints = load_run_config(args.config.as_deref())?.dataset.constraints;
    let (genuine, replay) = audit_manifest(&manifest, &constraints).map_err(|e| {
        Error::BadManifest {
            path: args.manifest.clone(),
            reason: e.to_string(),
        }
    })?;

    let mut rates: Vec<u32> = manifest.records.iter().map(|r| r.sample_rate).collect();
    rates.sort_unstable();
    rates.dedup();
    let rates: Vec<String> = rates.iter().map(|r| r.to_string()).collect();
    let utterances = manifest
        .records
        .iter()
        .map(|r| r.seed)
        .collect::<std::collections::HashSet<_>>()
        .len();
    let (snr_min, snr_max) = manifest.records.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), r| (lo.min(r.snr_db), hi.max(r.snr_db)),
    );
    let mut speakers: Vec<(String, usize)> = Vec::new();
    for r in &manifest.records {
        if let Some(id) = &r.loudspeaker_id {
            match speakers.iter_mut().find(|(s, _)| s == id) {
                Some((_, n)) => *n += 1,
                None => speakers.push((id.clone(), 1)),
            }
        }
    }
    speakers.sort();
    let speakers: Vec<String> = speakers
        .into_iter()
        .map(|(id, n)| format!("{id}:{n}"))
        .collect();

    println!(
        "trials={} genuine={genuine} replay={replay} utterances={utterances} rates={} \
         snr_min={snr_min:.3} snr_max={snr_max:.3} loudspeakers={} audit=ok",
        manifest.records.len(),
        rates.join("|"),
        speakers.join("|")
    );
    Ok(())
}

/// Entry point for the binary: returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let usage = !matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if usage { 1 } else { 0 };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init()
        .ok();
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Rir(a) => cmd_rir(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

//! End-to-end runs of the `replaysim` binary: subcommand behavior, exit
//! codes, determinism, and the stdout contract.

use std::path::Path;
use std::process::{Command, Output};

use replaysim::demo::{make_demo_corpus, DemoSpec};
use replaysim::scenario::read_manifest;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_replaysim"));
    c.env_remove("REPLAYSIM_CORPUS_ROOT");
    c
}

fn small_corpus(dir: &Path, grids: usize) {
    let spec = DemoSpec {
        speech_files: 2,
        noise_files: 2,
        grid_files: grids,
        seconds: 0.6,
        ..DemoSpec::default()
    };
    make_demo_corpus(dir, &spec).unwrap();
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of `key=` in a `key=value` token stream.
fn field<'a>(line: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}=");
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("missing {key}= in {line:?}"))
}

fn generate(corpus: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args([
            "generate",
            "--corpus-root",
            corpus.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--utterances",
            "2",
            "--clip-seconds",
            "0.5",
            "--max-order",
            "3",
            "--sample-rates",
            "48000",
        ])
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn generate_writes_dataset_and_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus, 2);
    let out = tmp.path().join("run");

    let res = generate(&corpus, &out, &["--seed", "5"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let line = stdout_str(&res);
    assert_eq!(field(&line, "trials"), "6");
    assert_eq!(field(&line, "genuine"), "2");
    assert_eq!(field(&line, "replay"), "4");

    assert!(out.join("manifest.csv").is_file());
    assert!(out.join("audio/48000/u000_gen.wav").is_file());
    assert!(out.join("audio/48000/u001_rep1.wav").is_file());
    let snapshot = std::fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    for expect in ["master_seed = 5", "utterances = 2", "clip_seconds = 0.5", "speech_dir"] {
        assert!(snapshot.contains(expect), "snapshot missing {expect}");
    }
}

#[test]
fn same_seed_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus, 2);

    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(generate(&corpus, &a, &["--seed", "9", "--jobs", "1"]).status.success());
    assert!(generate(&corpus, &b, &["--seed", "9", "--jobs", "4"]).status.success());

    for rel in ["manifest.csv", "audio/48000/u000_gen.wav", "audio/48000/u001_rep1.wav"] {
        let fa = std::fs::read(a.join(rel)).unwrap();
        let fb = std::fs::read(b.join(rel)).unwrap();
        assert_eq!(fa, fb, "{rel} differs between jobs=1 and jobs=4");
    }
}

#[test]
fn noise_mode_flag_changes_only_noise_fields_and_audio() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus, 2);

    let (a, b) = (tmp.path().join("diff"), tmp.path().join("omni"));
    assert!(generate(&corpus, &a, &["--noise-mode", "diffuse"]).status.success());
    assert!(generate(&corpus, &b, &["--noise-mode", "omni"]).status.success());

    let ma = std::fs::read_to_string(a.join("manifest.csv")).unwrap();
    let mb = std::fs::read_to_string(b.join("manifest.csv")).unwrap();
    let data = |text: &str| -> Vec<String> {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .map(String::from)
            .collect()
    };
    let (la, lb) = (data(&ma), data(&mb));
    assert_eq!(la.len(), lb.len());
    let col = la[0].split(',').position(|c| c == "noise_mode").unwrap();
    for (ra, rb) in la.iter().zip(&lb).skip(1) {
        let fa: Vec<&str> = ra.split(',').collect();
        let fb: Vec<&str> = rb.split(',').collect();
        assert_eq!(fa[col], "diffuse");
        assert_eq!(fb[col], "omnidirectional");
        for (i, (va, vb)) in fa.iter().zip(&fb).enumerate() {
            if i != col {
                assert_eq!(va, vb, "column {i} differs between noise modes");
            }
        }
    }
    let wa = std::fs::read(a.join("audio/48000/u000_gen.wav")).unwrap();
    let wb = std::fs::read(b.join("audio/48000/u000_gen.wav")).unwrap();
    assert_ne!(wa, wb, "audio should differ between noise modes");
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus, 2);
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "corpus_root = {:?}\nmaster_seed = 3\nutterances = 4\nclip_seconds = 0.5\n\
             sample_rates = [48000]\nmax_order = 3\n",
            corpus.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = tmp.path().join("run");

    let res = bin()
        .args(["generate", "--config", cfg.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap(), "--utterances", "1"])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(field(&stdout_str(&res), "trials"), "3");
    let snapshot = std::fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    assert!(snapshot.contains("utterances = 1"), "flag should win over file");
    assert!(snapshot.contains("master_seed = 3"), "file value should survive");
}

#[test]
fn corpus_root_env_var_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus, 2);
    let out = tmp.path().join("run");

    let res = bin()
        .env("REPLAYSIM_CORPUS_ROOT", &corpus)
        .args(["generate", "--out", out.to_str().unwrap()])
        .args(["--utterances", "1", "--clip-seconds", "0.5"])
        .args(["--max-order", "3", "--sample-rates", "48000"])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(field(&stdout_str(&res), "trials"), "3");
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");

    // 1: configuration errors, including usage errors.
    let res = bin().args(["generate", "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(res.status.code(), Some(1), "missing corpus root");
    let res = bin()
        .args(["generate", "--corpus-root", "/nonexistent", "--out"])
        .arg(&out)
        .args(["--sample-rates", "44100"])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1), "unsupported rate");
    let res = bin().args(["generate", "--bogus"]).output().unwrap();
    assert_eq!(res.status.code(), Some(1), "unknown flag");

    // 2: unreadable corpus.
    let res = bin()
        .args(["generate", "--corpus-root", "/nonexistent", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2), "missing corpus dir");

    // 0: help.
    let res = bin().arg("--help").output().unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert!(stdout_str(&res).contains("generate"));
}

#[test]
fn rir_reports_geometry_consistent_delay_and_t60() {
    let tmp = tempfile::tempdir().unwrap();
    let wav = tmp.path().join("rir.wav");
    let args = |absorption: &str, extra: &[&str]| {
        let mut c = bin();
        c.args(["rir", "--room", "4,5,3", "--source", "1,1,1"])
            .args(["--mic", "2.5,3,1.5", "--absorption", absorption])
            .args(["--out", wav.to_str().unwrap()])
            .args(extra);
        c
    };

    // Anechoic: one path, delay equals distance/c in samples.
    let res = args("1.0", &["--max-order", "0"]).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = stdout_str(&res);
    let line = text.lines().find(|l| l.starts_with("mic=0")).unwrap();
    let delay: f64 = field(line, "direct_delay_samples").parse().unwrap();
    let expected = (2.5495097567963922f64 / 343.0) * 48_000.0;
    assert!(
        (delay - expected).abs() <= 0.1,
        "delay {delay} vs geometric {expected}"
    );
    assert!(wav.is_file());

    // More absorption decays faster.
    let t60_of = |absorption: &str| -> f64 {
        let res = args(absorption, &[]).output().unwrap();
        assert!(res.status.success());
        field(stdout_str(&res).lines().next().unwrap(), "t60").parse().unwrap()
    };
    let (live, dead) = (t60_of("0.1"), t60_of("0.6"));
    assert!(
        live > dead && dead > 0.0,
        "t60 should fall with absorption: {live} vs {dead}"
    );
}

#[test]
fn eval_scores_manifest_and_flags_unmatched_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus, 2);
    let out = tmp.path().join("run");
    assert!(generate(&corpus, &out, &[]).status.success());

    let manifest = read_manifest(&out.join("manifest.csv")).unwrap();
    let mut perfect = String::from("trial_id,score\n");
    let mut constant = String::new();
    for r in &manifest.records {
        let s = match r.label {
            replaysim::metrics::TrialLabel::Genuine => 1.0,
            replaysim::metrics::TrialLabel::Replay => 0.0,
        };
        perfect.push_str(&format!("{},{s}\n", r.trial_id));
        constant.push_str(&format!("{},0.5\n", r.trial_id));
    }
    let pf = tmp.path().join("perfect.csv");
    let cf = tmp.path().join("constant.csv");
    std::fs::write(&pf, perfect).unwrap();
    std::fs::write(&cf, constant).unwrap();

    let res = bin()
        .args(["eval", "--manifest"])
        .arg(out.join("manifest.csv"))
        .args([&pf, &cf])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = stdout_str(&res);
    let mut lines = text.lines();
    let eer0: f64 = field(lines.next().unwrap(), "eer").parse().unwrap();
    let eer1: f64 = field(lines.next().unwrap(), "eer").parse().unwrap();
    assert_eq!(eer0, 0.0);
    assert_eq!(eer1, 0.5);
    let agg = lines.next().unwrap();
    let mean: f64 = field(agg, "mean_eer").parse().unwrap();
    assert!((mean - 0.25).abs() < 1e-9);
    assert_eq!(field(agg, "runs"), "2");

    // Score rows naming unknown trials exit 4 and list the offenders.
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "u999_gen,0.5\n").unwrap();
    let res = bin()
        .args(["eval", "--manifest"])
        .arg(out.join("manifest.csv"))
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("u999_gen"));
}

#[test]
fn inspect_summarizes_and_audits() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus, 3);
    let out = tmp.path().join("run");
    assert!(generate(&corpus, &out, &[]).status.success());

    let res = bin()
        .args(["inspect", "--manifest"])
        .arg(out.join("manifest.csv"))
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let line = stdout_str(&res);
    assert_eq!(field(&line, "trials"), "8");
    assert_eq!(field(&line, "genuine"), "2");
    assert_eq!(field(&line, "replay"), "6");
    assert_eq!(field(&line, "utterances"), "2");
    assert_eq!(field(&line, "rates"), "48000");
    assert_eq!(field(&line, "audit"), "ok");
    assert_eq!(field(&line, "loudspeakers"), "spk0:2|spk1:2|spk2:2");

    // A corrupted row fails the audit with exit 2.
    let text = std::fs::read_to_string(out.join("manifest.csv")).unwrap();
    let broken = text.replacen(",genuine,", ",replay,", 1);
    let bad = tmp.path().join("broken.csv");
    std::fs::write(&bad, broken).unwrap();
    let res = bin().args(["inspect", "--manifest"]).arg(&bad).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
}

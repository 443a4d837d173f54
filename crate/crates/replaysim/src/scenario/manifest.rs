//! The trial manifest: one delimiter-separated row per emitted trial file,
//! with enough flattened geometry to re-validate every placement
//! constraint offline.
//!
//! Layout: `#`-prefixed `key = value` metadata lines, a fixed header row,
//! then comma-separated data rows. Floats use the shortest round-tripping
//! decimal form, so read-after-write reproduces values exactly.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::str::FromStr;

use crate::directivity::PatternKind;
use crate::error::{Error, Result};
use crate::metrics::TrialLabel;
use crate::noise::NoiseMode;
use crate::rir::RoomSpec;
use crate::scenario::chains::SpoofingConfig;
use crate::scenario::scene::{ArrayGeometry, RoomChoice, Scene, SceneConstraints};

/// Manifest column order. Kept stable; readers reject any other header.
pub const COLUMNS: [&str; 47] = [
    "trial_id",
    "label",
    "loudspeaker_id",
    "snr_db",
    "sample_rate",
    "seed",
    "genuine_room",
    "spoofing_mode",
    "noise_mode",
    "wav_path",
    "room_a_w",
    "room_a_l",
    "room_a_h",
    "room_a_abs0",
    "room_a_abs1",
    "room_a_abs2",
    "room_a_abs3",
    "room_a_abs4",
    "room_a_abs5",
    "room_b_w",
    "room_b_l",
    "room_b_h",
    "room_b_abs0",
    "room_b_abs1",
    "room_b_abs2",
    "room_b_abs3",
    "room_b_abs4",
    "room_b_abs5",
    "tlk_x",
    "tlk_y",
    "tlk_z",
    "spf_x",
    "spf_y",
    "spf_z",
    "spk_x",
    "spk_y",
    "spk_z",
    "asv_x",
    "asv_y",
    "asv_z",
    "asv_axis_az",
    "mic_spacing",
    "mic_count",
    "talker_az",
    "talker_el",
    "spk_az",
    "spk_el",
];

/// One manifest row: a labeled trial file plus its full scene geometry.
///
/// Directivity patterns are engine-wide (cardioid talker, omni
/// microphones) and are not serialized per row; reading a manifest
/// reconstructs scenes with those patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: String,
    pub label: TrialLabel,
    pub loudspeaker_id: Option<String>,
    pub snr_db: f64,
    pub sample_rate: u32,
    pub seed: u64,
    pub genuine_room: RoomChoice,
    pub spoofing_mode: SpoofingConfig,
    pub noise_mode: NoiseMode,
    /// WAV path relative to the manifest's directory.
    pub wav_path: String,
    pub scene: Scene,
}

impl TrialRecord {
    /// Replay rows carry a loudspeaker id; genuine rows must not.
    pub fn check_label_invariant(&self) -> Result<()> {
        match (self.label, &self.loudspeaker_id) {
            (TrialLabel::Replay, None) => Err(Error::InvalidArgument(format!(
                "replay trial {} has no loudspeaker id",
                self.trial_id
            ))),
            (TrialLabel::Genuine, Some(id)) => Err(Error::InvalidArgument(format!(
                "genuine trial {} carries loudspeaker id {id:?}",
                self.trial_id
            ))),
            _ => Ok(()),
        }
    }
}

/// A parsed manifest: metadata plus rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub meta: Vec<(String, String)>,
    pub records: Vec<TrialRecord>,
}

impl Manifest {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Label of every trial id, for joining score files.
    pub fn labels(&self) -> HashMap<String, TrialLabel> {
        self.records
            .iter()
            .map(|r| (r.trial_id.clone(), r.label))
            .collect()
    }
}

fn row_fields(r: &TrialRecord) -> Vec<String> {
    let s = &r.scene;
    let a = &s.room_env_a;
    let b = &s.room_env_b;
    let mut f = vec![
        r.trial_id.clone(),
        r.label.to_string(),
        r.loudspeaker_id.clone().unwrap_or_default(),
        r.snr_db.to_string(),
        r.sample_rate.to_string(),
        r.seed.to_string(),
        r.genuine_room.to_string(),
        r.spoofing_mode.to_string(),
        r.noise_mode.to_string(),
        r.wav_path.clone(),
    ];
    for room in [a, b] {
        f.push(room.width.to_string());
        f.push(room.length.to_string());
        f.push(room.height.to_string());
        for v in room.absorption {
            f.push(v.to_string());
        }
    }
    for p in [s.p_tlk, s.p_spf, s.p_spk, s.asv_array.center] {
        for v in p {
            f.push(v.to_string());
        }
    }
    f.push(s.asv_array.axis_azimuth.to_string());
    f.push(s.asv_array.spacing.to_string());
    f.push(s.asv_array.mic_count.to_string());
    for v in [
        s.talker_azimuth,
        s.talker_elevation,
        s.speaker_azimuth,
        s.speaker_elevation,
    ] {
        f.push(v.to_string());
    }
    f
}

/// Writes a manifest file. `meta` pairs become `# key = value` lines.
pub fn write_manifest(
    path: impl AsRef<Path>,
    records: &[TrialRecord],
    meta: &[(String, String)],
) -> Result<()> {
    let path = path.as_ref();
    for r in records {
        r.check_label_invariant()?;
    }
    let mut out = String::from("# replaysim trial manifest\n");
    for (k, v) in meta {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in records {
        let fields = row_fields(r);
        for f in &fields {
            if f.contains(',') || f.contains('\n') {
                return Err(Error::InvalidArgument(format!(
                    "manifest field {f:?} contains a delimiter"
                )));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

struct RowParser<'a> {
    fields: Vec<&'a str>,
    next: usize,
    path: &'a Path,
    line_no: usize,
}

impl<'a> RowParser<'a> {
    fn bad(&self, reason: String) -> Error {
        Error::BadManifest {
            path: self.path.to_path_buf(),
            reason: format!("line {}: {reason}", self.line_no),
        }
    }

    fn field(&mut self) -> &'a str {
        let f = self.fields[self.next];
        self.next += 1;
        f
    }

    fn parse<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let raw = self.field();
        raw.parse().map_err(|_| self.bad(format!("bad {what}: {raw:?}")))
    }

    fn f64_triplet(&mut self, what: &str) -> Result<[f64; 3]> {
        Ok([self.parse(what)?, self.parse(what)?, self.parse(what)?])
    }

    fn room(&mut self, speed_of_sound: f64) -> Result<RoomSpec> {
        let dims = self.f64_triplet("room dimension")?;
        let mut absorption = [0.0; 6];
        for a in &mut absorption {
            *a = self.parse("absorption")?;
        }
        RoomSpec::new(dims[0], dims[1], dims[2], absorption, speed_of_sound)
            .map_err(|e| self.bad(format!("bad room: {e}")))
    }
}

fn parse_row(parser: &mut RowParser) -> Result<TrialRecord> {
    let trial_id = parser.field().to_owned();
    let label: TrialLabel = parser.parse("label")?;
    let ls = parser.field();
    let loudspeaker_id = if ls.is_empty() {
        None
    } else {
        Some(ls.to_owned())
    };
    let snr_db = parser.parse("snr_db")?;
    let sample_rate = parser.parse("sample_rate")?;
    let seed = parser.parse("seed")?;
    let genuine_room = parser.parse("genuine_room")?;
    let spoofing_mode = parser.parse("spoofing_mode")?;
    let noise_mode = parser.parse("noise_mode")?;
    let wav_path = parser.field().to_owned();

    let room_env_a = parser.room(343.0)?;
    let room_env_b = parser.room(343.0)?;
    let p_tlk = parser.f64_triplet("talker position")?;
    let p_spf = parser.f64_triplet("spoof mic position")?;
    let p_spk = parser.f64_triplet("loudspeaker position")?;
    let center = parser.f64_triplet("array center")?;
    let axis_azimuth = parser.parse("array azimuth")?;
    let spacing = parser.parse("mic spacing")?;
    let mic_count: usize = parser.parse("mic count")?;
    let talker_azimuth = parser.parse("talker azimuth")?;
    let talker_elevation = parser.parse("talker elevation")?;
    let speaker_azimuth = parser.parse("speaker azimuth")?;
    let speaker_elevation = parser.parse("speaker elevation")?;

    let record = TrialRecord {
        trial_id,
        label,
        loudspeaker_id: loudspeaker_id.clone(),
        snr_db,
        sample_rate,
        seed,
        genuine_room,
        spoofing_mode,
        noise_mode,
        wav_path,
        scene: Scene {
            room_env_a,
            room_env_b,
            p_tlk,
            p_spf,
            p_spk,
            asv_array: ArrayGeometry {
                center,
                axis_azimuth,
                spacing,
                mic_count,
            },
            talker_pattern: PatternKind::Cardioid,
            talker_azimuth,
            talker_elevation,
            spf_mic_pattern: PatternKind::Omnidirectional,
            asv_mic_patterns: vec![PatternKind::Omnidirectional; mic_count],
            speaker_azimuth,
            speaker_elevation,
            loudspeaker_grid: loudspeaker_id,
            seed,
        },
    };
    record
        .check_label_invariant()
        .map_err(|e| parser.bad(e.to_string()))?;
    Ok(record)
}

/// Reads and validates a manifest file.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut meta = Vec::new();
    let mut records = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                meta.push((k.trim().to_owned(), v.trim().to_owned()));
            }
            continue;
        }
        if !seen_header {
            if line != COLUMNS.join(",") {
                return Err(Error::BadManifest {
                    path: path.to_path_buf(),
                    reason: format!("line {line_no}: unexpected header {line:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != COLUMNS.len() {
            return Err(Error::BadManifest {
                path: path.to_path_buf(),
                reason: format!(
                    "line {line_no}: {} fields, expected {}",
                    fields.len(),
                    COLUMNS.len()
                ),
            });
        }
        let mut parser = RowParser {
            fields,
            next: 0,
            path,
            line_no,
        };
        records.push(parse_row(&mut parser)?);
    }
    if !seen_header {
        return Err(Error::BadManifest {
            path: path.to_path_buf(),
            reason: "missing header row".into(),
        });
    }
    Ok(Manifest { meta, records })
}

/// Re-validates every row: label invariant, unique (trial id, rate), and
/// all scene placement constraints. Returns (genuine, replay) row counts.
pub fn audit_manifest(
    manifest: &Manifest,
    constraints: &SceneConstraints,
) -> Result<(usize, usize)> {
    let mut seen = HashSet::new();
    let mut n_genuine = 0;
    let mut n_replay = 0;
    for r in &manifest.records {
        r.check_label_invariant()?;
        if !seen.insert((r.trial_id.clone(), r.sample_rate)) {
            return Err(Error::InvalidArgument(format!(
                "duplicate trial {} at {} Hz",
                r.trial_id, r.sample_rate
            )));
        }
        r.scene
            .validate(constraints)
            .map_err(|e| Error::InvalidArgument(format!("trial {}: {e}", r.trial_id)))?;
        match r.label {
            TrialLabel::Genuine => n_genuine += 1,
            TrialLabel::Replay => n_replay += 1,
        }
    }
    Ok((n_genuine, n_replay))
}

//! Scene sampling under the data-generation constraint table: two rooms,
//! a talker with a nearby spoofing microphone, a loudspeaker, and a
//! two-microphone ASV array shared by both rooms.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use crate::audio_io::RngStream;
use crate::directivity::{Direction, PatternKind};
use crate::error::{Error, Result};
use crate::rir::RoomSpec;

/// Rejection budget for one scene draw.
pub const MAX_REJECTIONS: u32 = 10_000;

/// Wall clearance for microphones, the spoofing microphone, and the
/// loudspeaker. Strictly-inside with numerical headroom; the talker has
/// its own 1 m clearance from the constraint table.
pub const WALL_MARGIN: f64 = 0.05;

/// Which room records the genuine class. The replay chain always plays
/// back in Env-B; the spoofing chain always records in Env-A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomChoice {
    EnvA,
    EnvB,
}

impl fmt::Display for RoomChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoomChoice::EnvA => "env_a",
            RoomChoice::EnvB => "env_b",
        })
    }
}

impl FromStr for RoomChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "env_a" => Ok(RoomChoice::EnvA),
            "env_b" => Ok(RoomChoice::EnvB),
            other => Err(Error::InvalidArgument(format!(
                "unknown room choice {other:?}"
            ))),
        }
    }
}

/// Sampling ranges and distance constraints for [`sample_scene`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConstraints {
    /// Room dimension bounds, per axis, meters.
    pub room_min: f64,
    pub room_max: f64,
    /// Per-surface absorption bounds.
    pub absorption_min: f64,
    pub absorption_max: f64,
    /// Lower bound on talker-to-array-center distance.
    pub min_talker_array_m: f64,
    /// Upper bound on talker-to-spoofing-mic distance.
    pub max_talker_spoof_m: f64,
    /// Lower bound on loudspeaker-to-array-center distance.
    pub min_speaker_array_m: f64,
    /// Talker clearance from every room surface.
    pub min_talker_surface_m: f64,
    pub mic_count: usize,
    /// Spacing between adjacent array microphones, meters.
    pub mic_spacing_m: f64,
    /// Half-range of the uniform aim jitter applied to the talker and
    /// loudspeaker boresights, degrees.
    pub aim_jitter_deg: f64,
}

impl Default for SceneConstraints {
    fn default() -> Self {
        SceneConstraints {
            room_min: 3.0,
            room_max: 6.0,
            absorption_min: 0.1,
            absorption_max: 0.6,
            min_talker_array_m: 1.0,
            max_talker_spoof_m: 1.0,
            min_speaker_array_m: 1.0,
            min_talker_surface_m: 1.0,
            mic_count: 2,
            mic_spacing_m: 0.05,
            aim_jitter_deg: 10.0,
        }
    }
}

impl SceneConstraints {
    /// Checks the feasible region is non-empty before any sampling starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleConstraints(msg));
        if !(self.room_min > 0.0 && self.room_max >= self.room_min) {
            return bad(format!(
                "room bounds [{}, {}] are not ordered and positive",
                self.room_min, self.room_max
            ));
        }
        if !(0.0 <= self.absorption_min
            && self.absorption_min <= self.absorption_max
            && self.absorption_max <= 1.0)
        {
            return bad(format!(
                "absorption bounds [{}, {}] must sit inside [0, 1]",
                self.absorption_min, self.absorption_max
            ));
        }
        if self.mic_count < 1 {
            return bad("need at least one array microphone".into());
        }
        if self.mic_spacing_m <= 0.0 {
            return bad(format!("mic spacing {} must be positive", self.mic_spacing_m));
        }
        if self.min_talker_surface_m < 0.0 {
            return bad("talker surface clearance must be nonnegative".into());
        }
        if self.room_min - 2.0 * self.min_talker_surface_m <= 0.0 {
            return bad(format!(
                "talker surface clearance {} m leaves no room inside a {} m room",
                self.min_talker_surface_m, self.room_min
            ));
        }
        if self.max_talker_spoof_m <= 0.0 {
            return bad("talker-to-spoof-mic bound must be positive".into());
        }
        let diag = 3.0_f64.sqrt() * self.room_max;
        if self.min_talker_array_m >= diag || self.min_speaker_array_m >= diag {
            return bad(format!(
                "separation bounds exceed the {diag:.2} m diagonal of the largest room"
            ));
        }
        let span = (self.mic_count - 1) as f64 * self.mic_spacing_m;
        if span + 2.0 * WALL_MARGIN >= self.room_min {
            return bad(format!(
                "array span {span} m does not fit in a {} m room",
                self.room_min
            ));
        }
        if !(0.0..90.0).contains(&self.aim_jitter_deg) {
            return bad(format!(
                "aim jitter {} deg must sit in [0, 90)",
                self.aim_jitter_deg
            ));
        }
        Ok(())
    }
}

/// A horizontal line array: equally spaced microphones through `center`
/// along azimuth `axis_azimuth`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub center: [f64; 3],
    pub axis_azimuth: f64,
    pub spacing: f64,
    pub mic_count: usize,
}

impl ArrayGeometry {
    pub fn mic_positions(&self) -> Vec<[f64; 3]> {
        let u = [self.axis_azimuth.cos(), self.axis_azimuth.sin(), 0.0];
        (0..self.mic_count)
            .map(|i| {
                let off = (i as f64 - (self.mic_count as f64 - 1.0) / 2.0) * self.spacing;
                [
                    self.center[0] + off * u[0],
                    self.center[1] + off * u[1],
                    self.center[2] + off * u[2],
                ]
            })
            .collect()
    }
}

/// A fully placed simulation scene. Positions are valid in both rooms
/// wherever a chain can use them in either (the talker and the array),
/// so the genuine-room switch never invalidates a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub room_env_a: RoomSpec,
    pub room_env_b: RoomSpec,
    pub p_tlk: [f64; 3],
    pub p_spf: [f64; 3],
    pub p_spk: [f64; 3],
    pub asv_array: ArrayGeometry,
    pub talker_pattern: PatternKind,
    pub talker_azimuth: f64,
    pub talker_elevation: f64,
    pub spf_mic_pattern: PatternKind,
    pub asv_mic_patterns: Vec<PatternKind>,
    pub speaker_azimuth: f64,
    pub speaker_elevation: f64,
    /// Loudspeaker grid id for replay trials; unset for genuine trials.
    pub loudspeaker_grid: Option<String>,
    pub seed: u64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl Scene {
    pub fn asv_center(&self) -> [f64; 3] {
        self.asv_array.center
    }

    pub fn mic_positions(&self) -> Vec<[f64; 3]> {
        self.asv_array.mic_positions()
    }

    pub fn talker_orientation(&self) -> Result<Direction> {
        Direction::new(self.talker_azimuth, self.talker_elevation)
    }

    pub fn speaker_orientation(&self) -> Result<Direction> {
        Direction::new(self.speaker_azimuth, self.speaker_elevation)
    }

    /// Re-checks every placement invariant against the constraint set.
    pub fn validate(&self, c: &SceneConstraints) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("invalid scene: {msg}")));
        let center = self.asv_center();
        if dist(self.p_tlk, center) <= c.min_talker_array_m {
            return bad(format!(
                "talker-to-array distance {:.3} m is not above {} m",
                dist(self.p_tlk, center),
                c.min_talker_array_m
            ));
        }
        if dist(self.p_tlk, self.p_spf) >= c.max_talker_spoof_m {
            return bad(format!(
                "talker-to-spoof-mic distance {:.3} m is not below {} m",
                dist(self.p_tlk, self.p_spf),
                c.max_talker_spoof_m
            ));
        }
        if dist(self.p_spk, center) <= c.min_speaker_array_m {
            return bad(format!(
                "loudspeaker-to-array distance {:.3} m is not above {} m",
                dist(self.p_spk, center),
                c.min_speaker_array_m
            ));
        }
        for (name, room) in [("Env-A", &self.room_env_a), ("Env-B", &self.room_env_b)] {
            if !room.contains(self.p_tlk, c.min_talker_surface_m) {
                return bad(format!(
                    "talker {:?} is within {} m of a {name} surface",
                    self.p_tlk, c.min_talker_surface_m
                ));
            }
            for m in self.mic_positions() {
                if !room.contains(m, WALL_MARGIN) {
                    return bad(format!("array microphone {m:?} is outside {name}"));
                }
            }
        }
        if !self.room_env_a.contains(self.p_spf, WALL_MARGIN) {
            return bad(format!("spoofing microphone {:?} is outside Env-A", self.p_spf));
        }
        if !self.room_env_b.contains(self.p_spk, WALL_MARGIN) {
            return bad(format!("loudspeaker {:?} is outside Env-B", self.p_spk));
        }
        if self.asv_mic_patterns.len() != self.asv_array.mic_count {
            return bad(format!(
                "{} mic patterns for {} microphones",
                self.asv_mic_patterns.len(),
                self.asv_array.mic_count
            ));
        }
        self.talker_orientation()?;
        self.speaker_orientation()?;
        Ok(())
    }
}

fn draw_room(rng: &mut impl Rng, c: &SceneConstraints) -> Result<RoomSpec> {
    let mut dim = [0.0; 3];
    for d in &mut dim {
        *d = rng.gen_range(c.room_min..=c.room_max);
    }
    let mut absorption = [0.0; 6];
    for a in &mut absorption {
        *a = rng.gen_range(c.absorption_min..=c.absorption_max);
    }
    RoomSpec::new(dim[0], dim[1], dim[2], absorption, 343.0)
}

fn draw_unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let az = rng.gen_range(0.0..TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * az.cos(), s * az.sin(), z]
}

/// Boresight from `from` toward `target` plus uniform angular jitter.
fn draw_aim(rng: &mut impl Rng, from: [f64; 3], target: [f64; 3], jitter_deg: f64) -> (f64, f64) {
    let v = [target[0] - from[0], target[1] - from[1], target[2] - from[2]];
    let norm = dist(from, target);
    let az = v[1].atan2(v[0]);
    let el = (v[2] / norm).asin();
    let j = jitter_deg.to_radians();
    let az = az + rng.gen_range(-j..=j);
    let el = (el + rng.gen_range(-j..=j)).clamp(-FRAC_PI_2, FRAC_PI_2);
    (az, el)
}

/// Samples one scene by rejection. All draws come from the stream derived
/// from `seed`, in a fixed order; a violated constraint discards the whole
/// partial scene and restarts, so any accepted scene is a pure function of
/// the seed and constraints.
pub fn sample_scene(seed: u64, c: &SceneConstraints) -> Result<Scene> {
    c.validate()?;
    let mut rng = RngStream::root(seed).child("scene").rng();
    let half_span = (c.mic_count - 1) as f64 * c.mic_spacing_m / 2.0;
    for _ in 0..MAX_REJECTIONS {
        let room_a = draw_room(&mut rng, c)?;
        let room_b = draw_room(&mut rng, c)?;
        let shared = [
            room_a.width.min(room_b.width),
            room_a.length.min(room_b.length),
            room_a.height.min(room_b.height),
        ];

        let s = c.min_talker_surface_m;
        let mut p_tlk = [0.0; 3];
        for (p, dim) in p_tlk.iter_mut().zip(shared) {
            *p = rng.gen_range(s..=dim - s);
        }

        let u = draw_unit_vector(&mut rng);
        let r = rng.gen_range(0.1 * c.max_talker_spoof_m..=0.95 * c.max_talker_spoof_m);
        let p_spf = [p_tlk[0] + r * u[0], p_tlk[1] + r * u[1], p_tlk[2] + r * u[2]];

        let m = WALL_MARGIN + half_span;
        let mut center = [0.0; 3];
        for (p, dim) in center.iter_mut().zip(shared) {
            *p = rng.gen_range(m..=dim - m);
        }
        let axis_azimuth = rng.gen_range(0.0..TAU);
        let asv_array = ArrayGeometry {
            center,
            axis_azimuth,
            spacing: c.mic_spacing_m,
            mic_count: c.mic_count,
        };

        let mut p_spk = [0.0; 3];
        for (p, dim) in p_spk.iter_mut().zip(room_b.dims()) {
            *p = rng.gen_range(WALL_MARGIN..=dim - WALL_MARGIN);
        }

        let geometry_ok = dist(p_tlk, center) > c.min_talker_array_m
            && dist(p_tlk, p_spf) < c.max_talker_spoof_m
            && dist(p_spk, center) > c.min_speaker_array_m
            && room_a.contains(p_spf, WALL_MARGIN)
            && asv_array
                .mic_positions()
                .iter()
                .all(|&p| room_a.contains(p, WALL_MARGIN) && room_b.contains(p, WALL_MARGIN));
        if !geometry_ok {
            continue;
        }

        // Aim draws only happen for accepted geometry, so the all-target
        // distances are nonzero here.
        let (talker_azimuth, talker_elevation) = draw_aim(&mut rng, p_tlk, center, c.aim_jitter_deg);
        let (speaker_azimuth, speaker_elevation) =
            draw_aim(&mut rng, p_spk, center, c.aim_jitter_deg);

        let scene = Scene {
            room_env_a: room_a,
            room_env_b: room_b,
            p_tlk,
            p_spf,
            p_spk,
            asv_array,
            talker_pattern: PatternKind::Cardioid,
            talker_azimuth,
            talker_elevation,
            spf_mic_pattern: PatternKind::Omnidirectional,
            asv_mic_patterns: vec![PatternKind::Omnidirectional; c.mic_count],
            speaker_azimuth,
            speaker_elevation,
            loudspeaker_grid: None,
            seed,
        };
        scene.validate(c)?;
        return Ok(scene);
    }
    Err(Error::SamplingRejected(MAX_REJECTIONS))
}

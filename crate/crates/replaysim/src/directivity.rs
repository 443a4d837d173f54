//! Directional behavior of talkers, microphones, and loudspeakers.
//!
//! Two families of models: analytic gains (omnidirectional, cardioid) that
//! scale a path by a frequency-independent factor, and measured grids that
//! filter a path with the impulse response captured nearest to the query
//! direction. Grids load from a structured text file standing in for SOFA
//! measurement sets.
//!
//! Coordinate convention, fixed for reproducibility: right-handed axes with
//! +x forward and +z up; azimuth counterclockwise from +x in the horizontal
//! plane, in [-pi, pi); elevation from the horizontal plane toward +z, in
//! [-pi/2, pi/2].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::{resample, MonoSignal};
use crate::error::{Error, Result};

/// A direction on the unit sphere in the convention above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    /// Canonicalizes the azimuth into [-pi, pi). The elevation must already
    /// be within [-pi/2, pi/2].
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !elevation.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "direction components must be finite, got ({azimuth}, {elevation})"
            )));
        }
        if !(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&elevation) {
            return Err(Error::InvalidArgument(format!(
                "elevation {elevation} outside [-pi/2, pi/2]"
            )));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut az = (azimuth + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
        if az >= std::f64::consts::PI {
            az = -std::f64::consts::PI;
        }
        Ok(Direction {
            azimuth: az,
            elevation,
        })
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Direction::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    /// Unit vector: x = cos el cos az, y = cos el sin az, z = sin el.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [ce * ca, ce * sa, se]
    }

    /// Direction of a nonzero vector.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cannot take the direction of vector {v:?}"
            )));
        }
        let elevation = (v[2] / norm).clamp(-1.0, 1.0).asin();
        let azimuth = v[1].atan2(v[0]);
        Direction::new(azimuth, elevation)
    }

    /// Great-circle angle to another direction, in [0, pi].
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }
}

/// Analytic pattern shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Omnidirectional,
    Cardioid,
}

/// A frequency-independent directional gain with a boresight orientation.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticPattern {
    pub kind: PatternKind,
    pub orientation: Direction,
}

impl AnalyticPattern {
    pub fn omni() -> Self {
        AnalyticPattern {
            kind: PatternKind::Omnidirectional,
            orientation: Direction::new(0.0, 0.0).unwrap(),
        }
    }

    pub fn cardioid(orientation: Direction) -> Self {
        AnalyticPattern {
            kind: PatternKind::Cardioid,
            orientation,
        }
    }

    /// Gain toward `d`: omni is 1 everywhere; cardioid is 0.5 (1 + cos g)
    /// with g the angle between `d` and the boresight.
    pub fn gain(&self, d: &Direction) -> f64 {
        match self.kind {
            PatternKind::Omnidirectional => 1.0,
            PatternKind::Cardioid => 0.5 * (1.0 + self.orientation.angle_to(d).cos()),
        }
    }
}

/// Gain of `pattern` toward `d`.
pub fn analytic_gain(pattern: &AnalyticPattern, d: &Direction) -> f64 {
    pattern.gain(d)
}

/// A measured directivity: impulse responses on a spherical grid of
/// directions, all at one sample rate and length.
#[derive(Debug, Clone)]
pub struct MeasuredGrid {
    pub name: String,
    pub fs: u32,
    pub entries: Vec<(Direction, Vec<f64>)>,
}

impl MeasuredGrid {
    /// Validates shared IR length/rate and distinct directions. A grid built
    /// in code may be as small as one entry; grid files require at least
    /// four (see [`load_grid`]).
    pub fn new(name: String, fs: u32, entries: Vec<(Direction, Vec<f64>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("measured grid entries"));
        }
        if fs == 0 {
            return Err(Error::InvalidArgument("grid fs must be nonzero".into()));
        }
        let ir_len = entries[0].1.len();
        if ir_len == 0 {
            return Err(Error::EmptyInput("measured grid impulse response"));
        }
        for (i, (d, ir)) in entries.iter().enumerate() {
            if ir.len() != ir_len {
                return Err(Error::InvalidArgument(format!(
                    "grid entry {i} has IR length {} but entry 0 has {ir_len}",
                    ir.len()
                )));
            }
            if ir.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "grid entry {i} contains a non-finite sample"
                )));
            }
            for (j, (e, _)) in entries.iter().enumerate().take(i) {
                if d.angle_to(e) < 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "grid entries {j} and {i} share a direction"
                    )));
                }
            }
        }
        Ok(MeasuredGrid { name, fs, entries })
    }

    pub fn ir_len(&self) -> usize {
        self.entries[0].1.len()
    }

    /// IR whose grid direction is nearest to `d` by great-circle angle;
    /// exact ties keep the lower list index.
    pub fn lookup(&self, d: &Direction) -> &[f64] {
        let mut best = 0;
        let mut best_angle = self.entries[0].0.angle_to(d);
        for (i, (dir, _)) in self.entries.iter().enumerate().skip(1) {
            let a = dir.angle_to(d);
            if a < best_angle {
                best_angle = a;
                best = i;
            }
        }
        &self.entries[best].1
    }

    /// Same grid with every IR resampled to `fs`.
    pub fn resampled(&self, fs: u32) -> Result<MeasuredGrid> {
        if fs == self.fs {
            return Ok(self.clone());
        }
        let entries = self
            .entries
            .iter()
            .map(|(d, ir)| {
                let sig = MonoSignal::new(ir.clone(), self.fs)?;
                Ok((*d, resample(&sig, fs)?.samples))
            })
            .collect::<Result<Vec<_>>>()?;
        MeasuredGrid::new(self.name.clone(), fs, entries)
    }
}

/// Looks up the nearest IR in `grid` for direction `d`.
pub fn grid_lookup<'g>(grid: &'g MeasuredGrid, d: &Direction) -> &'g [f64] {
    grid.lookup(d)
}

/// Azimuth/elevation of the vector `to - from`, expressed in the local frame
/// of an element whose boresight points along `frame_orientation`. In the
/// local frame the boresight is azimuth 0, elevation 0.
pub fn direction_between(
    from: [f64; 3],
    to: [f64; 3],
    frame_orientation: &Direction,
) -> Result<Direction> {
    let v = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm < 1e-12 {
        return Err(Error::CoincidentPoints(from));
    }
    Ok(world_to_local(v, frame_orientation))
}

/// Direction of the world vector `v` seen from the frame whose +x axis is
/// `frame_orientation`. Errors on a zero vector.
pub fn vector_in_frame(v: [f64; 3], frame_orientation: &Direction) -> Result<Direction> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm < 1e-12 {
        return Err(Error::CoincidentPoints([0.0; 3]));
    }
    Ok(world_to_local(v, frame_orientation))
}

/// Rotates a world vector into the frame whose +x axis is `frame`:
/// local = Ry(el) Rz(-az) world.
fn world_to_local(v: [f64; 3], frame: &Direction) -> Direction {
    let (sa, ca) = frame.azimuth.sin_cos();
    let (se, ce) = frame.elevation.sin_cos();
    // Rz(-az)
    let x1 = ca * v[0] + sa * v[1];
    let y1 = -sa * v[0] + ca * v[1];
    let z1 = v[2];
    // Ry(el)
    let x2 = ce * x1 + se * z1;
    let y2 = y1;
    let z2 = -se * x1 + ce * z1;
    Direction::from_vector([x2, y2, z2]).expect("rotation preserves the norm")
}

#[derive(Serialize, Deserialize)]
struct GridEntryDoc {
    azimuth_deg: f64,
    elevation_deg: f64,
    ir: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    name: String,
    fs: u32,
    entries: Vec<GridEntryDoc>,
}

fn bad_grid(path: &Path, reason: impl Into<String>) -> Error {
    Error::BadGrid {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Loads a directivity-grid file. Files must carry at least 4 entries; IR
/// lengths must match; directions must be distinct.
pub fn load_grid(path: impl AsRef<Path>) -> Result<MeasuredGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: GridDoc = toml::from_str(&text).map_err(|e| bad_grid(path, e.to_string()))?;
    if doc.entries.len() < 4 {
        return Err(bad_grid(
            path,
            format!("grid files need at least 4 entries, found {}", doc.entries.len()),
        ));
    }
    let entries = doc
        .entries
        .iter()
        .map(|e| {
            let d = Direction::from_degrees(e.azimuth_deg, e.elevation_deg)
                .map_err(|err| bad_grid(path, err.to_string()))?;
            Ok((d, e.ir.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    MeasuredGrid::new(doc.name, doc.fs, entries).map_err(|e| bad_grid(path, e.to_string()))
}

/// Loads a grid and resamples it to `fs` if required.
pub fn load_grid_at(path: impl AsRef<Path>, fs: u32) -> Result<MeasuredGrid> {
    load_grid(path.as_ref())?.resampled(fs)
}

/// Writes a grid in the directivity-grid file format.
pub fn save_grid(path: impl AsRef<Path>, grid: &MeasuredGrid) -> Result<()> {
    let path = path.as_ref();
    let doc = GridDoc {
        name: grid.name.clone(),
        fs: grid.fs,
        entries: grid
            .entries
            .iter()
            .map(|(d, ir)| GridEntryDoc {
                azimuth_deg: d.azimuth.to_degrees(),
                elevation_deg: d.elevation.to_degrees(),
                ir: ir.clone(),
            })
            .collect(),
    };
    let text = toml::to_string(&doc)
        .map_err(|e| Error::InvalidArgument(format!("grid serialization failed: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

//! Shoebox image-source simulation.
//!
//! A room is an axis-aligned box with per-surface absorption. Reflections
//! are modeled by mirroring the source across wall planes: the image on
//! lattice coordinates (n, q) per axis sits at 2 n L + (1 - 2q) s, reflects
//! |2n - q| times off the walls of that axis, and carries the product of
//! sqrt(1 - absorption) over every hit. Rendering places a windowed-sinc
//! fractional-delay kernel per path, scaled by the 1/d spreading law and the
//! source/microphone directivities, optionally convolved with a measured
//! directivity impulse response.
//!
//! Departure directions are evaluated at the true source by unfolding the
//! image ray: the component on axis i flips sign when the image parity q_i
//! is odd. Departure and arrival are computed per (path, microphone) pair.

use crate::directivity::{vector_in_frame, Direction, MeasuredGrid, PatternKind};
use crate::dsp::{fractional_delay_kernel, MonoSignal, MultichannelSignal};
use crate::error::{Error, Result};

/// Default reflection-order cap; see [`auto_max_order`].
pub const MAX_ORDER_CAP: u32 = 17;

/// Reflection gains below this (-60 dB) are considered inaudible.
const GAIN_FLOOR: f64 = 1e-3;

/// An axis-aligned shoebox room.
///
/// Surfaces index as 0: x = 0, 1: x = width, 2: y = 0, 3: y = length,
/// 4: z = 0 (floor), 5: z = height (ceiling).
#[derive(Debug, Clone, PartialEq)]
pub struct RoomSpec {
    pub width: f64,
    pub length: f64,
    pub height: f64,
    pub absorption: [f64; 6],
    pub speed_of_sound: f64,
}

impl RoomSpec {
    pub fn new(
        width: f64,
        length: f64,
        height: f64,
        absorption: [f64; 6],
        speed_of_sound: f64,
    ) -> Result<Self> {
        for (d, name) in [(width, "width"), (length, "length"), (height, "height")] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "room {name} must be positive, got {d}"
                )));
            }
        }
        for (i, &a) in absorption.iter().enumerate() {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "absorption[{i}] must be in (0, 1], got {a}"
                )));
            }
        }
        if !(speed_of_sound.is_finite() && speed_of_sound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "speed of sound must be positive, got {speed_of_sound}"
            )));
        }
        Ok(RoomSpec {
            width,
            length,
            height,
            absorption,
            speed_of_sound,
        })
    }

    /// Uniform absorption on all six surfaces.
    pub fn uniform(width: f64, length: f64, height: f64, absorption: f64) -> Result<Self> {
        RoomSpec::new(width, length, height, [absorption; 6], 343.0)
    }

    pub fn dims(&self) -> [f64; 3] {
        [self.width, self.length, self.height]
    }

    /// True when `p` is strictly inside, with `margin` clearance from every
    /// surface.
    pub fn contains(&self, p: [f64; 3], margin: f64) -> bool {
        let dims = self.dims();
        (0..3).all(|i| p[i] > margin && p[i] < dims[i] - margin)
    }

    /// Reflection coefficient sqrt(1 - absorption) of surface `i`.
    fn beta(&self, surface: usize) -> f64 {
        (1.0 - self.absorption[surface]).max(0.0).sqrt()
    }
}

/// One mirrored source. Per-microphone quantities (distance, directions)
/// derive from the image position at render time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePath {
    pub image_position: [f64; 3],
    pub reflection_order: u32,
    pub cumulative_reflection_gain: f64,
    /// Per axis: true when the source was mirrored an odd number of times,
    /// flipping that component of the departure direction.
    pub parity: [bool; 3],
}

impl ImagePath {
    pub fn distance_to(&self, mic: [f64; 3]) -> f64 {
        let d = [
            self.image_position[0] - mic[0],
            self.image_position[1] - mic[1],
            self.image_position[2] - mic[2],
        ];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// World-frame departure vector at the true source for the ray that
    /// reaches `mic`: the image-to-mic ray folded back through the mirrors.
    pub fn departure_vector(&self, mic: [f64; 3]) -> [f64; 3] {
        let mut v = [
            mic[0] - self.image_position[0],
            mic[1] - self.image_position[1],
            mic[2] - self.image_position[2],
        ];
        for (axis, flip) in self.parity.iter().enumerate() {
            if *flip {
                v[axis] = -v[axis];
            }
        }
        v
    }

    /// World-frame vector from `mic` toward the apparent source.
    pub fn arrival_vector(&self, mic: [f64; 3]) -> [f64; 3] {
        [
            self.image_position[0] - mic[0],
            self.image_position[1] - mic[1],
            self.image_position[2] - mic[2],
        ]
    }
}

/// All image sources with reflection order at most `max_order`, in a
/// canonical order (ascending reflection order, then position).
pub fn enumerate_images(
    room: &RoomSpec,
    source: [f64; 3],
    max_order: u32,
) -> Result<Vec<ImagePath>> {
    if !room.contains(source, 0.0) {
        return Err(Error::SourceOutsideRoom(source));
    }
    let dims = room.dims();
    let n = max_order as i64;
    let mut paths = Vec::new();
    // Axis lattice m = 2k - q covers each reflection count |m| exactly once.
    let mut axis_terms: [Vec<(i64, i64, u32)>; 3] = Default::default();
    for (axis, terms) in axis_terms.iter_mut().enumerate() {
        for m in -n..=n {
            let q = m.rem_euclid(2);
            let k = (m + q) / 2;
            let _ = axis;
            terms.push((k, q, m.unsigned_abs() as u32));
        }
    }
    for &(kx, qx, rx) in &axis_terms[0] {
        for &(ky, qy, ry) in &axis_terms[1] {
            if rx + ry > max_order {
                continue;
            }
            for &(kz, qz, rz) in &axis_terms[2] {
                let order = rx + ry + rz;
                if order > max_order {
                    continue;
                }
                let ks = [kx, ky, kz];
                let qs = [qx, qy, qz];
                let mut pos = [0.0; 3];
                let mut gain = 1.0;
                for axis in 0..3 {
                    pos[axis] = 2.0 * ks[axis] as f64 * dims[axis]
                        + (1.0 - 2.0 * qs[axis] as f64) * source[axis];
                    // Lower-surface hits: |k - q|; upper-surface hits: |k|.
                    let lower_hits = (ks[axis] - qs[axis]).unsigned_abs() as u32;
                    let upper_hits = ks[axis].unsigned_abs() as u32;
                    gain *= room.beta(2 * axis).powi(lower_hits as i32)
                        * room.beta(2 * axis + 1).powi(upper_hits as i32);
                }
                paths.push(ImagePath {
                    image_position: pos,
                    reflection_order: order,
                    cumulative_reflection_gain: gain,
                    parity: [qx == 1, qy == 1, qz == 1],
                });
            }
        }
    }
    paths.sort_by(|a, b| {
        a.reflection_order.cmp(&b.reflection_order).then(
            a.image_position
                .iter()
                .zip(&b.image_position)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal),
        )
    });
    Ok(paths)
}

/// Reflection-order cap for a room: 17, or less when the strongest possible
/// reflection product already falls below -60 dB.
pub fn auto_max_order(room: &RoomSpec) -> u32 {
    let beta_max = (0..6).map(|i| room.beta(i)).fold(0.0, f64::max);
    for order in 0..MAX_ORDER_CAP {
        if beta_max.powi(order as i32 + 1) < GAIN_FLOOR {
            return order;
        }
    }
    MAX_ORDER_CAP
}

/// Directional model of a source or microphone.
#[derive(Debug, Clone)]
pub enum DirectivityModel<'a> {
    /// Frequency-independent gain; boresight is the transducer orientation.
    Analytic(PatternKind),
    /// Per-direction impulse response from a measured grid.
    Measured(&'a MeasuredGrid),
}

/// A positioned, oriented transducer.
#[derive(Debug, Clone)]
pub struct Transducer<'a> {
    pub position: [f64; 3],
    pub orientation: Direction,
    pub model: DirectivityModel<'a>,
}

impl<'a> Transducer<'a> {
    pub fn omni(position: [f64; 3]) -> Self {
        Transducer {
            position,
            orientation: Direction::new(0.0, 0.0).unwrap(),
            model: DirectivityModel::Analytic(PatternKind::Omnidirectional),
        }
    }

    pub fn cardioid(position: [f64; 3], orientation: Direction) -> Self {
        Transducer {
            position,
            orientation,
            model: DirectivityModel::Analytic(PatternKind::Cardioid),
        }
    }

    pub fn measured(position: [f64; 3], orientation: Direction, grid: &'a MeasuredGrid) -> Self {
        Transducer {
            position,
            orientation,
            model: DirectivityModel::Measured(grid),
        }
    }

    /// Scalar gain (analytic) or IR (measured) toward a world vector.
    fn response(&self, world_vector: [f64; 3]) -> Result<Response<'a>> {
        let local = vector_in_frame(world_vector, &self.orientation)?;
        Ok(match &self.model {
            DirectivityModel::Analytic(PatternKind::Omnidirectional) => Response::Gain(1.0),
            DirectivityModel::Analytic(PatternKind::Cardioid) => {
                // Boresight is local +x.
                Response::Gain(0.5 * (1.0 + local.unit_vector()[0]))
            }
            DirectivityModel::Measured(grid) => Response::Ir(grid.lookup(&local)),
        })
    }

    fn extra_taps(&self) -> usize {
        match &self.model {
            DirectivityModel::Analytic(_) => 0,
            DirectivityModel::Measured(grid) => grid.ir_len() - 1,
        }
    }
}

enum Response<'a> {
    Gain(f64),
    Ir(&'a [f64]),
}

/// Rendering controls shared by all simulation stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub fs: u32,
    pub kernel_taps: usize,
    pub speed_of_sound: f64,
}

impl RenderParams {
    pub fn new(fs: u32) -> Self {
        RenderParams {
            fs,
            kernel_taps: 81,
            speed_of_sound: 343.0,
        }
    }
}

/// A multichannel impulse response, one channel per microphone.
pub type RoomImpulseResponse = MultichannelSignal;

/// Renders image paths into an impulse response at each microphone. Each
/// path contributes a fractional-delay kernel at distance/c seconds, scaled
/// by 1/distance, the cumulative reflection gain, the source response along
/// the unfolded departure direction, and the microphone response along the
/// arrival direction. Contributions accumulate in path order.
pub fn render_rir(
    paths: &[ImagePath],
    source: &Transducer,
    mics: &[Transducer],
    params: &RenderParams,
) -> Result<RoomImpulseResponse> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("image paths"));
    }
    if mics.is_empty() {
        return Err(Error::EmptyInput("microphones"));
    }
    if params.fs == 0 {
        return Err(Error::InvalidArgument("fs must be nonzero".into()));
    }
    let taps = params.kernel_taps;
    let center = (taps - 1) / 2;
    let fs = params.fs as f64;

    // Output length: the longest path delay plus every kernel that can
    // trail it.
    let mut max_end = 0usize;
    for path in paths {
        for mic in mics {
            let d = path.distance_to(mic.position);
            if d < 1e-9 {
                return Err(Error::ZeroDistancePath(path.image_position));
            }
            let delay = d / params.speed_of_sound * fs;
            let end = delay.floor() as usize
                + taps
                + source.extra_taps()
                + mic.extra_taps();
            max_end = max_end.max(end);
        }
    }

    let mut channels = Vec::with_capacity(mics.len());
    let mut scratch: Vec<f64> = Vec::new();
    for mic in mics {
        let mut out = vec![0.0; max_end];
        for path in paths {
            let d = path.distance_to(mic.position);
            let delay = d / params.speed_of_sound * fs;
            let int_part = delay.floor() as usize;
            let frac = delay - delay.floor();
            let kernel = fractional_delay_kernel(frac, taps)?;

            let mut amp = path.cumulative_reflection_gain / d;
            scratch.clear();
            scratch.extend_from_slice(&kernel);
            match source.response(path.departure_vector(mic.position))? {
                Response::Gain(g) => amp *= g,
                Response::Ir(ir) => convolve_in_place(&mut scratch, ir),
            }
            match mic.response(path.arrival_vector(mic.position))? {
                Response::Gain(g) => amp *= g,
                Response::Ir(ir) => convolve_in_place(&mut scratch, ir),
            }
            if amp == 0.0 {
                continue;
            }
            for (j, &k) in scratch.iter().enumerate() {
                let t = int_part as isize + j as isize - center as isize;
                if t >= 0 {
                    out[t as usize] += amp * k;
                }
            }
        }
        channels.push(MonoSignal::new(out, params.fs)?);
    }
    MultichannelSignal::new(channels)
}

/// Replaces `a` with the full convolution of `a` and `b`.
fn convolve_in_place(a: &mut Vec<f64>, b: &[f64]) {
    let out_len = a.len() + b.len() - 1;
    let mut out = vec![0.0; out_len];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    *a = out;
}

/// Reverberation time from Schroeder backward integration: fit the energy
/// decay between -5 and -35 dB, extrapolate to -60 dB. A response that never
/// reaches -35 dB is reported as insufficient decay.
pub fn rt60_estimate(rir: &RoomImpulseResponse) -> Result<f64> {
    let n = rir.len();
    if n == 0 {
        return Err(Error::EmptyInput("rir"));
    }
    // Pool energy across channels, then integrate backward.
    let mut energy = vec![0.0; n];
    for ch in &rir.channels {
        for (e, &s) in energy.iter_mut().zip(&ch.samples) {
            *e += s * s;
        }
    }
    let mut cumulative = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += energy[i];
        cumulative[i] = acc;
    }
    let total = cumulative[0];
    if total <= 0.0 {
        return Err(Error::SilentSignal("rir"));
    }

    let db = |i: usize| 10.0 * (cumulative[i] / total).log10();
    let t5 = (0..n).find(|&i| db(i) <= -5.0);
    let t35 = (0..n).find(|&i| db(i) <= -35.0);
    let (t5, t35) = match (t5, t35) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let reached = cumulative
                .iter()
                .position(|&c| c <= 0.0)
                .map(|i| db(i.saturating_sub(1)))
                .unwrap_or_else(|| db(n - 1));
            return Err(Error::InsufficientDecay(format!(
                "decay only reaches {reached:.1} dB, need -35 dB"
            )));
        }
    };
    if t35 <= t5 + 1 {
        // The -5 and -35 dB crossings collapse onto adjacent samples:
        // effectively instantaneous decay.
        return Ok(0.0);
    }

    // Least-squares line through (i, db(i)) on [t5, t35].
    let m = (t35 - t5 + 1) as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in t5..=t35 {
        let x = i as f64;
        let y = db(i);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if !(slope < 0.0) {
        return Err(Error::InsufficientDecay(format!(
            "non-decaying fit slope {slope}"
        )));
    }
    Ok(-60.0 / slope / rir.sample_rate() as f64)
}

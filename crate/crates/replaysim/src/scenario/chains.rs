//! The three signal chains: genuine capture, spoof capture, and replay.
//!
//! Genuine: talker -> Env room -> ASV array. Spoof: talker -> Env-A ->
//! spoofing microphone (or a pass-through when the attacker has the
//! anechoic source). Replay: loudspeaker playing the spoofed signal ->
//! Env-B -> ASV array. All chains share one engine sample rate.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::directivity::{Direction, MeasuredGrid};
use crate::dsp::{fast_convolve, MonoSignal, MultichannelSignal};
use crate::error::{Error, Result};
use crate::rir::{
    auto_max_order, enumerate_images, render_rir, DirectivityModel, RenderParams,
    RoomImpulseResponse, RoomSpec, Transducer,
};
use crate::scenario::scene::{RoomChoice, Scene};

/// How the attacker obtained the spoofed signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpoofingConfig {
    /// Recorded over the air in Env-A by the spoofing microphone.
    Reverberant,
    /// Direct access to the anechoic source signal.
    Anechoic,
}

impl fmt::Display for SpoofingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpoofingConfig::Reverberant => "reverberant",
            SpoofingConfig::Anechoic => "anechoic",
        })
    }
}

impl FromStr for SpoofingConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reverberant" => Ok(SpoofingConfig::Reverberant),
            "anechoic" => Ok(SpoofingConfig::Anechoic),
            other => Err(Error::InvalidArgument(format!(
                "unknown spoofing mode {other:?}"
            ))),
        }
    }
}

/// Chain-level simulation parameters.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub fs: u32,
    /// Image-source order; `None` picks one per room from its absorption.
    pub max_order: Option<u32>,
    pub kernel_taps: usize,
    pub speed_of_sound: f64,
    /// Room in which the genuine class is recorded.
    pub genuine_room: RoomChoice,
}

impl SimParams {
    pub fn new(fs: u32) -> Self {
        SimParams {
            fs,
            max_order: None,
            kernel_taps: 81,
            speed_of_sound: 343.0,
            genuine_room: RoomChoice::EnvA,
        }
    }

    fn render(&self) -> RenderParams {
        RenderParams {
            fs: self.fs,
            kernel_taps: self.kernel_taps,
            speed_of_sound: self.speed_of_sound,
        }
    }

    fn order_for(&self, room: &RoomSpec) -> u32 {
        self.max_order.unwrap_or_else(|| auto_max_order(room))
    }
}

fn talker(scene: &Scene) -> Result<Transducer<'static>> {
    Ok(Transducer {
        position: scene.p_tlk,
        orientation: scene.talker_orientation()?,
        model: DirectivityModel::Analytic(scene.talker_pattern),
    })
}

fn asv_mics(scene: &Scene) -> Vec<Transducer<'static>> {
    let level = Direction::new(0.0, 0.0).expect("level direction");
    scene
        .mic_positions()
        .into_iter()
        .zip(&scene.asv_mic_patterns)
        .map(|(position, &pattern)| Transducer {
            position,
            orientation: level,
            model: DirectivityModel::Analytic(pattern),
        })
        .collect()
}

fn room_rir(
    room: &RoomSpec,
    source: &Transducer,
    mics: &[Transducer],
    params: &SimParams,
) -> Result<RoomImpulseResponse> {
    let paths = enumerate_images(room, source.position, params.order_for(room))?;
    render_rir(&paths, source, mics, &params.render())
}

fn convolve_channels(x: &MonoSignal, rir: &RoomImpulseResponse) -> Result<MultichannelSignal> {
    let channels = rir
        .channels
        .iter()
        .map(|h| fast_convolve(x, &h.samples))
        .collect::<Result<Vec<_>>>()?;
    MultichannelSignal::new(channels)
}

fn check_source(source: &MonoSignal, params: &SimParams) -> Result<()> {
    if source.sample_rate != params.fs {
        return Err(Error::InvalidArgument(format!(
            "source at {} Hz but the engine runs at {} Hz",
            source.sample_rate, params.fs
        )));
    }
    if source.power() == 0.0 {
        return Err(Error::SilentSignal("chain source"));
    }
    Ok(())
}

/// RIR of the genuine chain: talker to each ASV microphone in the room
/// selected by `params.genuine_room`.
pub fn genuine_rir(scene: &Scene, params: &SimParams) -> Result<RoomImpulseResponse> {
    let room = match params.genuine_room {
        RoomChoice::EnvA => &scene.room_env_a,
        RoomChoice::EnvB => &scene.room_env_b,
    };
    room_rir(room, &talker(scene)?, &asv_mics(scene), params)
}

/// RIR of the reverberant spoofing capture: talker to the spoofing
/// microphone in Env-A. One channel.
pub fn spoof_rir(scene: &Scene, params: &SimParams) -> Result<RoomImpulseResponse> {
    let mic = Transducer {
        position: scene.p_spf,
        orientation: Direction::new(0.0, 0.0)?,
        model: DirectivityModel::Analytic(scene.spf_mic_pattern),
    };
    room_rir(
        &scene.room_env_a,
        &talker(scene)?,
        std::slice::from_ref(&mic),
        params,
    )
}

/// RIR of the replay chain: the loudspeaker (measured grid directivity)
/// to each ASV microphone in Env-B.
pub fn replay_rir(
    scene: &Scene,
    loudspeaker: &MeasuredGrid,
    params: &SimParams,
) -> Result<RoomImpulseResponse> {
    if loudspeaker.fs != params.fs {
        return Err(Error::InvalidArgument(format!(
            "loudspeaker grid {:?} at {} Hz but the engine runs at {} Hz",
            loudspeaker.name, loudspeaker.fs, params.fs
        )));
    }
    let speaker = Transducer {
        position: scene.p_spk,
        orientation: scene.speaker_orientation()?,
        model: DirectivityModel::Measured(loudspeaker),
    };
    room_rir(&scene.room_env_b, &speaker, &asv_mics(scene), params)
}

/// Genuine multichannel recording of `source`.
pub fn simulate_genuine(
    scene: &Scene,
    source: &MonoSignal,
    params: &SimParams,
) -> Result<MultichannelSignal> {
    check_source(source, params)?;
    convolve_channels(source, &genuine_rir(scene, params)?)
}

/// Single-channel spoofed signal. Anechoic mode returns the source
/// unchanged; reverberant mode records it through Env-A.
pub fn simulate_spoof(
    scene: &Scene,
    source: &MonoSignal,
    cfg: SpoofingConfig,
    params: &SimParams,
) -> Result<MonoSignal> {
    match cfg {
        SpoofingConfig::Anechoic => Ok(source.clone()),
        SpoofingConfig::Reverberant => {
            check_source(source, params)?;
            let rir = spoof_rir(scene, params)?;
            fast_convolve(source, &rir.channels[0].samples)
        }
    }
}

/// Multichannel replay recording: the spoofed signal played back over the
/// loudspeaker in Env-B.
pub fn simulate_replay(
    scene: &Scene,
    spoofed: &MonoSignal,
    loudspeaker: &MeasuredGrid,
    params: &SimParams,
) -> Result<MultichannelSignal> {
    check_source(spoofed, params)?;
    convolve_channels(spoofed, &replay_rir(scene, loudspeaker, params)?)
}

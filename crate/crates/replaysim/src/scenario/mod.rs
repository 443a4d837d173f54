//! Scene sampling, the three signal chains, dataset generation, and the
//! trial manifest.

pub mod chains;
pub mod dataset;
pub mod manifest;
pub mod scene;

pub use chains::{
    genuine_rir, replay_rir, simulate_genuine, simulate_replay, simulate_spoof, spoof_rir,
    SimParams, SpoofingConfig,
};
pub use dataset::{generate_dataset, DatasetConfig, ENGINE_RATE};
pub use manifest::{audit_manifest, read_manifest, write_manifest, Manifest, TrialRecord};
pub use scene::{
    sample_scene, ArrayGeometry, RoomChoice, Scene, SceneConstraints, MAX_REJECTIONS, WALL_MARGIN,
};

//! Samples one random scene and renders the three signal chains: a genuine
//! talker recording at the microphone array, the spoofing-microphone
//! capture of the same talker, and the replay of that capture through a
//! loudspeaker in a second room.

use replaysim::audio_io::{write_wav, SampleFormat, WavFile};
use replaysim::demo::demo_grid;
use replaysim::dsp::MonoSignal;
use replaysim::scenario::{
    sample_scene, simulate_genuine, simulate_replay, simulate_spoof, SceneConstraints,
    SimParams, SpoofingConfig,
};

fn rms(samples: &[f64]) -> f64 {
    (samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64).sqrt()
}

fn main() -> replaysim::Result<()> {
    let fs = 48_000u32;
    // One second of a 200 Hz to 1.4 kHz sweep as the dry source.
    let samples: Vec<f64> = (0..fs as usize)
        .map(|n| {
            let t = n as f64 / fs as f64;
            0.4 * (2.0 * std::f64::consts::PI * (200.0 * t + 600.0 * t * t)).sin()
        })
        .collect();
    let source = MonoSignal::new(samples, fs)?;

    let scene = sample_scene(11, &SceneConstraints::default())?;
    let dist = |a: [f64; 3], b: [f64; 3]| -> f64 {
        a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    println!(
        "Env-A {:.1}x{:.1}x{:.1} m, Env-B {:.1}x{:.1}x{:.1} m",
        scene.room_env_a.width, scene.room_env_a.length, scene.room_env_a.height,
        scene.room_env_b.width, scene.room_env_b.length, scene.room_env_b.height,
    );
    println!(
        "talker {:.2} m from array, {:.2} m from spoof mic; loudspeaker {:.2} m from array",
        dist(scene.p_tlk, scene.asv_array.center),
        dist(scene.p_tlk, scene.p_spf),
        dist(scene.p_spk, scene.asv_array.center),
    );

    let params = SimParams::new(fs);
    let genuine = simulate_genuine(&scene, &source, &params)?;
    let spoofed = simulate_spoof(&scene, &source, SpoofingConfig::Reverberant, &params)?;
    let grid = demo_grid(0, fs);
    let replay = simulate_replay(&scene, &spoofed, &grid, &params)?;

    println!("genuine: {} channels, rms {:.4}", genuine.channel_count(), rms(&genuine.channels[0].samples));
    println!("spoofed capture: rms {:.4}", rms(&spoofed.samples));
    println!("replay:  {} channels, rms {:.4}", replay.channel_count(), rms(&replay.channels[0].samples));

    let dir = std::env::temp_dir();
    for (name, sig) in [("genuine", &genuine), ("replay", &replay)] {
        let peak = sig
            .channels
            .iter()
            .flat_map(|c| &c.samples)
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        let out = dir.join(format!("replaysim-{name}.wav"));
        write_wav(&out, &WavFile::from_signal(&sig.scaled(0.9 / peak), SampleFormat::Pcm24)?)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

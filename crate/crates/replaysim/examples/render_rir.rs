//! Renders a shoebox room impulse response with the image-source method,
//! estimates its T60, and writes the result as a float WAV.

use replaysim::audio_io::{write_wav, SampleFormat, WavFile};
use replaysim::rir::{
    auto_max_order, enumerate_images, render_rir, rt60_estimate, RenderParams, RoomSpec,
    Transducer,
};

fn main() -> replaysim::Result<()> {
    let room = RoomSpec::uniform(4.2, 5.1, 2.9, 0.35)?;
    let source = Transducer::omni([1.2, 1.4, 1.6]);
    let mics = [
        Transducer::omni([3.1, 3.9, 1.2]),
        Transducer::omni([3.15, 3.9, 1.2]),
    ];

    let order = auto_max_order(&room);
    let paths = enumerate_images(&room, source.position, order)?;
    let params = RenderParams::new(48_000);
    let rir = render_rir(&paths, &source, &mics, &params)?;

    let d: f64 = source
        .position
        .iter()
        .zip(&mics[0].position)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    println!("room {:.1} x {:.1} x {:.1} m, absorption 0.35", room.width, room.length, room.height);
    println!("image order {order}: {} paths, {} taps per channel", paths.len(), rir.len());
    println!("direct path: {d:.3} m = {:.1} samples at 48 kHz", d / 343.0 * 48_000.0);
    println!("estimated T60: {:.3} s", rt60_estimate(&rir)?);

    // Float WAV samples clip outside [-1, 1), so normalize for storage.
    let peak = rir
        .channels
        .iter()
        .flat_map(|c| &c.samples)
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let gain = if peak > 0.9 { 0.9 / peak } else { 1.0 };
    let out = std::env::temp_dir().join("replaysim-rir.wav");
    write_wav(&out, &WavFile::from_signal(&rir.scaled(gain), SampleFormat::Float32)?)?;
    println!("wrote {} (scaled by {gain:.4})", out.display());
    Ok(())
}

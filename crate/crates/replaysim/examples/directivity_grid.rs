//! Works with transducer directivities: analytic cardioid gains, and a
//! measured loudspeaker grid saved to and reloaded from TOML.

use replaysim::demo::demo_grid;
use replaysim::directivity::{load_grid_at, save_grid, AnalyticPattern, Direction};

fn energy(ir: &[f64]) -> f64 {
    ir.iter().map(|v| v * v).sum()
}

fn main() -> replaysim::Result<()> {
    // Analytic cardioid: 1 on-axis, 0.5 broadside, 0 behind.
    let cardioid = AnalyticPattern::cardioid(Direction::new(0.0, 0.0)?);
    println!("cardioid gain by azimuth:");
    for az_deg in [0, 45, 90, 135, 180] {
        let d = Direction::new((az_deg as f64).to_radians(), 0.0)?;
        println!("  {az_deg:3} deg: {:.3}", cardioid.gain(&d));
    }

    // A measured grid: one impulse response per direction.
    let grid = demo_grid(0, 48_000);
    println!();
    println!(
        "grid {:?}: {} directions, {}-tap responses at {} Hz",
        grid.name,
        grid.entries.len(),
        grid.ir_len(),
        grid.fs
    );
    let front = grid.lookup(&Direction::new(0.0, 0.0)?);
    let back = grid.lookup(&Direction::new(std::f64::consts::PI, 0.0)?);
    println!(
        "front/back energy ratio: {:.1}",
        energy(front) / energy(back).max(1e-12)
    );

    // Grids round-trip through TOML, resampling to the engine rate on load.
    let path = std::env::temp_dir().join("replaysim-grid.toml");
    save_grid(&path, &grid)?;
    let reloaded = load_grid_at(&path, 48_000)?;
    assert_eq!(reloaded.entries.len(), grid.entries.len());
    println!("saved and reloaded {}", path.display());
    Ok(())
}

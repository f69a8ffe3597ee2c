//! Monte Carlo check of the fine bound δ/α for two far-apart prejudices,
//! then the same preset rejected at parameters outside its hypothesis.
//!
//! `cargo run --release --example theorem_ensemble`

use noisy_hk::harness::{preset_theorem3, HeteroPrejudiceParams};
use noisy_hk::report::render_text;
use noisy_hk::{run_ensemble, RunSettings};

fn main() -> noisy_hk::Result<()> {
    let settings = RunSettings::new(40, Some(5000), 1);
    let p = HeteroPrejudiceParams::split(20, 10, 0.1, 0.01, 0.8, 0.9, 0.1);
    let report = run_ensemble(&preset_theorem3(&p, &settings)?)?;
    print!("{}", render_text(&report));

    let outside = HeteroPrejudiceParams::split(20, 10, 0.2, 0.02, 0.4, 0.6, 0.2);
    match preset_theorem3(&outside, &settings) {
        Err(e) => println!("\nrejected: {e}"),
        Ok(_) => println!("\nunexpectedly accepted"),
    }
    Ok(())
}

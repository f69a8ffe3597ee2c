//! One noisy trajectory of the plain model, printed every 100 steps.
//!
//! `cargo run --example simulate_plain`

use noisy_hk::metrics::{cluster_count, diameter};
use noisy_hk::{Model, ModelConfig, NoiseModel, SeedStream};

fn main() -> noisy_hk::Result<()> {
    let model = Model::new(ModelConfig::plain(10, 0.2, NoiseModel::uniform(0.01)))?;
    let traj = model.run_trajectory(None, 1000, SeedStream::new(7, 0))?;
    let all: Vec<usize> = (0..model.n()).collect();
    for s in traj.states.iter().step_by(100) {
        println!(
            "t={:5}  d_V={:.4}  clusters={}",
            s.t,
            diameter(s, &all)?,
            cluster_count(&s.mobile, 0.2)
        );
    }
    Ok(())
}

//! A single stubborn agent at 0.5 pulls ten noisy agents into consensus
//! around it. Writes the trajectory to `stubborn_consensus.csv`.
//!
//! `cargo run --example stubborn_consensus`

use noisy_hk::metrics::{default_anchors, MetricsSeries};
use noisy_hk::report::emit_trajectory_csv;
use noisy_hk::{Dynamics, Model, ModelConfig, NoiseModel, SeedStream};

fn main() -> noisy_hk::Result<()> {
    let config = ModelConfig {
        n: 10,
        epsilon: 0.2,
        noise: NoiseModel::uniform(0.008),
        dynamics: Dynamics::HomoStubborn {
            b1: 0.5,
            b1_count: 1,
        },
    };
    let model = Model::new(config.clone())?;
    let traj = model.run_trajectory(None, 2000, SeedStream::new(5, 0))?;
    let metrics = MetricsSeries::compute(&traj, config.epsilon, &default_anchors(&config))?;
    let dev = &metrics.anchored[0].values;
    println!("d_V^B1 at t=0: {:.4}", dev[0]);
    println!(
        "d_V^B1 at t={}: {:.4} (bound (n+1)δ = 0.088)",
        traj.horizon(),
        dev[dev.len() - 1]
    );
    emit_trajectory_csv(&traj, &metrics, "stubborn_consensus.csv".as_ref())?;
    println!("wrote stubborn_consensus.csv");
    Ok(())
}

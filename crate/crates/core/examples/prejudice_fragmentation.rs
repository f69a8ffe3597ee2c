//! Two prejudiced groups (J1 = 0.6, J2 = 0.2) with and without noise, from
//! the same initial opinions. Prints the terminal clusters of each run.
//!
//! `cargo run --example prejudice_fragmentation`

use noisy_hk::metrics::cluster_partition;
use noisy_hk::{Dynamics, Model, ModelConfig, NoiseModel, SeedStream};

fn config(noise: NoiseModel) -> ModelConfig {
    ModelConfig {
        n: 20,
        epsilon: 0.2,
        noise,
        dynamics: Dynamics::HeteroPrejudice {
            alpha: 0.4,
            j1: 0.6,
            j2: 0.2,
            s1: (0..10).collect(),
            s2: (10..20).collect(),
        },
    }
}

fn main() -> noisy_hk::Result<()> {
    for (name, noise) in [
        ("noise-free", NoiseModel::zero()),
        ("δ = 0.02", NoiseModel::uniform(0.02)),
    ] {
        let model = Model::new(config(noise))?;
        let traj = model.run_trajectory(None, 5000, SeedStream::new(3, 0))?;
        let last = traj.last();
        println!(
            "{name}: fixed point from step {:?}",
            traj.fixed_point_step()
        );
        for group in cluster_partition(last, 0.2) {
            let mean = group.iter().map(|&i| last.mobile[i]).sum::<f64>() / group.len() as f64;
            println!("  cluster of {:2} agents around {mean:.3}", group.len());
        }
    }
    Ok(())
}

//! Empirical moments of each bounded noise family next to the closed forms.
//!
//! `cargo run --example noise_families`

use noisy_hk::NoiseModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let delta = 0.05;
    let families = [
        NoiseModel::uniform(delta),
        NoiseModel::scaled_rademacher(delta, 0.03),
        NoiseModel::truncated_gaussian(delta, 0.02),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for noise in families {
        let draws: Vec<f64> = (0..100_000).map(|_| noise.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        let mass = noise.mass_condition().expect("nonzero family");
        println!("{:?}", noise.family);
        println!(
            "  mean {mean:+.5}  variance {var:.3e} (exact {:.3e})",
            noise.variance()
        );
        println!("  P(ξ ≥ a) >= p with a = {:.4}, p = {:.4}", mass.a, mass.p);
    }
}

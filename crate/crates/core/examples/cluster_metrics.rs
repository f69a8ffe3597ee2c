//! Diameter, anchored deviation, consensus entry and tail maximum on a
//! hand-written opinion profile and series.
//!
//! `cargo run --example cluster_metrics`

use noisy_hk::metrics::{
    anchored_deviation, cluster_partition, consensus_entry, diameter, limsup_estimate,
};
use noisy_hk::OpinionState;

fn main() -> noisy_hk::Result<()> {
    let state = OpinionState {
        t: 0,
        mobile: vec![0.10, 0.15, 0.42, 0.55, 0.61, 0.95],
        stubborn: Vec::new(),
    };
    let all: Vec<usize> = (0..state.mobile.len()).collect();
    println!("diameter: {:.2}", diameter(&state, &all)?);
    println!(
        "deviation from 0.5: {:.2}",
        anchored_deviation(&state, &all, 0.5)?
    );
    println!("clusters at ε = 0.2: {:?}", cluster_partition(&state, 0.2));

    let series = [0.5, 0.3, 0.01, 0.05, 0.015, 0.01, 0.012, 0.009];
    let r = consensus_entry(&series, 0.02, 3);
    println!("entry below 0.02: {:?} ({:?})", r.entry_time, r.verdict);
    println!("max over last 4 steps: {}", limsup_estimate(&series, 4)?);
    Ok(())
}

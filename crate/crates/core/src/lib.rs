//! Noisy Hegselmann-Krause opinion dynamics.
//!
//! The crate simulates bounded-confidence averaging on `[0, 1]` with bounded
//! i.i.d. noise in five flavours (plain, homogeneous or heterogeneous
//! prejudiced agents, homogeneous or heterogeneous stubborn agents), computes
//! consensus and fragmentation metrics over the resulting trajectories, and
//! runs seeded Monte Carlo ensembles that check the known consensus and
//! fragmentation bounds for each flavour.
//!
//! ```
//! use noisy_hk::{Model, ModelConfig, NoiseModel, SeedStream};
//!
//! let config = ModelConfig::plain(10, 0.2, NoiseModel::uniform(0.01));
//! let model = Model::new(config).unwrap();
//! let trajectory = model.run_trajectory(None, 500, SeedStream::new(7, 0)).unwrap();
//! assert_eq!(trajectory.len(), 501);
//! ```

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod report;
pub mod seed;
pub mod state;

pub use dynamics::{clamp01, Model};
pub use error::{Error, Result, Violation};
pub use harness::{
    run_ensemble, BoundCheck, CheckMode, Criterion, ExperimentReport, ExperimentSpec,
    InitialCondition, RunSettings, Subset,
};
pub use metrics::{
    anchored_deviation, cluster_partition, consensus_entry, diameter, limsup_estimate,
    ConsensusReport, MetricsSeries, Verdict,
};
pub use model::{Dynamics, ModelConfig, Variant};
pub use noise::{NoiseFamily, NoiseModel};
pub use seed::SeedStream;
pub use state::{OpinionState, Participant, StubbornAnchor, StubbornGroup, Trajectory};

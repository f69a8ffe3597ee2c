//! Per-replication random streams.
//!
//! Every replication owns a ChaCha8 generator whose seed is a pure function
//! of `(master_seed, replication_index)`. The two integers are combined with
//! the splitmix64 finalizer:
//!
//! ```text
//! seed = splitmix64(master_seed ^ splitmix64(replication_index))
//! ```
//!
//! so replications can be run in any order, on any thread, and replay
//! identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The splitmix64 output function (Steele, Lea & Flood).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    pub master_seed: u64,
    pub replication_index: u64,
}

impl SeedStream {
    pub fn new(master_seed: u64, replication_index: u64) -> Self {
        Self {
            master_seed,
            replication_index,
        }
    }

    pub fn derived_seed(&self) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(self.replication_index))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derived_seed())
    }
}

//! Model configuration for the five dynamics variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    PlainNoisy,
    HomoPrejudice,
    HomoStubborn,
    HeteroPrejudice,
    HeteroStubborn,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::PlainNoisy,
        Variant::HomoPrejudice,
        Variant::HomoStubborn,
        Variant::HeteroPrejudice,
        Variant::HeteroStubborn,
    ];

    /// Command-line spelling.
    pub fn name(self) -> &'static str {
        match self {
            Variant::PlainNoisy => "plain",
            Variant::HomoPrejudice => "homo-prejudice",
            Variant::HomoStubborn => "homo-stubborn",
            Variant::HeteroPrejudice => "hetero-prejudice",
            Variant::HeteroStubborn => "hetero-stubborn",
        }
    }
}

/// Variant-specific parameters. Prejudiced and stubborn agents never appear
/// in the same model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Dynamics {
    PlainNoisy,
    HomoPrejudice {
        alpha: f64,
        j1: f64,
        s1: Vec<usize>,
    },
    HomoStubborn {
        b1: f64,
        b1_count: usize,
    },
    HeteroPrejudice {
        alpha: f64,
        j1: f64,
        j2: f64,
        s1: Vec<usize>,
        s2: Vec<usize>,
    },
    HeteroStubborn {
        b1: f64,
        b1_count: usize,
        b2: f64,
        b2_count: usize,
    },
}

impl Dynamics {
    pub fn variant(&self) -> Variant {
        match self {
            Dynamics::PlainNoisy => Variant::PlainNoisy,
            Dynamics::HomoPrejudice { .. } => Variant::HomoPrejudice,
            Dynamics::HomoStubborn { .. } => Variant::HomoStubborn,
            Dynamics::HeteroPrejudice { .. } => Variant::HeteroPrejudice,
            Dynamics::HeteroStubborn { .. } => Variant::HeteroStubborn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Number of mobile agents.
    pub n: usize,
    /// Confidence bound.
    pub epsilon: f64,
    pub noise: NoiseModel,
    pub dynamics: Dynamics,
}

fn unit(name: &str, v: f64, out: &mut Vec<String>) {
    if !(0.0..=1.0).contains(&v) {
        out.push(format!("{name} must lie in [0,1], got {v}"));
    }
}

fn strength(v: f64, out: &mut Vec<String>) {
    if !(v > 0.0 && v <= 1.0) {
        out.push(format!("alpha must lie in (0,1], got {v}"));
    }
}

fn members(name: &str, set: &[usize], n: usize, out: &mut Vec<String>) {
    let mut seen = vec![false; n];
    for &i in set {
        if i >= n {
            out.push(format!("{name} member {i} is not an agent index (n = {n})"));
        } else if std::mem::replace(&mut seen[i], true) {
            out.push(format!("{name} lists agent {i} more than once"));
        }
    }
}

impl ModelConfig {
    pub fn plain(n: usize, epsilon: f64, noise: NoiseModel) -> Self {
        Self {
            n,
            epsilon,
            noise,
            dynamics: Dynamics::PlainNoisy,
        }
    }

    pub fn variant(&self) -> Variant {
        self.dynamics.variant()
    }

    /// Every violated invariant, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push("n must be at least 1".to_string());
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            out.push(format!("epsilon must lie in (0,1], got {}", self.epsilon));
        }
        out.extend(self.noise.violations());
        let n = self.n;
        match &self.dynamics {
            Dynamics::PlainNoisy => {}
            Dynamics::HomoPrejudice { alpha, j1, s1 } => {
                strength(*alpha, &mut out);
                unit("j1", *j1, &mut out);
                members("s1", s1, n, &mut out);
            }
            Dynamics::HomoStubborn { b1, b1_count } => {
                unit("b1", *b1, &mut out);
                if *b1_count == 0 {
                    out.push("b1_count must be at least 1".into());
                }
            }
            Dynamics::HeteroPrejudice {
                alpha,
                j1,
                j2,
                s1,
                s2,
            } => {
                strength(*alpha, &mut out);
                unit("j1", *j1, &mut out);
                unit("j2", *j2, &mut out);
                members("s1", s1, n, &mut out);
                members("s2", s2, n, &mut out);
                let mut cover = vec![0u8; n];
                for &i in s1.iter().chain(s2).filter(|&&i| i < n) {
                    cover[i] = cover[i].saturating_add(1);
                }
                let missing: Vec<usize> = (0..n).filter(|&i| cover[i] == 0).collect();
                if !missing.is_empty() {
                    out.push(format!(
                        "s1 and s2 must cover every agent; missing {missing:?}"
                    ));
                }
                let shared: Vec<usize> = s1.iter().copied().filter(|i| s2.contains(i)).collect();
                if !shared.is_empty() {
                    out.push(format!("s1 and s2 must be disjoint; shared {shared:?}"));
                }
                if (j1 - j2).abs() <= self.epsilon {
                    out.push(format!(
                        "|j1 - j2| must exceed epsilon: |{j1} - {j2}| = {} <= {}",
                        (j1 - j2).abs(),
                        self.epsilon
                    ));
                }
            }
            Dynamics::HeteroStubborn {
                b1,
                b1_count,
                b2,
                b2_count,
            } => {
                unit("b1", *b1, &mut out);
                unit("b2", *b2, &mut out);
                if *b1_count == 0 {
                    out.push("b1_count must be at least 1".into());
                }
                if *b2_count == 0 {
                    out.push("b2_count must be at least 1".into());
                }
                if b2 - b1 <= self.epsilon {
                    out.push(format!(
                        "b2 - b1 must exceed epsilon: {b2} - {b1} = {} <= {}",
                        b2 - b1,
                        self.epsilon
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

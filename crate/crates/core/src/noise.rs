//! Bounded, zero-mean noise families.
//!
//! Every family is symmetric about zero and supported on `[-delta, delta]`.
//! For `delta > 0` each one also has strictly positive variance and admits
//! constants `a > 0`, `p > 0` with `P{xi >= a} >= p` and `P{xi <= -a} >= p`;
//! [`NoiseModel::mass_condition`] returns the constants used here:
//!
//! | family              | a         | p                                        |
//! |---------------------|-----------|------------------------------------------|
//! | `Uniform`           | delta / 2 | 1/4                                      |
//! | `ScaledRademacher`  | magnitude | 1/2                                      |
//! | `TruncatedGaussian` | delta / 2 | tail mass of the truncated law above a   |
//! | `Zero`              | none      | none                                     |

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Uniform,
    /// Normal(0, sigma) conditioned on `|xi| <= delta`, sampled by rejection.
    TruncatedGaussian {
        sigma: f64,
    },
    /// `+magnitude` or `-magnitude` with probability one half each.
    ScaledRademacher {
        magnitude: f64,
    },
    /// Noise-free dynamics. Only valid with `delta == 0`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(flatten)]
    pub family: NoiseFamily,
    pub delta: f64,
}

/// Constants `(a, p)` of the two-sided mass condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassCondition {
    pub a: f64,
    pub p: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

impl NoiseModel {
    pub fn zero() -> Self {
        Self {
            family: NoiseFamily::Zero,
            delta: 0.0,
        }
    }

    /// Uniform on `[-delta, delta]`; `delta == 0` yields the zero family.
    pub fn uniform(delta: f64) -> Self {
        if delta == 0.0 {
            return Self::zero();
        }
        Self {
            family: NoiseFamily::Uniform,
            delta,
        }
    }

    pub fn truncated_gaussian(delta: f64, sigma: f64) -> Self {
        Self {
            family: NoiseFamily::TruncatedGaussian { sigma },
            delta,
        }
    }

    pub fn scaled_rademacher(delta: f64, magnitude: f64) -> Self {
        Self {
            family: NoiseFamily::ScaledRademacher { magnitude },
            delta,
        }
    }

    /// Same family shape with a new bound. Rademacher atoms keep their
    /// ratio to `delta`; a zero bound always collapses to [`NoiseModel::zero`].
    pub fn with_delta(&self, delta: f64) -> Self {
        if delta == self.delta {
            return *self;
        }
        if delta == 0.0 {
            return Self::zero();
        }
        match self.family {
            NoiseFamily::Zero | NoiseFamily::Uniform => Self::uniform(delta),
            NoiseFamily::TruncatedGaussian { sigma } => Self::truncated_gaussian(delta, sigma),
            NoiseFamily::ScaledRademacher { magnitude } => {
                let ratio = if self.delta > 0.0 {
                    magnitude / self.delta
                } else {
                    1.0
                };
                Self::scaled_rademacher(delta, ratio * delta)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, NoiseFamily::Zero)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            out.push(format!("delta must be finite and >= 0, got {}", self.delta));
            return out;
        }
        match self.family {
            NoiseFamily::Zero => {
                if self.delta != 0.0 {
                    out.push(format!("zero noise requires delta = 0, got {}", self.delta));
                }
            }
            NoiseFamily::Uniform => {
                if self.delta == 0.0 {
                    out.push("uniform noise requires delta > 0 (use the zero family)".into());
                }
            }
            NoiseFamily::TruncatedGaussian { sigma } => {
                if self.delta == 0.0 {
                    out.push("truncated gaussian noise requires delta > 0".into());
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    out.push(format!(
                        "gaussian sigma must be finite and > 0, got {sigma}"
                    ));
                }
            }
            NoiseFamily::ScaledRademacher { magnitude } => {
                if !(magnitude > 0.0 && magnitude <= self.delta) {
                    out.push(format!(
                        "rademacher magnitude must lie in (0, delta] = (0, {}], got {magnitude}",
                        self.delta
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

    /// Draws one noise value. The zero family consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.delta;
        match self.family {
            NoiseFamily::Zero => 0.0,
            NoiseFamily::Uniform => rng.random_range(-d..=d),
            NoiseFamily::ScaledRademacher { magnitude } => {
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            NoiseFamily::TruncatedGaussian { sigma } => {
                let normal = Normal::new(0.0, sigma).expect("sigma validated");
                loop {
                    let x: f64 = normal.sample(rng);
                    if x.abs() <= d {
                        return x;
                    }
                }
            }
        }
    }

    pub fn variance(&self) -> f64 {
        let d = self.delta;
        match self.family {
            NoiseFamily::Zero => 0.0,
            NoiseFamily::Uniform => d * d / 3.0,
            NoiseFamily::ScaledRademacher { magnitude } => magnitude * magnitude,
            NoiseFamily::TruncatedGaussian { sigma } => {
                let b = d / sigma;
                let mass = 2.0 * std_normal_cdf(b) - 1.0;
                sigma * sigma * (1.0 - 2.0 * b * std_normal_pdf(b) / mass)
            }
        }
    }

    /// `(a, p)` with `P{xi >= a} >= p` and `P{xi <= -a} >= p`, or `None` for
    /// the zero family.
    pub fn mass_condition(&self) -> Option<MassCondition> {
        let d = self.delta;
        match self.family {
            NoiseFamily::Zero => None,
            NoiseFamily::Uniform => Some(MassCondition {
                a: d / 2.0,
                p: 0.25,
            }),
            NoiseFamily::ScaledRademacher { magnitude } => Some(MassCondition {
                a: magnitude,
                p: 0.5,
            }),
            NoiseFamily::TruncatedGaussian { sigma } => {
                let hi = std_normal_cdf(d / sigma);
                let lo = std_normal_cdf(d / (2.0 * sigma));
                Some(MassCondition {
                    a: d / 2.0,
                    p: (hi - lo) / (2.0 * hi - 1.0),
                })
            }
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::zero()
    }
}

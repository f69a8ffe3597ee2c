//! Synchronous update rule for all five variants.
//!
//! One step maps `x(t)` to `x(t + 1)`:
//!
//! 1. the neighbour pool of mobile agent `i` is every participant `j` (mobile
//!    agents, plus stubborn anchors in the stubborn variants) with
//!    `|x_j - x_i| <= epsilon`;
//! 2. the local mean is the plain average over that pool;
//! 3. a prejudiced agent in group `k` moves to `(1 - alpha) * mean + alpha * J_k`,
//!    anyone else to the mean;
//! 4. independent noise is added and the result is clamped to `[0, 1]`.
//!
//! All agents read `x(t)`; noise is drawn in ascending agent order.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Dynamics, ModelConfig};
use crate::seed::SeedStream;
use crate::state::{OpinionState, Participant, StubbornAnchor, StubbornGroup, Trajectory};

pub fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// A validated [`ModelConfig`] with per-agent lookups resolved.
#[derive(Debug, Clone)]
pub struct Model {
    config: ModelConfig,
    /// `Some(J_k)` for prejudiced agents.
    prejudice: Vec<Option<f64>>,
    alpha: f64,
    anchors: Vec<StubbornAnchor>,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        let mut prejudice = vec![None; n];
        let mut alpha = 0.0;
        let mut anchors = Vec::new();
        match &config.dynamics {
            Dynamics::PlainNoisy => {}
            Dynamics::HomoPrejudice { alpha: a, j1, s1 } => {
                alpha = *a;
                for &i in s1 {
                    prejudice[i] = Some(*j1);
                }
            }
            Dynamics::HeteroPrejudice {
                alpha: a,
                j1,
                j2,
                s1,
                s2,
            } => {
                alpha = *a;
                for &i in s1 {
                    prejudice[i] = Some(*j1);
                }
                for &i in s2 {
                    prejudice[i] = Some(*j2);
                }
            }
            Dynamics::HomoStubborn { b1, b1_count } => {
                anchors.extend(std::iter::repeat_n(
                    StubbornAnchor {
                        group: StubbornGroup::B1,
                        value: *b1,
                    },
                    *b1_count,
                ));
            }
            Dynamics::HeteroStubborn {
                b1,
                b1_count,
                b2,
                b2_count,
            } => {
                anchors.extend(std::iter::repeat_n(
                    StubbornAnchor {
                        group: StubbornGroup::B1,
                        value: *b1,
                    },
                    *b1_count,
                ));
                anchors.extend(std::iter::repeat_n(
                    StubbornAnchor {
                        group: StubbornGroup::B2,
                        value: *b2,
                    },
                    *b2_count,
                ));
            }
        }
        Ok(Self {
            config,
            prejudice,
            alpha,
            anchors,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn anchors(&self) -> &[StubbornAnchor] {
        &self.anchors
    }

    /// Wraps initial mobile opinions into a state at `t = 0`.
    pub fn initial_state(&self, mobile: Vec<f64>) -> Result<OpinionState> {
        if mobile.len() != self.n() {
            return Err(Error::InvalidState(format!(
                "expected {} initial opinions, got {}",
                self.n(),
                mobile.len()
            )));
        }
        if let Some((i, x)) = mobile
            .iter()
            .enumerate()
            .find(|(_, x)| !(0.0..=1.0).contains(*x))
        {
            return Err(Error::InvalidState(format!(
                "initial opinion {i} must lie in [0,1], got {x}"
            )));
        }
        Ok(OpinionState {
            t: 0,
            mobile,
            stubborn: self.anchors.clone(),
        })
    }

    /// Initial opinions i.i.d. uniform on `[0, 1]`.
    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n()).map(|_| rng.random_range(0.0..=1.0)).collect()
    }

    fn check_agent(&self, i: usize, state: &OpinionState) -> Result<()> {
        if i >= state.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: state.n(),
            });
        }
        Ok(())
    }

    pub fn neighbor_set(&self, i: usize, state: &OpinionState) -> Result<Vec<Participant>> {
        self.check_agent(i, state)?;
        let xi = state.mobile[i];
        let eps = self.config.epsilon;
        Ok(state
            .participants()
            .filter(|&(_, x)| (x - xi).abs() <= eps)
            .map(|(p, _)| p)
            .collect())
    }

    pub fn local_mean(&self, i: usize, state: &OpinionState) -> Result<f64> {
        self.check_agent(i, state)?;
        Ok(self.mean_around(state.mobile[i], state))
    }

    // Same pool and summation order as `neighbor_set`, without allocating.
    fn mean_around(&self, xi: f64, state: &OpinionState) -> f64 {
        let eps = self.config.epsilon;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (_, x) in state.participants() {
            if (x - xi).abs() <= eps {
                sum += x;
                count += 1;
            }
        }
        sum / count as f64
    }

    fn blend(&self, i: usize, mean: f64, noise: f64) -> f64 {
        match self.prejudice[i] {
            Some(j) => (1.0 - self.alpha) * mean + self.alpha * j + noise,
            None => mean + noise,
        }
    }

    /// Unclamped candidate opinion of agent `i` given one noise draw.
    pub fn raw_update(&self, i: usize, state: &OpinionState, noise: f64) -> Result<f64> {
        let mean = self.local_mean(i, state)?;
        Ok(self.blend(i, mean, noise))
    }

    pub fn step<R: Rng + ?Sized>(&self, state: &OpinionState, rng: &mut R) -> OpinionState {
        debug_assert_eq!(state.n(), self.n());
        let noise = &self.config.noise;
        let mobile = state
            .mobile
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let mean = self.mean_around(xi, state);
                clamp01(self.blend(i, mean, noise.sample(rng)))
            })
            .collect();
        OpinionState {
            t: state.t + 1,
            mobile,
            stubborn: state.stubborn.clone(),
        }
    }

    /// Runs `horizon` steps. Without `x0`, initial opinions are drawn from
    /// the seed stream before any dynamics noise.
    pub fn run_trajectory(
        &self,
        x0: Option<Vec<f64>>,
        horizon: u64,
        seed: SeedStream,
    ) -> Result<Trajectory> {
        let mut rng = seed.rng();
        let x0 = match x0 {
            Some(x) => x,
            None => self.sample_initial(&mut rng),
        };
        let mut states = Vec::with_capacity(horizon as usize + 1);
        states.push(self.initial_state(x0)?);
        for _ in 0..horizon {
            let next = self.step(states.last().unwrap(), &mut rng);
            states.push(next);
        }
        Ok(Trajectory { states })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;

    fn plain(n: usize, eps: f64) -> Model {
        Model::new(ModelConfig::plain(n, eps, NoiseModel::zero())).unwrap()
    }

    fn single_stubborn(b1: f64) -> Model {
        Model::new(ModelConfig {
            n: 1,
            epsilon: 0.2,
            noise: NoiseModel::zero(),
            dynamics: Dynamics::HomoStubborn { b1, b1_count: 1 },
        })
        .unwrap()
    }

    #[test]
    fn clamp_branches() {
        assert_eq!(clamp01(1.2), 1.0);
        assert_eq!(clamp01(-0.05), 0.0);
        assert_eq!(clamp01(0.5), 0.5);
    }

    #[test]
    fn neighbor_set_small_cases() {
        let m = plain(3, 0.2);
        let s = m.initial_state(vec![0.0, 0.1, 0.5]).unwrap();
        assert_eq!(
            m.neighbor_set(0, &s).unwrap(),
            vec![Participant::Mobile(0), Participant::Mobile(1)]
        );
        assert!(matches!(
            m.neighbor_set(3, &s),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));

        let m = single_stubborn(0.5);
        let s = m.initial_state(vec![0.5]).unwrap();
        assert_eq!(
            m.neighbor_set(0, &s).unwrap(),
            vec![Participant::Mobile(0), Participant::Stubborn(0)]
        );
    }

    #[test]
    fn neighbor_set_matches_pairwise_scan() {
        let xs: Vec<f64> = (0..8).map(|k| k as f64 / 7.0).collect();
        let m = plain(8, 0.15);
        let s = m.initial_state(xs.clone()).unwrap();
        let mut expected = Vec::new();
        for j in 0..8 {
            if (xs[j] - xs[3]).abs() <= 0.15 {
                expected.push(Participant::Mobile(j));
            }
        }
        // spacing 1/7 ~ 0.143, so exactly the two direct neighbours
        assert_eq!(expected.len(), 3);
        assert_eq!(m.neighbor_set(3, &s).unwrap(), expected);
    }

    #[test]
    fn local_mean_examples() {
        let m = plain(3, 0.2);
        let s = m.initial_state(vec![0.0, 0.1, 0.5]).unwrap();
        assert!((m.local_mean(0, &s).unwrap() - 0.05).abs() < 1e-15);

        let m = plain(1, 0.3);
        let s = m.initial_state(vec![0.7]).unwrap();
        assert_eq!(m.local_mean(0, &s).unwrap(), 0.7);

        let m = single_stubborn(0.5);
        let s = m.initial_state(vec![0.5]).unwrap();
        assert_eq!(m.local_mean(0, &s).unwrap(), 0.5);
    }

    #[test]
    fn raw_update_examples() {
        // Single prejudiced agent alone: local mean equals its opinion.
        let m = Model::new(ModelConfig {
            n: 1,
            epsilon: 0.2,
            noise: NoiseModel::zero(),
            dynamics: Dynamics::HomoPrejudice {
                alpha: 0.4,
                j1: 0.6,
                s1: vec![0],
            },
        })
        .unwrap();
        let s = m.initial_state(vec![0.5]).unwrap();
        assert!((m.raw_update(0, &s, 0.0).unwrap() - 0.54).abs() < 1e-15);

        let m = plain(1, 0.2);
        let s = m.initial_state(vec![0.3]).unwrap();
        assert!((m.raw_update(0, &s, 0.02).unwrap() - 0.32).abs() < 1e-15);

        let m = Model::new(ModelConfig {
            n: 2,
            epsilon: 0.2,
            noise: NoiseModel::zero(),
            dynamics: Dynamics::HeteroPrejudice {
                alpha: 1.0,
                j1: 0.8,
                j2: 0.2,
                s1: vec![0],
                s2: vec![1],
            },
        })
        .unwrap();
        let s = m.initial_state(vec![0.9, 0.45]).unwrap();
        assert_eq!(m.raw_update(1, &s, 0.0).unwrap(), 0.2);
    }

    #[test]
    fn raw_update_is_unclamped() {
        let m = plain(1, 0.2);
        let s = m.initial_state(vec![0.99]).unwrap();
        assert!(m.raw_update(0, &s, 0.05).unwrap() > 1.0);
    }

    #[test]
    fn step_examples() {
        let m = plain(3, 0.2);
        let s = m.initial_state(vec![0.0, 0.1, 0.5]).unwrap();
        let mut rng = SeedStream::new(0, 0).rng();
        let next = m.step(&s, &mut rng);
        assert_eq!(next.t, 1);
        assert!((next.mobile[0] - 0.05).abs() < 1e-15);
        assert!((next.mobile[1] - 0.05).abs() < 1e-15);
        assert_eq!(next.mobile[2], 0.5);

        let m = plain(4, 1.0);
        let s = m.initial_state(vec![0.1, 0.9, 0.3, 0.6]).unwrap();
        let next = m.step(&s, &mut rng);
        let mean = (0.1 + 0.9 + 0.3 + 0.6) / 4.0;
        for x in next.mobile {
            assert!((x - mean).abs() < 1e-15);
        }

        let m = single_stubborn(0.5);
        let s = m.initial_state(vec![0.5]).unwrap();
        assert_eq!(m.step(&s, &mut rng).mobile, vec![0.5]);
    }

    #[test]
    fn step_uses_time_t_values_only() {
        // Sequential updating would move agent 1 towards agent 0's new value.
        let m = plain(2, 0.2);
        let s = m.initial_state(vec![0.4, 0.55]).unwrap();
        let next = m.step(&s, &mut SeedStream::new(0, 0).rng());
        assert_eq!(next.mobile[0], next.mobile[1]);
    }

    #[test]
    fn initial_state_validation() {
        let m = plain(2, 0.2);
        assert!(m.initial_state(vec![0.1]).is_err());
        assert!(m.initial_state(vec![0.1, 1.1]).is_err());
    }

    #[test]
    fn horizon_zero_is_initial_state_only() {
        let m = plain(3, 0.2);
        let tr = m
            .run_trajectory(Some(vec![0.1, 0.2, 0.3]), 0, SeedStream::new(1, 1))
            .unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.initial().mobile, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn noise_free_plain_reaches_fixed_point() {
        for rep in 0..20 {
            let n = 10 + 2 * rep as usize;
            let m = plain(n, 0.15);
            let tr = m
                .run_trajectory(None, 10_000, SeedStream::new(3, rep))
                .unwrap();
            let fp = tr.fixed_point_step().expect("fixed point");
            let last = tr.last();
            assert_eq!(tr.states[fp as usize].mobile, last.mobile);
        }
    }
}

//! Consensus and fragmentation measures.
//!
//! * `diameter` is the spread `max - min` of a subset's opinions;
//! * `anchored_deviation` is the largest distance of a subset from a fixed
//!   value (a prejudice or a stubborn opinion);
//! * `limsup_estimate` stands in for the limit superior of a series by the
//!   maximum over a trailing window;
//! * `consensus_entry` finds the first step after which a series stays at or
//!   below a threshold until the end of the observation;
//! * `cluster_partition` splits the sorted opinions wherever two neighbours
//!   are more than `epsilon` apart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dynamics, ModelConfig};
use crate::state::{OpinionState, Trajectory};

fn subset_values<'a>(
    state: &'a OpinionState,
    subset: &'a [usize],
) -> Result<impl Iterator<Item = f64> + 'a> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= state.n()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: state.n(),
        });
    }
    Ok(subset.iter().map(|&i| state.mobile[i]))
}

pub fn diameter(state: &OpinionState, subset: &[usize]) -> Result<f64> {
    let (lo, hi) = subset_values(state, subset)?
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
    Ok(hi - lo)
}

pub fn anchored_deviation(state: &OpinionState, subset: &[usize], anchor: f64) -> Result<f64> {
    Ok(subset_values(state, subset)?.fold(0.0, |m, x| f64::max(m, (x - anchor).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The bound held from `entry_time` through at least `min_tail` further steps.
    Confirmed,
    /// The bound holds at the end, but not for long enough to trust it.
    Inconclusive,
    /// The final observation violates the bound.
    NotReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub phi: f64,
    pub entry_time: Option<u64>,
    pub tail_margin: Option<u64>,
    pub verdict: Verdict,
}

/// Earliest index from which every entry is `<= phi`. Index `t` of `series`
/// is step `t`; the horizon is the last index.
pub fn consensus_entry(series: &[f64], phi: f64, min_tail: u64) -> ConsensusReport {
    let mut start = None;
    for (t, &v) in series.iter().enumerate() {
        if v <= phi {
            start.get_or_insert(t as u64);
        } else {
            start = None;
        }
    }
    let horizon = series.len().saturating_sub(1) as u64;
    match start {
        Some(t) => {
            let margin = horizon - t;
            ConsensusReport {
                phi,
                entry_time: Some(t),
                tail_margin: Some(margin),
                verdict: if margin >= min_tail {
                    Verdict::Confirmed
                } else {
                    Verdict::Inconclusive
                },
            }
        }
        None => ConsensusReport {
            phi,
            entry_time: None,
            tail_margin: None,
            verdict: Verdict::NotReached,
        },
    }
}

/// Maximum of the last `tail_window` entries.
pub fn limsup_estimate(series: &[f64], tail_window: usize) -> Result<f64> {
    if tail_window == 0 {
        return Err(Error::InvalidArgument(
            "tail window must be at least 1".into(),
        ));
    }
    if tail_window > series.len() {
        return Err(Error::InvalidArgument(format!(
            "tail window {tail_window} exceeds series length {}",
            series.len()
        )));
    }
    Ok(series[series.len() - tail_window..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Default trailing window: the final fifth of the run, at least 500 steps,
/// never more than the run itself.
pub fn default_tail_window(horizon: u64) -> u64 {
    (horizon / 5).max(500).min(horizon.max(1))
}

/// Groups of agent indices in increasing opinion order; a new group starts
/// wherever consecutive sorted opinions differ by more than `epsilon`.
pub fn cluster_partition(state: &OpinionState, epsilon: f64) -> Vec<Vec<usize>> {
    partition_values(&state.mobile, epsilon)
}

pub fn partition_values(values: &[f64], epsilon: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<f64> = None;
    for i in order {
        match (prev, groups.last_mut()) {
            (Some(p), Some(g)) if values[i] - p <= epsilon => g.push(i),
            _ => groups.push(vec![i]),
        }
        prev = Some(values[i]);
    }
    groups
}

pub fn cluster_count(values: &[f64], epsilon: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > epsilon).count()
}

/// Running means `g_s(k) = (z_{s+1} + ... + z_{s+k}) / k` for `k = 1, 2, ...`
/// (0-based: the mean of `seq[s..s + k]`).
pub fn running_means(seq: &[f64], s: usize) -> Vec<f64> {
    let mut sum = 0.0;
    seq.iter()
        .skip(s)
        .enumerate()
        .map(|(k, &z)| {
            sum += z;
            sum / (k + 1) as f64
        })
        .collect()
}

/// Deviation of a subset from a fixed anchor, tracked per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSpec {
    pub label: String,
    pub subset: Vec<usize>,
    pub anchor: f64,
}

/// The anchors a variant naturally has: `J1` (and `J2` on `S2`) for
/// prejudiced models, `B1` (and `B2`) over all agents for stubborn models.
pub fn default_anchors(config: &ModelConfig) -> Vec<AnchorSpec> {
    let all: Vec<usize> = (0..config.n).collect();
    let spec = |label: &str, subset: &[usize], anchor: f64| AnchorSpec {
        label: label.to_string(),
        subset: subset.to_vec(),
        anchor,
    };
    match &config.dynamics {
        Dynamics::PlainNoisy => vec![],
        Dynamics::HomoPrejudice { j1, .. } => vec![spec("J1", &all, *j1)],
        Dynamics::HomoStubborn { b1, .. } => vec![spec("B1", &all, *b1)],
        Dynamics::HeteroPrejudice { j1, j2, s1, s2, .. } => {
            let mut out = Vec::new();
            if !s1.is_empty() {
                out.push(spec("J1", s1, *j1));
            }
            if !s2.is_empty() {
                out.push(spec("J2", s2, *j2));
            }
            out
        }
        Dynamics::HeteroStubborn { b1, b2, .. } => {
            vec![spec("B1", &all, *b1), spec("B2", &all, *b2)]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchoredSeries {
    pub label: String,
    pub anchor: f64,
    pub values: Vec<f64>,
}

/// Per-step metrics of a whole trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub diameter: Vec<f64>,
    pub anchored: Vec<AnchoredSeries>,
    pub clusters: Vec<usize>,
}

impl MetricsSeries {
    pub fn compute(trajectory: &Trajectory, epsilon: f64, anchors: &[AnchorSpec]) -> Result<Self> {
        let all: Vec<usize> = (0..trajectory.initial().n()).collect();
        let diameter = trajectory
            .states
            .iter()
            .map(|s| diameter(s, &all))
            .collect::<Result<Vec<_>>>()?;
        let anchored = anchors
            .iter()
            .map(|a| {
                let values = trajectory
                    .states
                    .iter()
                    .map(|s| anchored_deviation(s, &a.subset, a.anchor))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnchoredSeries {
                    label: a.label.clone(),
                    anchor: a.anchor,
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let clusters = trajectory
            .states
            .iter()
            .map(|s| cluster_count(&s.mobile, epsilon))
            .collect();
        Ok(Self {
            diameter,
            anchored,
            clusters,
        })
    }

    pub fn len(&self) -> usize {
        self.diameter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diameter.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedStream;
    use rand::Rng;

    fn state(values: &[f64]) -> OpinionState {
        OpinionState {
            t: 0,
            mobile: values.to_vec(),
            stubborn: vec![],
        }
    }

    fn random_values(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = SeedStream::new(seed, 0).rng();
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn diameter_examples() {
        let s = state(&[0.1, 0.4, 0.9]);
        assert!((diameter(&s, &[0, 1, 2]).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(diameter(&s, &[1]).unwrap(), 0.0);
        assert!(matches!(diameter(&s, &[]), Err(Error::EmptySubset)));
        assert!(diameter(&s, &[3]).is_err());
    }

    #[test]
    fn diameter_matches_pairwise_oracle() {
        for seed in 0..20 {
            let xs = random_values(seed, 20);
            let mut oracle: f64 = 0.0;
            for a in &xs {
                for b in &xs {
                    oracle = oracle.max((a - b).abs());
                }
            }
            let all: Vec<usize> = (0..20).collect();
            assert_eq!(diameter(&state(&xs), &all).unwrap(), oracle);
        }
    }

    #[test]
    fn anchored_examples() {
        assert_eq!(
            anchored_deviation(&state(&[0.5, 0.5]), &[0, 1], 0.5).unwrap(),
            0.0
        );
        assert!(
            (anchored_deviation(&state(&[0.1, 0.9]), &[0, 1], 0.5).unwrap() - 0.4).abs() < 1e-15
        );
        assert!(anchored_deviation(&state(&[0.1]), &[], 0.5).is_err());
        let xs = random_values(77, 25);
        let subset: Vec<usize> = (0..25).step_by(3).collect();
        let mut oracle: f64 = 0.0;
        for &i in &subset {
            oracle = oracle.max((xs[i] - 0.3).abs());
        }
        assert_eq!(
            anchored_deviation(&state(&xs), &subset, 0.3).unwrap(),
            oracle
        );
    }

    fn reverse_scan_entry(series: &[f64], phi: f64) -> Option<u64> {
        let mut t = series.len();
        while t > 0 && series[t - 1] <= phi {
            t -= 1;
        }
        (t < series.len()).then_some(t as u64)
    }

    #[test]
    fn consensus_entry_examples() {
        let r = consensus_entry(&[0.5, 0.3, 0.01, 0.01, 0.01], 0.02, 2);
        assert_eq!(r.entry_time, Some(2));
        assert_eq!(r.tail_margin, Some(2));
        assert_eq!(r.verdict, Verdict::Confirmed);

        let r = consensus_entry(&[0.5, 0.3], 0.02, 0);
        assert_eq!(r.entry_time, None);
        assert_eq!(r.verdict, Verdict::NotReached);

        let r = consensus_entry(&[0.5, 0.01, 0.01, 0.03, 0.01, 0.01], 0.02, 3);
        assert_eq!(r.entry_time, Some(4));
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn consensus_entry_matches_reverse_scan() {
        for seed in 0..200 {
            let xs = random_values(seed, 1 + (seed as usize % 40));
            for phi in [0.1, 0.5, 0.9] {
                assert_eq!(
                    consensus_entry(&xs, phi, 0).entry_time,
                    reverse_scan_entry(&xs, phi)
                );
            }
        }
    }

    #[test]
    fn limsup_examples() {
        assert_eq!(limsup_estimate(&[0.3; 10], 4).unwrap(), 0.3);
        assert_eq!(limsup_estimate(&[1.0, 1.0, 0.1, 0.2, 0.1], 3).unwrap(), 0.2);
        assert!(limsup_estimate(&[1.0], 0).is_err());
        assert!(limsup_estimate(&[1.0], 2).is_err());
    }

    #[test]
    fn cluster_examples() {
        let groups = cluster_partition(&state(&[0.1, 0.15, 0.8]), 0.2);
        assert_eq!(groups, vec![vec![0, 1], vec![2]]);
        assert_eq!(cluster_partition(&state(&[0.4; 5]), 0.2).len(), 1);
        assert_eq!(cluster_count(&[0.1, 0.15, 0.8], 0.2), 2);
        assert_eq!(cluster_count(&[], 0.2), 0);
    }

    #[test]
    fn chained_cluster_can_exceed_epsilon() {
        let groups = cluster_partition(&state(&[0.0, 0.15, 0.3, 0.45]), 0.2);
        assert_eq!(groups.len(), 1);
    }

    #[test]
    fn default_window() {
        assert_eq!(default_tail_window(20_000), 4_000);
        assert_eq!(default_tail_window(1_000), 500);
        assert_eq!(default_tail_window(100), 100);
    }

    #[test]
    fn running_means_of_increasing_sequence() {
        let g = running_means(&[1.0, 2.0, 3.0, 4.0], 1);
        assert_eq!(g, vec![2.0, 2.5, 3.0]);
    }

    #[test]
    fn default_anchor_labels() {
        use crate::noise::NoiseModel;
        let c = ModelConfig {
            n: 4,
            epsilon: 0.2,
            noise: NoiseModel::zero(),
            dynamics: Dynamics::HeteroPrejudice {
                alpha: 0.4,
                j1: 0.6,
                j2: 0.2,
                s1: vec![0, 1],
                s2: vec![2, 3],
            },
        };
        let a = default_anchors(&c);
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].label, "J2");
        assert_eq!(a[1].subset, vec![2, 3]);
    }
}

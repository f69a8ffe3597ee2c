//! Seeded Monte Carlo ensembles and the theorem presets.
//!
//! An [`ExperimentSpec`] fixes a model, an initial-condition law, a horizon
//! and a list of [`BoundCheck`]s. [`run_ensemble`] runs every replication on
//! its own [`SeedStream`], evaluates each check on the per-step metric series
//! and aggregates pass fractions. Replications run on the rayon pool; results
//! are keyed by replication index so the report does not depend on
//! scheduling.
//!
//! Almost-sure statements are tested at finite horizon: a replication passes a
//! `TailMax` check when the maximum over the trailing window stays within the
//! bound, and a `ConfirmedEntry` check when the bound holds from some step on
//! for at least `min_tail` steps. An experiment passes when the fraction of
//! replications passing every check reaches `pass_threshold` (0.95 by
//! default).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Model;
use crate::error::{Error, Result, Violation};
use crate::metrics::{
    anchored_deviation, cluster_count, consensus_entry, default_tail_window, diameter,
    limsup_estimate, Verdict,
};
use crate::model::{Dynamics, ModelConfig, Variant};
use crate::noise::NoiseModel;
use crate::report::fmt_sig;
use crate::seed::SeedStream;
use crate::state::{OpinionState, Trajectory};

pub const DEFAULT_PASS_THRESHOLD: f64 = 0.95;
pub const DEFAULT_NOISY_HORIZON: u64 = 20_000;
pub const DEFAULT_NOISE_FREE_HORIZON: u64 = 10_000;

pub const CLUSTER_RULE: &str =
    "clusters: sorted opinions split wherever consecutive values differ by more than epsilon";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subset {
    V,
    S1,
    S2,
    V1,
    V2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CheckMode {
    Diameter,
    Anchored { anchor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Bound must hold from an entry time through at least `min_tail` steps.
    ConfirmedEntry,
    /// Maximum over the trailing window must stay within the bound.
    TailMax,
    /// Reported only; no bound is asserted.
    Descriptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    pub subset: Subset,
    #[serde(flatten)]
    pub mode: CheckMode,
    pub bound: Option<f64>,
    pub criterion: Criterion,
}

impl BoundCheck {
    pub fn diameter(label: &str, subset: Subset, bound: f64, criterion: Criterion) -> Self {
        Self {
            label: label.into(),
            subset,
            mode: CheckMode::Diameter,
            bound: Some(bound),
            criterion,
        }
    }

    pub fn anchored(
        label: &str,
        subset: Subset,
        anchor: f64,
        bound: f64,
        criterion: Criterion,
    ) -> Self {
        Self {
            label: label.into(),
            subset,
            mode: CheckMode::Anchored { anchor },
            bound: Some(bound),
            criterion,
        }
    }

    fn evaluate(&self, state: &OpinionState, subset: &[usize]) -> f64 {
        match self.mode {
            CheckMode::Diameter => diameter(state, subset),
            CheckMode::Anchored { anchor } => anchored_deviation(state, subset, anchor),
        }
        .expect("subsets resolved during validation")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open {
            x > self.lo
        } else {
            x >= self.lo
        };
        let below = if self.hi_open {
            x < self.hi
        } else {
            x <= self.hi
        };
        above && below
    }

    fn describe(&self) -> String {
        format!(
            "{}{}, {}{}",
            if self.lo_open { "(" } else { "[" },
            fmt_sig(self.lo),
            fmt_sig(self.hi),
            if self.hi_open { ")" } else { "]" }
        )
    }
}

/// A union of intervals inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub intervals: Vec<Interval>,
}

impl Region {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn describe(&self) -> String {
        self.intervals
            .iter()
            .map(Interval::describe)
            .collect::<Vec<_>>()
            .join(" ∪ ")
    }

    // Disjoint closed hull pieces, sorted.
    fn merged(&self) -> Vec<(f64, f64)> {
        let mut pieces: Vec<(f64, f64)> = self.intervals.iter().map(|i| (i.lo, i.hi)).collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in pieces {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        out
    }

    /// Uniform draw over the union (endpoints have measure zero; a draw that
    /// lands on an excluded endpoint is redrawn).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let pieces = self.merged();
        let total: f64 = pieces.iter().map(|(lo, hi)| hi - lo).sum();
        if total == 0.0 {
            return pieces[0].0;
        }
        loop {
            let mut u = rng.random_range(0.0..total);
            let mut x = pieces.last().unwrap().1;
            for &(lo, hi) in &pieces {
                if u < hi - lo {
                    x = lo + u;
                    break;
                }
                u -= hi - lo;
            }
            if self.contains(x) {
                return x;
            }
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.intervals.is_empty() {
            out.push("region has no intervals".to_string());
        }
        for i in &self.intervals {
            if !(0.0 <= i.lo && i.lo <= i.hi && i.hi <= 1.0) {
                out.push(format!("interval {} is not inside [0,1]", i.describe()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// i.i.d. uniform on `[0, 1]`.
    Uniform,
    /// The same opinions in every replication.
    Fixed { values: Vec<f64> },
    /// Agent `i` is drawn uniformly from `regions[i]`.
    Regions { regions: Vec<Region> },
}

impl InitialCondition {
    pub fn sample<R: Rng + ?Sized>(&self, model: &Model, rng: &mut R) -> Vec<f64> {
        match self {
            InitialCondition::Uniform => model.sample_initial(rng),
            InitialCondition::Fixed { values } => values.clone(),
            InitialCondition::Regions { regions } => {
                regions.iter().map(|r| r.sample(rng)).collect()
            }
        }
    }
}

/// One evaluated hypothesis of a theorem preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub statement: String,
    pub evaluated: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy)]
enum Rel {
    Lt,
    Le,
    Gt,
}

fn compare(statement: &str, lhs: f64, rel: Rel, rhs: f64) -> Condition {
    let holds = match rel {
        Rel::Lt => lhs < rhs,
        Rel::Le => lhs <= rhs,
        Rel::Gt => lhs > rhs,
    };
    Condition {
        statement: statement.to_string(),
        evaluated: format!("{} vs {}", fmt_sig(lhs), fmt_sig(rhs)),
        holds,
    }
}

/// Vertex groups `V1`, `V2` of a split population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Groups {
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub label: String,
    pub config: ModelConfig,
    pub initial: InitialCondition,
    pub replications: u64,
    pub horizon: u64,
    pub min_tail: u64,
    pub tail_window: u64,
    pub checks: Vec<BoundCheck>,
    pub master_seed: u64,
    pub pass_threshold: f64,
    pub groups: Option<Groups>,
    /// Cluster count every replication is expected to end with, if any.
    pub expected_clusters: Option<usize>,
    pub track_fixed_point: bool,
    pub hypotheses: Vec<Condition>,
    pub out_of_hypothesis: bool,
    pub notes: Vec<String>,
}

impl ExperimentSpec {
    /// Plain experiment with defaults; presets fill in the rest.
    pub fn new(label: &str, config: ModelConfig, settings: &RunSettings) -> Self {
        let horizon = settings.horizon.unwrap_or(if config.noise.is_zero() {
            DEFAULT_NOISE_FREE_HORIZON
        } else {
            DEFAULT_NOISY_HORIZON
        });
        let tail = settings
            .tail_window
            .unwrap_or_else(|| default_tail_window(horizon));
        let min_tail = settings
            .min_tail
            .unwrap_or_else(|| tail.min(horizon.saturating_sub(1)));
        Self {
            label: label.to_string(),
            config,
            initial: InitialCondition::Uniform,
            replications: settings.replications,
            horizon,
            min_tail,
            tail_window: tail,
            checks: Vec::new(),
            master_seed: settings.master_seed,
            pass_threshold: settings.pass_threshold,
            groups: None,
            expected_clusters: None,
            track_fixed_point: false,
            hypotheses: Vec::new(),
            out_of_hypothesis: false,
            notes: Vec::new(),
        }
    }

    pub fn resolve(&self, subset: Subset) -> Result<Vec<usize>> {
        let n = self.config.n;
        let missing = |what: &str| {
            Error::InvalidSpec(vec![format!(
                "subset {subset:?} needs {what}, which this experiment does not define"
            )])
        };
        match (subset, &self.config.dynamics) {
            (Subset::V, _) => Ok((0..n).collect()),
            (Subset::S1, Dynamics::HomoPrejudice { s1, .. })
            | (Subset::S1, Dynamics::HeteroPrejudice { s1, .. }) => Ok(s1.clone()),
            (Subset::S2, Dynamics::HeteroPrejudice { s2, .. }) => Ok(s2.clone()),
            (Subset::S1 | Subset::S2, _) => Err(missing("prejudiced groups")),
            (Subset::V1, _) => self
                .groups
                .as_ref()
                .map(|g| g.v1.clone())
                .ok_or_else(|| missing("groups V1/V2")),
            (Subset::V2, _) => self
                .groups
                .as_ref()
                .map(|g| g.v2.clone())
                .ok_or_else(|| missing("groups V1/V2")),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self.config.violations();
        let n = self.config.n;
        if self.replications == 0 {
            out.push("replications must be at least 1".into());
        }
        if self.horizon <= self.min_tail {
            out.push(format!(
                "horizon ({}) must exceed min_tail ({})",
                self.horizon, self.min_tail
            ));
        }
        if self.tail_window == 0 || self.tail_window > self.horizon + 1 {
            out.push(format!(
                "tail window must lie in [1, horizon + 1] = [1, {}], got {}",
                self.horizon + 1,
                self.tail_window
            ));
        }
        if !(0.0..=1.0).contains(&self.pass_threshold) {
            out.push(format!(
                "pass threshold must lie in [0,1], got {}",
                self.pass_threshold
            ));
        }
        if let Some(g) = &self.groups {
            let mut seen = vec![0u8; n];
            for &i in g.v1.iter().chain(&g.v2) {
                if i >= n {
                    out.push(format!("group member {i} is not an agent index (n = {n})"));
                } else {
                    seen[i] += 1;
                }
            }
            if seen.iter().any(|&c| c != 1) {
                out.push("groups V1 and V2 must partition the agents".into());
            }
        }
        for c in &self.checks {
            match c.bound {
                Some(b) if !(b.is_finite() && b >= 0.0) => out.push(format!(
                    "check {}: bound must be finite and >= 0, got {b}",
                    c.label
                )),
                None if c.criterion != Criterion::Descriptive => out.push(format!(
                    "check {}: only descriptive checks may omit the bound",
                    c.label
                )),
                _ => {}
            }
            if let CheckMode::Anchored { anchor } = c.mode {
                if !(0.0..=1.0).contains(&anchor) {
                    out.push(format!(
                        "check {}: anchor must lie in [0,1], got {anchor}",
                        c.label
                    ));
                }
            }
            match self.resolve(c.subset) {
                Ok(s) if s.is_empty() => {
                    out.push(format!("check {}: subset {:?} is empty", c.label, c.subset))
                }
                Ok(_) => {}
                Err(Error::InvalidSpec(v)) => out.extend(v),
                Err(e) => out.push(e.to_string()),
            }
        }
        match &self.initial {
            InitialCondition::Uniform => {}
            InitialCondition::Fixed { values } => {
                if values.len() != n {
                    out.push(format!(
                        "expected {n} initial opinions, got {}",
                        values.len()
                    ));
                }
                if values.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    out.push("initial opinions must lie in [0,1]".into());
                }
            }
            InitialCondition::Regions { regions } => {
                if regions.len() != n {
                    out.push(format!(
                        "expected {n} initial regions, got {}",
                        regions.len()
                    ));
                }
                for r in regions {
                    out.extend(r.violations());
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
            Err(Error::InvalidSpec(v))
        }
    }
}

/// Knobs shared by every preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub replications: u64,
    /// Defaults to 20 000 steps with noise, 10 000 without.
    pub horizon: Option<u64>,
    pub master_seed: u64,
    /// Family template; its bound is replaced by the preset's `delta`.
    pub noise: NoiseModel,
    pub tail_window: Option<u64>,
    pub min_tail: Option<u64>,
    pub pass_threshold: f64,
    /// Run even if a theorem hypothesis fails; the report is flagged.
    pub override_hypothesis: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            replications: 100,
            horizon: None,
            master_seed: 0,
            noise: NoiseModel::uniform(1.0),
            tail_window: None,
            min_tail: None,
            pass_threshold: DEFAULT_PASS_THRESHOLD,
            override_hypothesis: false,
        }
    }
}

impl RunSettings {
    pub fn new(replications: u64, horizon: Option<u64>, master_seed: u64) -> Self {
        Self {
            replications,
            horizon,
            master_seed,
            ..Self::default()
        }
    }

    fn noise(&self, delta: f64) -> NoiseModel {
        self.noise.with_delta(delta)
    }
}

fn gate(
    mut spec: ExperimentSpec,
    conditions: Vec<Condition>,
    settings: &RunSettings,
) -> Result<ExperimentSpec> {
    let failed: Vec<Violation> = conditions
        .iter()
        .filter(|c| !c.holds)
        .map(|c| Violation {
            statement: c.statement.clone(),
            evaluated: c.evaluated.clone(),
        })
        .collect();
    if !failed.is_empty() {
        if !settings.override_hypothesis {
            return Err(Error::Hypothesis(failed));
        }
        spec.out_of_hypothesis = true;
        spec.notes
            .push("out-of-hypothesis exploration: at least one hypothesis fails".into());
    }
    spec.hypotheses = conditions;
    Ok(spec)
}

fn delta_positive(delta: f64) -> Condition {
    compare("δ > 0", delta, Rel::Gt, 0.0)
}

/// Plain noisy model: finite-time `2δ`-consensus for `δ ∈ (0, ε/2]`.
pub fn preset_theorem1a(
    n: usize,
    epsilon: f64,
    delta: f64,
    settings: &RunSettings,
) -> Result<ExperimentSpec> {
    let config = ModelConfig::plain(n, epsilon, settings.noise(delta));
    let mut spec = ExperimentSpec::new("1a: finite-time 2δ-consensus", config, settings);
    spec.checks.push(BoundCheck::diameter(
        "d_V <= 2δ",
        Subset::V,
        2.0 * delta,
        Criterion::ConfirmedEntry,
    ));
    let conditions = vec![
        delta_positive(delta),
        compare("δ ≤ ε/2", delta, Rel::Le, epsilon / 2.0),
    ];
    gate(spec, conditions, settings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomoPrejudiceParams {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub j1: f64,
    pub s1: Vec<usize>,
}

/// Homogeneous prejudice: the consensus radius depends on constants not
/// available in closed form, so the deviation from `J1` is only reported.
pub fn preset_homo_prejudice(
    p: &HomoPrejudiceParams,
    settings: &RunSettings,
) -> Result<ExperimentSpec> {
    let config = ModelConfig {
        n: p.n,
        epsilon: p.epsilon,
        noise: settings.noise(p.delta),
        dynamics: Dynamics::HomoPrejudice {
            alpha: p.alpha,
            j1: p.j1,
            s1: p.s1.clone(),
        },
    };
    let mut spec = ExperimentSpec::new("1b: deviation from J1 (descriptive)", config, settings);
    spec.checks.push(BoundCheck {
        label: "d_V^J1 (reported)".into(),
        subset: Subset::V,
        mode: CheckMode::Anchored { anchor: p.j1 },
        bound: None,
        criterion: Criterion::Descriptive,
    });
    spec.notes
        .push("no closed-form bound is asserted; tail maxima are descriptive".into());
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomoStubbornParams {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub b1: f64,
    pub b1_count: usize,
}

/// One stubborn value: `2δ`-consensus and `(n+1)δ`-consensus with `B1` for
/// `δ ∈ (0, ε/(2(n+1)))`.
pub fn preset_theorem1c(p: &HomoStubbornParams, settings: &RunSettings) -> Result<ExperimentSpec> {
    let config = ModelConfig {
        n: p.n,
        epsilon: p.epsilon,
        noise: settings.noise(p.delta),
        dynamics: Dynamics::HomoStubborn {
            b1: p.b1,
            b1_count: p.b1_count,
        },
    };
    let mut spec = ExperimentSpec::new("1c: consensus with stubborn B1", config, settings);
    let n1 = (p.n + 1) as f64;
    spec.checks.push(BoundCheck::diameter(
        "d_V <= 2δ",
        Subset::V,
        2.0 * p.delta,
        Criterion::TailMax,
    ));
    spec.checks.push(BoundCheck::anchored(
        "d_V^B1 <= (n+1)δ",
        Subset::V,
        p.b1,
        n1 * p.delta,
        Criterion::TailMax,
    ));
    let conditions = vec![
        delta_positive(p.delta),
        compare("δ < ε/(2(n+1))", p.delta, Rel::Lt, p.epsilon / (2.0 * n1)),
    ];
    gate(spec, conditions, settings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroPrejudiceParams {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub j1: f64,
    pub j2: f64,
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
}

impl HeteroPrejudiceParams {
    /// `S1` = the first `s1_size` agents, `S2` = the rest.
    pub fn split(
        n: usize,
        s1_size: usize,
        epsilon: f64,
        delta: f64,
        alpha: f64,
        j1: f64,
        j2: f64,
    ) -> Self {
        let s1_size = s1_size.min(n);
        Self {
            n,
            epsilon,
            delta,
            alpha,
            j1,
            j2,
            s1: (0..s1_size).collect(),
            s2: (s1_size..n).collect(),
        }
    }

    /// `((1 - α)ε + δ) / α`.
    pub fn coarse_bound(&self) -> f64 {
        ((1.0 - self.alpha) * self.epsilon + self.delta) / self.alpha
    }

    /// `δ / α`.
    pub fn fine_bound(&self) -> f64 {
        self.delta / self.alpha
    }

    fn config(&self, settings: &RunSettings) -> ModelConfig {
        ModelConfig {
            n: self.n,
            epsilon: self.epsilon,
            noise: settings.noise(self.delta),
            dynamics: Dynamics::HeteroPrejudice {
                alpha: self.alpha,
                j1: self.j1,
                j2: self.j2,
                s1: self.s1.clone(),
                s2: self.s2.clone(),
            },
        }
    }

    fn anchored_checks(&self, bound: f64, tag: &str) -> Vec<BoundCheck> {
        vec![
            BoundCheck::anchored(
                &format!("d_S1^J1 <= {tag}"),
                Subset::S1,
                self.j1,
                bound,
                Criterion::TailMax,
            ),
            BoundCheck::anchored(
                &format!("d_S2^J2 <= {tag}"),
                Subset::S2,
                self.j2,
                bound,
                Criterion::TailMax,
            ),
        ]
    }
}

/// Heterogeneous prejudice, coarse bound: each group stays within
/// `((1-α)ε+δ)/α` of its prejudice.
pub fn preset_theorem2(
    p: &HeteroPrejudiceParams,
    settings: &RunSettings,
) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(
        "2: prejudiced groups near J1, J2",
        p.config(settings),
        settings,
    );
    spec.checks = p.anchored_checks(p.coarse_bound(), "((1-α)ε+δ)/α");
    spec.expected_clusters = Some(2);
    let conditions = vec![
        compare("|J1−J2| > ε", (p.j1 - p.j2).abs(), Rel::Gt, p.epsilon),
        compare("ε < 1", p.epsilon, Rel::Lt, 1.0),
    ];
    gate(spec, conditions, settings)
}

/// Heterogeneous prejudice, fine bound `δ/α` when the prejudices are far
/// enough apart.
pub fn preset_theorem3(
    p: &HeteroPrejudiceParams,
    settings: &RunSettings,
) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(
        "3: bipartite δ/α-consensus with J1, J2",
        p.config(settings),
        settings,
    );
    spec.checks = p.anchored_checks(p.fine_bound(), "δ/α");
    spec.expected_clusters = Some(2);
    let conditions = vec![compare(
        "J1−J2 > ε + 2((1−α)ε+δ)/α",
        p.j1 - p.j2,
        Rel::Gt,
        p.epsilon + 2.0 * p.coarse_bound(),
    )];
    gate(spec, conditions, settings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StubbornCase {
    /// Single group started in `[0, B2−ε) ∪ (B1+ε, B2]`.
    I,
    /// `V1` started in `[0, B1]`, `V2` in `[B2, 1]`.
    II,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroStubbornParams {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub b1: f64,
    pub b2: f64,
    pub b1_count: usize,
    pub b2_count: usize,
    /// Members of `V1` (case II only); `V2` is the complement.
    pub v1: Vec<usize>,
    /// Explicit initial opinions; otherwise sampled from the case's regions.
    pub initial: Option<Vec<f64>>,
}

pub fn preset_theorem4(
    case: StubbornCase,
    p: &HeteroStubbornParams,
    settings: &RunSettings,
) -> Result<ExperimentSpec> {
    let config = ModelConfig {
        n: p.n,
        epsilon: p.epsilon,
        noise: settings.noise(p.delta),
        dynamics: Dynamics::HeteroStubborn {
            b1: p.b1,
            b1_count: p.b1_count,
            b2: p.b2,
            b2_count: p.b2_count,
        },
    };
    let n1 = (p.n + 1) as f64;
    let gap = p.b2 - p.b1 - p.epsilon;
    let mut conditions = vec![
        compare("B2−B1 > ε", p.b2 - p.b1, Rel::Gt, p.epsilon),
        delta_positive(p.delta),
    ];
    let label = match case {
        StubbornCase::I => "4(i): consensus between two stubborn values",
        StubbornCase::II => "4(ii): split groups beside two stubborn values",
    };
    let mut spec = ExperimentSpec::new(label, config, settings);
    let regions: Vec<Region> = match case {
        StubbornCase::I => {
            conditions.push(compare("δ < (B2−B1−ε)/(n+1)", p.delta, Rel::Lt, gap / n1));
            spec.checks.push(BoundCheck::diameter(
                "d_V <= 2δ",
                Subset::V,
                2.0 * p.delta,
                Criterion::TailMax,
            ));
            spec.notes.push(
                "initial region [0, B2−ε) ∪ (B1+ε, B2] is taken literally; the two pieces \
                 overlap whenever B2−ε > B1+ε"
                    .into(),
            );
            let r = Region::new(vec![
                Interval {
                    lo: 0.0,
                    hi: p.b2 - p.epsilon,
                    lo_open: false,
                    hi_open: true,
                },
                Interval {
                    lo: p.b1 + p.epsilon,
                    hi: p.b2,
                    lo_open: true,
                    hi_open: false,
                },
            ]);
            vec![r; p.n]
        }
        StubbornCase::II => {
            conditions.push(compare(
                "δ < (B2−B1−ε)/(2(n+1))",
                p.delta,
                Rel::Lt,
                gap / (2.0 * n1),
            ));
            let v2: Vec<usize> = (0..p.n).filter(|i| !p.v1.contains(i)).collect();
            if !p.v1.is_empty() {
                spec.checks.push(BoundCheck::diameter(
                    "d_V1 <= 2δ",
                    Subset::V1,
                    2.0 * p.delta,
                    Criterion::TailMax,
                ));
            }
            if !v2.is_empty() {
                spec.checks.push(BoundCheck::diameter(
                    "d_V2 <= 2δ",
                    Subset::V2,
                    2.0 * p.delta,
                    Criterion::TailMax,
                ));
            }
            let low = Region::new(vec![Interval::closed(0.0, p.b1)]);
            let high = Region::new(vec![Interval::closed(p.b2, 1.0)]);
            let regions = (0..p.n)
                .map(|i| {
                    if p.v1.contains(&i) {
                        low.clone()
                    } else {
                        high.clone()
                    }
                })
                .collect();
            spec.groups = Some(Groups {
                v1: p.v1.clone(),
                v2,
            });
            regions
        }
    };
    match &p.initial {
        Some(x0) => {
            for (i, (&x, r)) in x0.iter().zip(&regions).enumerate() {
                conditions.push(Condition {
                    statement: format!("x_{i}(0) ∈ {}", r.describe()),
                    evaluated: fmt_sig(x),
                    holds: r.contains(x),
                });
            }
            spec.initial = InitialCondition::Fixed { values: x0.clone() };
        }
        None => spec.initial = InitialCondition::Regions { regions },
    }
    gate(spec, conditions, settings)
}

/// Noise-free run recording the fixed-point step and terminal clusters.
pub fn preset_noise_free_baseline(
    config: ModelConfig,
    settings: &RunSettings,
) -> Result<ExperimentSpec> {
    if !config.noise.is_zero() {
        return Err(Error::InvalidSpec(vec![
            "noise-free baseline requires the zero noise family".into(),
        ]));
    }
    let label = format!("baseline: noise-free {}", config.variant().name());
    let mut spec = ExperimentSpec::new(&label, config, settings);
    spec.track_fixed_point = true;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub entry_time: Option<u64>,
    pub tail_max: f64,
    pub verdict: Option<Verdict>,
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub index: u64,
    pub checks: Vec<CheckOutcome>,
    pub final_clusters: usize,
    pub fixed_point_step: Option<u64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quartiles {
    pub count: u64,
    pub min: u64,
    pub q1: u64,
    pub median: u64,
    pub q3: u64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: BoundCheck,
    pub pass_count: u64,
    pub pass_fraction: Option<f64>,
    pub tail_max: Spread,
    pub entry_times: Option<Quartiles>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterBin {
    pub clusters: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub variant: Variant,
    pub hypotheses: Vec<Condition>,
    pub out_of_hypothesis: bool,
    pub replications: u64,
    pub horizon: u64,
    pub tail_window: u64,
    pub min_tail: u64,
    pub master_seed: u64,
    pub pass_threshold: f64,
    pub checks: Vec<CheckSummary>,
    pub all_checks_pass_fraction: f64,
    pub passed: bool,
    pub cluster_rule: String,
    pub cluster_histogram: Vec<ClusterBin>,
    pub expected_clusters: Option<usize>,
    pub expected_cluster_fraction: Option<f64>,
    pub fixed_point_fraction: Option<f64>,
    pub notes: Vec<String>,
    pub per_replication: Vec<ReplicationResult>,
}

impl ExperimentReport {
    pub fn cluster_fraction(&self, clusters: usize) -> f64 {
        let hits = self
            .per_replication
            .iter()
            .filter(|r| r.final_clusters == clusters)
            .count();
        hits as f64 / self.replications as f64
    }
}

struct Resolved {
    model: Model,
    subsets: Vec<Vec<usize>>,
}

fn prepare(spec: &ExperimentSpec) -> Result<Resolved> {
    spec.validate()?;
    let model = Model::new(spec.config.clone())?;
    let subsets = spec
        .checks
        .iter()
        .map(|c| spec.resolve(c.subset))
        .collect::<Result<_>>()?;
    Ok(Resolved { model, subsets })
}

/// Drives one replication, handing every state `x(0) .. x(horizon)` to `visit`.
/// Returns the first fixed-point step seen. Noise-free runs stop stepping once
/// a fixed point is hit and replay the final state.
fn drive(
    spec: &ExperimentSpec,
    model: &Model,
    replication: u64,
    mut visit: impl FnMut(&OpinionState),
) -> Result<Option<u64>> {
    let mut rng = SeedStream::new(spec.master_seed, replication).rng();
    let x0 = spec.initial.sample(model, &mut rng);
    let mut state = model.initial_state(x0)?;
    let deterministic = spec.config.noise.is_zero();
    let mut fixed = None;
    visit(&state);
    for _ in 0..spec.horizon {
        if deterministic && fixed.is_some() {
            state.t += 1;
            visit(&state);
            continue;
        }
        let next = model.step(&state, &mut rng);
        if fixed.is_none() && next.mobile == state.mobile {
            fixed = Some(state.t);
        }
        state = next;
        visit(&state);
    }
    Ok(fixed)
}

fn run_replication(
    spec: &ExperimentSpec,
    resolved: &Resolved,
    replication: u64,
) -> Result<ReplicationResult> {
    let len = spec.horizon as usize + 1;
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(len); spec.checks.len()];
    let mut final_clusters = 0;
    let fixed = drive(spec, &resolved.model, replication, |s| {
        for ((check, subset), out) in spec.checks.iter().zip(&resolved.subsets).zip(&mut series) {
            out.push(check.evaluate(s, subset));
        }
        if s.t == spec.horizon {
            final_clusters = cluster_count(&s.mobile, spec.config.epsilon);
        }
    })?;
    let mut checks = Vec::with_capacity(spec.checks.len());
    for (check, values) in spec.checks.iter().zip(&series) {
        let tail_max = limsup_estimate(values, spec.tail_window as usize)?;
        let entry = check
            .bound
            .map(|b| consensus_entry(values, b, spec.min_tail));
        let passed = match (check.criterion, check.bound, entry) {
            (Criterion::ConfirmedEntry, _, Some(e)) => Some(e.verdict == Verdict::Confirmed),
            (Criterion::TailMax, Some(b), _) => Some(tail_max <= b),
            _ => None,
        };
        checks.push(CheckOutcome {
            entry_time: entry.and_then(|e| e.entry_time),
            tail_max,
            verdict: entry.map(|e| e.verdict),
            passed,
        });
    }
    let mut passed = checks.iter().all(|c| c.passed != Some(false));
    if spec.track_fixed_point {
        passed &= fixed.is_some();
    }
    Ok(ReplicationResult {
        index: replication,
        checks,
        final_clusters,
        fixed_point_step: fixed,
        passed,
    })
}

/// Full trajectory of one replication, identical to what the ensemble saw.
pub fn replay(spec: &ExperimentSpec, replication: u64) -> Result<Trajectory> {
    let resolved = prepare(spec)?;
    let mut states = Vec::with_capacity(spec.horizon as usize + 1);
    drive(spec, &resolved.model, replication, |s| {
        states.push(s.clone())
    })?;
    Ok(Trajectory { states })
}

fn nearest_rank<T: Copy>(sorted: &[T], q: f64) -> T {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn fraction(count: u64, total: u64) -> f64 {
    count as f64 / total as f64
}

pub fn run_ensemble(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let resolved = prepare(spec)?;
    let per_replication: Vec<ReplicationResult> = (0..spec.replications)
        .into_par_iter()
        .map(|r| run_replication(spec, &resolved, r))
        .collect::<Result<_>>()?;
    let reps = spec.replications;

    let checks = spec
        .checks
        .iter()
        .enumerate()
        .map(|(k, check)| {
            let outcomes: Vec<&CheckOutcome> =
                per_replication.iter().map(|r| &r.checks[k]).collect();
            let pass_count = outcomes.iter().filter(|o| o.passed == Some(true)).count() as u64;
            let mut tails: Vec<f64> = outcomes.iter().map(|o| o.tail_max).collect();
            tails.sort_by(f64::total_cmp);
            let mut entries: Vec<u64> = outcomes.iter().filter_map(|o| o.entry_time).collect();
            entries.sort_unstable();
            CheckSummary {
                check: check.clone(),
                pass_count,
                pass_fraction: (check.criterion != Criterion::Descriptive)
                    .then(|| fraction(pass_count, reps)),
                tail_max: Spread {
                    min: tails[0],
                    median: nearest_rank(&tails, 0.5),
                    max: tails[tails.len() - 1],
                },
                entry_times: (!entries.is_empty()).then(|| Quartiles {
                    count: entries.len() as u64,
                    min: entries[0],
                    q1: nearest_rank(&entries, 0.25),
                    median: nearest_rank(&entries, 0.5),
                    q3: nearest_rank(&entries, 0.75),
                    max: entries[entries.len() - 1],
                }),
            }
        })
        .collect();

    let mut histogram: Vec<ClusterBin> = Vec::new();
    let mut counts: Vec<usize> = per_replication.iter().map(|r| r.final_clusters).collect();
    counts.sort_unstable();
    for c in counts {
        match histogram.last_mut() {
            Some(bin) if bin.clusters == c => bin.count += 1,
            _ => histogram.push(ClusterBin {
                clusters: c,
                count: 1,
            }),
        }
    }

    let all_pass = per_replication.iter().filter(|r| r.passed).count() as u64;
    let all_checks_pass_fraction = fraction(all_pass, reps);
    let expected_cluster_fraction = spec.expected_clusters.map(|want| {
        fraction(
            per_replication
                .iter()
                .filter(|r| r.final_clusters == want)
                .count() as u64,
            reps,
        )
    });
    let fixed_point_fraction = spec.track_fixed_point.then(|| {
        fraction(
            per_replication
                .iter()
                .filter(|r| r.fixed_point_step.is_some())
                .count() as u64,
            reps,
        )
    });

    Ok(ExperimentReport {
        label: spec.label.clone(),
        variant: spec.config.variant(),
        hypotheses: spec.hypotheses.clone(),
        out_of_hypothesis: spec.out_of_hypothesis,
        replications: reps,
        horizon: spec.horizon,
        tail_window: spec.tail_window,
        min_tail: spec.min_tail,
        master_seed: spec.master_seed,
        pass_threshold: spec.pass_threshold,
        checks,
        all_checks_pass_fraction,
        passed: all_checks_pass_fraction >= spec.pass_threshold,
        cluster_rule: CLUSTER_RULE.to_string(),
        cluster_histogram: histogram,
        expected_clusters: spec.expected_clusters,
        expected_cluster_fraction,
        fixed_point_fraction,
        notes: spec.notes.clone(),
        per_replication,
    })
}

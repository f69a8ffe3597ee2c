//! Command-line front end.
//!
//! ```text
//! noisy-hk simulate --model plain --n 10 --epsilon 0.2 --delta 0.008 --steps 2000 --seed 7 --out runs/
//! noisy-hk verify   --theorem 3 --epsilon 0.1 --alpha 0.8 --delta 0.01 --j1 0.9 --j2 0.1 --out runs/t3
//! noisy-hk baseline --model hetero-prejudice --n 20 --epsilon 0.2 --alpha 0.4 --j1 0.6 --j2 0.2 --out runs/fig2
//! ```
//!
//! Parameters may also come from a JSON file (`--config run.json`) holding the
//! same keys in snake case; flags given on the command line win. Every run
//! writes `effective_config.json` next to its outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::harness::{
    self, preset_homo_prejudice, preset_noise_free_baseline, preset_theorem1a, preset_theorem1c,
    preset_theorem2, preset_theorem3, preset_theorem4, ExperimentReport, ExperimentSpec,
    HeteroPrejudiceParams, HeteroStubbornParams, HomoPrejudiceParams, HomoStubbornParams,
    RunSettings, StubbornCase,
};
use crate::metrics::{default_anchors, MetricsSeries};
use crate::model::{Dynamics, ModelConfig, Variant};
use crate::noise::NoiseModel;
use crate::report::{emit_report, emit_trajectory_csv, fmt_sig, render_text, Format};
use crate::seed::SeedStream;

pub const DEFAULT_SIMULATE_STEPS: u64 = 2_000;

#[derive(Debug, Parser)]
#[command(
    name = "noisy-hk",
    version,
    about = "Noisy Hegselmann-Krause opinion dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Run one trajectory and write it as CSV.
    Simulate(RunParams),
    /// Run a theorem preset as a Monte Carlo ensemble.
    Verify(RunParams),
    /// Run a noise-free ensemble and record fixed points and clusters.
    Baseline(RunParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Verify,
    Baseline,
}

/// Every flag, also accepted as a key of the `--config` JSON file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// plain | homo-prejudice | homo-stubborn | hetero-prejudice | hetero-stubborn
    #[arg(long)]
    pub model: Option<String>,
    /// Number of mobile agents (default 10).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Noise bound.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub j1: Option<f64>,
    #[arg(long)]
    pub j2: Option<f64>,
    /// Size of S1 (the first agents); S2 is the rest.
    #[arg(long)]
    pub s1_size: Option<usize>,
    /// Size of V1 for theorem 4ii (the first agents); V2 is the rest.
    #[arg(long)]
    pub v1_size: Option<usize>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
    #[arg(long)]
    pub b1_count: Option<usize>,
    #[arg(long)]
    pub b2_count: Option<usize>,
    /// uniform | tgauss | rademacher | zero
    #[arg(long)]
    pub noise: Option<String>,
    /// Pre-truncation standard deviation for tgauss (default: delta).
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Atom magnitude for rademacher (default: delta).
    #[arg(long)]
    pub noise_atom: Option<f64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trailing window for tail maxima.
    #[arg(long)]
    pub tail: Option<u64>,
    /// Steps a bound must hold after entry to count as confirmed.
    #[arg(long)]
    pub min_tail: Option<u64>,
    /// 1a | 1b | 1c | 2 | 3 | 4i | 4ii
    #[arg(long)]
    pub theorem: Option<String>,
    /// Fraction of replications that must pass (default 0.95).
    #[arg(long)]
    pub pass_threshold: Option<f64>,
    /// Run a preset even when its hypotheses fail.
    #[arg(long)]
    pub override_hypothesis: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,text.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads for replications (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

macro_rules! prefer {
    ($flags:expr, $file:expr; $($field:ident),* $(,)?) => {
        RunParams {
            config: $flags.config.clone(),
            override_hypothesis: $flags.override_hypothesis || $file.override_hypothesis,
            $($field: $flags.$field.clone().or_else(|| $file.$field.clone()),)*
        }
    };
}

impl RunParams {
    /// Flags in `self` override values from `file`.
    pub fn merged_over(&self, file: &RunParams) -> RunParams {
        prefer!(self, file;
            model, n, epsilon, delta, alpha, j1, j2, s1_size, v1_size, b1, b2, b1_count,
            b2_count, noise, noise_sigma, noise_atom, steps, reps, seed, tail, min_tail,
            theorem, pass_threshold, out, format, threads)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Job {
    Simulate {
        config: ModelConfig,
        steps: u64,
        seed: u64,
    },
    Experiment {
        spec: Box<ExperimentSpec>,
    },
}

/// A parsed and fully validated invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub params: RunParams,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub threads: usize,
    pub job: Job,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Theorem {
    T1a,
    T1b,
    T1c,
    T2,
    T3,
    T4i,
    T4ii,
}

impl Theorem {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "1a" => Theorem::T1a,
            "1b" => Theorem::T1b,
            "1c" => Theorem::T1c,
            "2" => Theorem::T2,
            "3" => Theorem::T3,
            "4i" => Theorem::T4i,
            "4ii" => Theorem::T4ii,
            _ => return None,
        })
    }

    fn variant(self) -> Variant {
        match self {
            Theorem::T1a => Variant::PlainNoisy,
            Theorem::T1b => Variant::HomoPrejudice,
            Theorem::T1c => Variant::HomoStubborn,
            Theorem::T2 | Theorem::T3 => Variant::HeteroPrejudice,
            Theorem::T4i | Theorem::T4ii => Variant::HeteroStubborn,
        }
    }
}

fn parse_variant(s: &str) -> Option<Variant> {
    Variant::ALL.into_iter().find(|v| v.name() == s)
}

/// Collects every problem before giving up.
struct Checker<'a> {
    p: &'a RunParams,
    errors: Vec<String>,
}

impl Checker<'_> {
    fn require<T: Copy>(&mut self, value: Option<T>, flag: &str, why: &str) -> Option<T> {
        if value.is_none() {
            self.errors.push(format!("--{flag} is required {why}"));
        }
        value
    }

    fn unit(&mut self, value: Option<f64>, flag: &str) {
        if let Some(v) = value {
            if !(0.0..=1.0).contains(&v) {
                self.errors
                    .push(format!("--{flag}: {flag} must lie in [0,1], got {v}"));
            }
        }
    }

    fn ranges(&mut self) {
        let p = self.p;
        if let Some(e) = p.epsilon {
            if !(e > 0.0 && e <= 1.0) {
                self.errors
                    .push(format!("--epsilon: epsilon must lie in (0,1], got {e}"));
            }
        }
        if let Some(d) = p.delta {
            if !(d.is_finite() && d >= 0.0) {
                self.errors
                    .push(format!("--delta: delta must be >= 0, got {d}"));
            }
        }
        if let Some(a) = p.alpha {
            if !(a > 0.0 && a <= 1.0) {
                self.errors
                    .push(format!("--alpha: alpha must lie in (0,1], got {a}"));
            }
        }
        self.unit(p.j1, "j1");
        self.unit(p.j2, "j2");
        self.unit(p.b1, "b1");
        self.unit(p.b2, "b2");
        self.unit(p.pass_threshold, "pass-threshold");
        if p.n == Some(0) {
            self.errors.push("--n: n must be at least 1".into());
        }
        if p.reps == Some(0) {
            self.errors.push("--reps: reps must be at least 1".into());
        }
        if p.tail == Some(0) {
            self.errors
                .push("--tail: tail window must be at least 1".into());
        }
        if p.b1_count == Some(0) {
            self.errors.push("--b1-count: must be at least 1".into());
        }
        if p.b2_count == Some(0) {
            self.errors.push("--b2-count: must be at least 1".into());
        }
        if let (Some(n), Some(s)) = (p.n, p.s1_size) {
            if s > n {
                self.errors
                    .push(format!("--s1-size: must not exceed n = {n}, got {s}"));
            }
        }
        if let (Some(n), Some(s)) = (p.n, p.v1_size) {
            if s > n {
                self.errors
                    .push(format!("--v1-size: must not exceed n = {n}, got {s}"));
            }
        }
        if let Some(s) = p.noise_sigma {
            if !(s.is_finite() && s > 0.0) {
                self.errors
                    .push(format!("--noise-sigma: must be > 0, got {s}"));
            }
        }
    }

    fn noise(&mut self, delta: f64) -> Option<NoiseModel> {
        let p = self.p;
        let family = p
            .noise
            .as_deref()
            .unwrap_or(if delta == 0.0 { "zero" } else { "uniform" });
        let model = match family {
            "zero" => {
                if delta != 0.0 {
                    self.errors
                        .push(format!("--noise zero: requires delta = 0, got {delta}"));
                    return None;
                }
                NoiseModel::zero()
            }
            _ if delta == 0.0 => {
                self.errors.push(format!(
                    "--noise {family}: requires delta > 0 (use --noise zero)"
                ));
                return None;
            }
            "uniform" => NoiseModel::uniform(delta),
            "tgauss" => NoiseModel::truncated_gaussian(delta, p.noise_sigma.unwrap_or(delta)),
            "rademacher" => {
                let atom = p.noise_atom.unwrap_or(delta);
                if !(atom > 0.0 && atom <= delta) {
                    self.errors.push(format!(
                        "--noise-atom: must lie in (0, delta] = (0, {delta}], got {atom}"
                    ));
                    return None;
                }
                NoiseModel::scaled_rademacher(delta, atom)
            }
            other => {
                self.errors.push(format!(
                    "--noise: unknown family {other:?} (expected uniform, tgauss, rademacher or zero)"
                ));
                return None;
            }
        };
        Some(model)
    }

    fn dynamics(&mut self, variant: Variant, n: usize) -> Option<Dynamics> {
        let p = self.p;
        let why = format!("for --model {}", variant.name());
        Some(match variant {
            Variant::PlainNoisy => Dynamics::PlainNoisy,
            Variant::HomoPrejudice => {
                let alpha = self.require(p.alpha, "alpha", &why);
                let j1 = self.require(p.j1, "j1", &why);
                Dynamics::HomoPrejudice {
                    alpha: alpha?,
                    j1: j1?,
                    s1: (0..p.s1_size.unwrap_or(n).min(n)).collect(),
                }
            }
            Variant::HomoStubborn => Dynamics::HomoStubborn {
                b1: self.require(p.b1, "b1", &why)?,
                b1_count: p.b1_count.unwrap_or(1),
            },
            Variant::HeteroPrejudice => {
                let alpha = self.require(p.alpha, "alpha", &why);
                let j1 = self.require(p.j1, "j1", &why);
                let j2 = self.require(p.j2, "j2", &why);
                let s1 = p.s1_size.unwrap_or(n / 2).min(n);
                Dynamics::HeteroPrejudice {
                    alpha: alpha?,
                    j1: j1?,
                    j2: j2?,
                    s1: (0..s1).collect(),
                    s2: (s1..n).collect(),
                }
            }
            Variant::HeteroStubborn => {
                let b1 = self.require(p.b1, "b1", &why);
                let b2 = self.require(p.b2, "b2", &why);
                Dynamics::HeteroStubborn {
                    b1: b1?,
                    b1_count: p.b1_count.unwrap_or(1),
                    b2: b2?,
                    b2_count: p.b2_count.unwrap_or(1),
                }
            }
        })
    }

    fn finish<T>(self, value: Option<T>) -> Result<T> {
        match value {
            Some(v) if self.errors.is_empty() => Ok(v),
            _ => Err(Error::Usage(self.errors)),
        }
    }
}

fn settings(p: &RunParams, noise: NoiseModel) -> RunSettings {
    RunSettings {
        replications: p.reps.unwrap_or(100),
        horizon: p.steps,
        master_seed: p.seed.unwrap_or(0),
        noise,
        tail_window: p.tail,
        min_tail: p.min_tail,
        pass_threshold: p.pass_threshold.unwrap_or(harness::DEFAULT_PASS_THRESHOLD),
        override_hypothesis: p.override_hypothesis,
    }
}

fn as_usage(e: Error) -> Error {
    match e {
        Error::Usage(v) | Error::InvalidConfig(v) | Error::InvalidSpec(v) => Error::Usage(v),
        other => Error::Usage(vec![other.to_string()]),
    }
}

fn build_job(command: Command, p: &RunParams) -> Result<Job> {
    let mut c = Checker {
        p,
        errors: Vec::new(),
    };
    c.ranges();
    let n = p.n.unwrap_or(10);
    let epsilon = c.require(p.epsilon, "epsilon", "");
    let model = match p.model.as_deref() {
        Some(m) => match parse_variant(m) {
            Some(v) => Some(v),
            None => {
                c.errors.push(format!(
                    "--model: unknown model {m:?} (expected plain, homo-prejudice, homo-stubborn, hetero-prejudice or hetero-stubborn)"
                ));
                None
            }
        },
        None => None,
    };
    match command {
        Command::Simulate | Command::Baseline => {
            if p.theorem.is_some() {
                c.errors.push("--theorem only applies to verify".into());
            }
            let variant = match (model, p.model.is_some()) {
                (Some(v), _) => Some(v),
                (None, false) => c.require(None, "model", "for simulate and baseline"),
                (None, true) => None,
            };
            let delta = if command == Command::Baseline {
                if p.delta.is_some_and(|d| d != 0.0) {
                    c.errors
                        .push("--delta: baseline runs are noise-free; delta must be 0".into());
                }
                if p.noise.as_deref().is_some_and(|f| f != "zero") {
                    c.errors
                        .push("--noise: baseline runs use the zero family".into());
                }
                Some(0.0)
            } else {
                c.require(p.delta, "delta", "for simulate")
            };
            let noise = delta.and_then(|d| c.noise(d));
            let dynamics = variant.and_then(|v| c.dynamics(v, n));
            let config = match (epsilon, noise, dynamics) {
                (Some(epsilon), Some(noise), Some(dynamics)) => Some(ModelConfig {
                    n,
                    epsilon,
                    noise,
                    dynamics,
                }),
                _ => None,
            };
            let config = c.finish(config)?;
            config.validate().map_err(as_usage)?;
            if command == Command::Simulate {
                return Ok(Job::Simulate {
                    config,
                    steps: p.steps.unwrap_or(DEFAULT_SIMULATE_STEPS),
                    seed: p.seed.unwrap_or(0),
                });
            }
            let spec = preset_noise_free_baseline(config, &settings(p, NoiseModel::zero()))
                .map_err(as_usage)?;
            spec.validate().map_err(as_usage)?;
            Ok(Job::Experiment {
                spec: Box::new(spec),
            })
        }
        Command::Verify => {
            let theorem = match p.theorem.as_deref() {
                Some(t) => {
                    let parsed = Theorem::parse(t);
                    if parsed.is_none() {
                        c.errors.push(format!(
                            "--theorem: unknown theorem {t:?} (expected 1a, 1b, 1c, 2, 3, 4i or 4ii)"
                        ));
                    }
                    parsed
                }
                None => c.require(None, "theorem", "for verify"),
            };
            if let (Some(t), Some(m)) = (theorem, model) {
                if t.variant() != m {
                    c.errors.push(format!(
                        "--model: theorem {} runs the {} model, got {}",
                        p.theorem.as_deref().unwrap_or_default(),
                        t.variant().name(),
                        m.name()
                    ));
                }
            }
            let delta = c.require(p.delta, "delta", "for verify");
            let noise = delta.and_then(|d| c.noise(d));
            let why = theorem.map_or(String::new(), |t| format!("for theorem {t:?}"));
            let spec_args = (|| {
                let t = theorem?;
                let (epsilon, delta, noise) = (epsilon?, delta?, noise?);
                Some((t, epsilon, delta, noise))
            })();
            let mut job = None;
            if let Some((t, epsilon, delta, noise)) = spec_args {
                let s = settings(p, noise);
                let built = match t {
                    Theorem::T1a => Some(preset_theorem1a(n, epsilon, delta, &s)),
                    Theorem::T1b => {
                        let alpha = c.require(p.alpha, "alpha", &why);
                        let j1 = c.require(p.j1, "j1", &why);
                        match (alpha, j1) {
                            (Some(alpha), Some(j1)) => Some(preset_homo_prejudice(
                                &HomoPrejudiceParams {
                                    n,
                                    epsilon,
                                    delta,
                                    alpha,
                                    j1,
                                    s1: (0..p.s1_size.unwrap_or(n).min(n)).collect(),
                                },
                                &s,
                            )),
                            _ => None,
                        }
                    }
                    Theorem::T1c => c.require(p.b1, "b1", &why).map(|b1| {
                        preset_theorem1c(
                            &HomoStubbornParams {
                                n,
                                epsilon,
                                delta,
                                b1,
                                b1_count: p.b1_count.unwrap_or(1),
                            },
                            &s,
                        )
                    }),
                    Theorem::T2 | Theorem::T3 => {
                        let alpha = c.require(p.alpha, "alpha", &why);
                        let j1 = c.require(p.j1, "j1", &why);
                        let j2 = c.require(p.j2, "j2", &why);
                        match (alpha, j1, j2) {
                            (Some(alpha), Some(j1), Some(j2)) => {
                                let params = HeteroPrejudiceParams::split(
                                    n,
                                    p.s1_size.unwrap_or(n / 2),
                                    epsilon,
                                    delta,
                                    alpha,
                                    j1,
                                    j2,
                                );
                                Some(if t == Theorem::T2 {
                                    preset_theorem2(&params, &s)
                                } else {
                                    preset_theorem3(&params, &s)
                                })
                            }
                            _ => None,
                        }
                    }
                    Theorem::T4i | Theorem::T4ii => {
                        let b1 = c.require(p.b1, "b1", &why);
                        let b2 = c.require(p.b2, "b2", &why);
                        match (b1, b2) {
                            (Some(b1), Some(b2)) => {
                                let case = if t == Theorem::T4i {
                                    StubbornCase::I
                                } else {
                                    StubbornCase::II
                                };
                                let params = HeteroStubbornParams {
                                    n,
                                    epsilon,
                                    delta,
                                    b1,
                                    b2,
                                    b1_count: p.b1_count.unwrap_or(1),
                                    b2_count: p.b2_count.unwrap_or(1),
                                    v1: (0..p.v1_size.unwrap_or(n / 2).min(n)).collect(),
                                    initial: None,
                                };
                                Some(preset_theorem4(case, &params, &s))
                            }
                            _ => None,
                        }
                    }
                };
                job = built;
            }
            let built = c.finish(job)?;
            let spec = built.map_err(as_usage)?;
            spec.validate().map_err(as_usage)?;
            Ok(Job::Experiment {
                spec: Box::new(spec),
            })
        }
    }
}

fn parse_formats(s: &str, errors: &mut Vec<String>) -> Vec<Format> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match Format::parse(part) {
            Some(f) if !out.contains(&f) => out.push(f),
            Some(_) => {}
            None => errors.push(format!(
                "--format: unknown format {part:?} (expected csv, json or text)"
            )),
        }
    }
    out
}

fn load_config_file(path: &Path) -> Result<RunParams> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses and validates a full argument vector (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunManifest>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(vec![e.to_string()]))?;
    let (command, flags) = match cli.command {
        CliCommand::Simulate(p) => (Command::Simulate, p),
        CliCommand::Verify(p) => (Command::Verify, p),
        CliCommand::Baseline(p) => (Command::Baseline, p),
    };
    let params = match &flags.config {
        Some(path) => flags.merged_over(&load_config_file(path).map_err(as_usage)?),
        None => flags,
    };
    let mut errors = Vec::new();
    let formats = parse_formats(
        params.format.as_deref().unwrap_or("csv,json,text"),
        &mut errors,
    );
    if formats.is_empty() && errors.is_empty() {
        errors.push("--format: at least one format is required".into());
    }
    let out = params.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    if out.is_file() {
        errors.push(format!(
            "--out: {} is a file, not a directory",
            out.display()
        ));
    }
    let job = match build_job(command, &params) {
        Ok(job) => Some(job),
        Err(Error::Usage(v)) => {
            errors.extend(v);
            None
        }
        Err(e) => return Err(e),
    };
    match job {
        Some(job) if errors.is_empty() => Ok(RunManifest {
            command,
            threads: params.threads.unwrap_or(0),
            params,
            out,
            formats,
            job,
        }),
        _ => Err(Error::Usage(errors)),
    }
}

/// Final-state summary of a single simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub steps: u64,
    pub seed: u64,
    pub final_diameter: f64,
    pub final_anchored: Vec<(String, f64)>,
    pub final_clusters: usize,
    pub fixed_point_step: Option<u64>,
}

impl SimulationSummary {
    fn render_text(&self) -> String {
        let mut out = format!(
            "steps: {}\nseed: {}\nfinal d_V: {}\n",
            self.steps,
            self.seed,
            fmt_sig(self.final_diameter)
        );
        for (label, v) in &self.final_anchored {
            out.push_str(&format!("final d_anchor_{label}: {}\n", fmt_sig(*v)));
        }
        out.push_str(&format!("final clusters: {}\n", self.final_clusters));
        match self.fixed_point_step {
            Some(t) => out.push_str(&format!("fixed point from step: {t}\n")),
            None => out.push_str("fixed point from step: none\n"),
        }
        out
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub report: Option<ExperimentReport>,
    pub summary: Option<SimulationSummary>,
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(manifest: &RunManifest) -> Result<RunOutput> {
    let out = &manifest.out;
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;
    let mut files = Vec::new();
    let effective = out.join("effective_config.json");
    write(
        &effective,
        &(serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n"),
    )?;
    files.push(effective);

    match &manifest.job {
        Job::Simulate {
            config,
            steps,
            seed,
        } => {
            let model = Model::new(config.clone())?;
            let trajectory = model.run_trajectory(None, *steps, SeedStream::new(*seed, 0))?;
            let metrics =
                MetricsSeries::compute(&trajectory, config.epsilon, &default_anchors(config))?;
            let summary = SimulationSummary {
                steps: *steps,
                seed: *seed,
                final_diameter: *metrics.diameter.last().unwrap(),
                final_anchored: metrics
                    .anchored
                    .iter()
                    .map(|a| (a.label.clone(), *a.values.last().unwrap()))
                    .collect(),
                final_clusters: *metrics.clusters.last().unwrap(),
                fixed_point_step: trajectory.fixed_point_step(),
            };
            for f in &manifest.formats {
                let path = match f {
                    Format::Csv => {
                        let path = out.join("trajectory.csv");
                        emit_trajectory_csv(&trajectory, &metrics, &path)?;
                        path
                    }
                    Format::Json => {
                        let path = out.join("summary.json");
                        write(
                            &path,
                            &(serde_json::to_string_pretty(&summary).expect("summary serializes")
                                + "\n"),
                        )?;
                        path
                    }
                    Format::Text => {
                        let path = out.join("summary.txt");
                        write(&path, &summary.render_text())?;
                        path
                    }
                };
                files.push(path);
            }
            Ok(RunOutput {
                files,
                report: None,
                summary: Some(summary),
            })
        }
        Job::Experiment { spec } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(manifest.threads)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            let report = pool.install(|| harness::run_ensemble(spec))?;
            for f in &manifest.formats {
                let path = match f {
                    Format::Csv => {
                        let path = out.join("trajectory.csv");
                        let trajectory = harness::replay(spec, 0)?;
                        let metrics = MetricsSeries::compute(
                            &trajectory,
                            spec.config.epsilon,
                            &default_anchors(&spec.config),
                        )?;
                        emit_trajectory_csv(&trajectory, &metrics, &path)?;
                        path
                    }
                    Format::Json => {
                        let path = out.join("report.json");
                        emit_report(&report, &path, Format::Json)?;
                        path
                    }
                    Format::Text => {
                        let path = out.join("report.txt");
                        emit_report(&report, &path, Format::Text)?;
                        path
                    }
                };
                files.push(path);
            }
            Ok(RunOutput {
                files,
                report: Some(report),
                summary: None,
            })
        }
    }
}

/// Entry point shared by the binary.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let manifest = match parse_args(argv) {
        Ok(m) => m,
        Err(Error::Usage(errors)) => {
            for e in errors {
                eprintln!("{}", e.trim_end());
            }
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&manifest) {
        Ok(output) => {
            let mut text = String::new();
            if let Some(report) = &output.report {
                text.push_str(&render_text(report));
            }
            if let Some(summary) = &output.summary {
                text.push_str(&summary.render_text());
            }
            for f in &output.files {
                text.push_str(&format!("wrote {}\n", f.display()));
            }
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

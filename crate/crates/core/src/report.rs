//! Output files: trajectory CSV, experiment reports as text or JSON.
//!
//! Trajectory values are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64`. Human-readable reports use 6 significant digits
//! with trailing zeros dropped, so a pass fraction of 97/100 prints as `0.97`.
//!
//! `report.json` is the pretty-printed [`ExperimentReport`]; see the README for
//! the field list.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{CheckMode, Criterion, ExperimentReport};
use crate::metrics::MetricsSeries;
use crate::state::Trajectory;

/// `%g`-style rendering with 6 significant digits.
pub fn fmt_sig(v: f64) -> String {
    fmt_sig_n(v, 6)
}

pub fn fmt_sig_n(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "text" => Some(Format::Text),
            _ => None,
        }
    }
}

pub fn trajectory_csv(trajectory: &Trajectory, metrics: &MetricsSeries) -> Result<String> {
    if trajectory.is_empty() {
        return Err(Error::InvalidArgument("trajectory is empty".into()));
    }
    if metrics.len() != trajectory.len() {
        return Err(Error::InvalidArgument(format!(
            "metrics cover {} steps, trajectory has {}",
            metrics.len(),
            trajectory.len()
        )));
    }
    let first = trajectory.initial();
    let mut out = String::from("t");
    for i in 0..first.n() {
        let _ = write!(out, ",agent_{i}");
    }
    for k in 0..first.stubborn.len() {
        let _ = write!(out, ",stubborn_{k}");
    }
    out.push_str(",d_V");
    for a in &metrics.anchored {
        let _ = write!(out, ",d_anchor_{}", a.label);
    }
    out.push_str(",clusters\n");
    for (row, state) in trajectory.states.iter().enumerate() {
        let _ = write!(out, "{}", state.t);
        for x in &state.mobile {
            let _ = write!(out, ",{x:.16e}");
        }
        for a in &state.stubborn {
            let _ = write!(out, ",{:.16e}", a.value);
        }
        let _ = write!(out, ",{:.16e}", metrics.diameter[row]);
        for a in &metrics.anchored {
            let _ = write!(out, ",{:.16e}", a.values[row]);
        }
        let _ = writeln!(out, ",{}", metrics.clusters[row]);
    }
    Ok(out)
}

pub fn emit_trajectory_csv(
    trajectory: &Trajectory,
    metrics: &MetricsSeries,
    path: &Path,
) -> Result<()> {
    write_file(path, &trajectory_csv(trajectory, metrics)?)
}

pub fn render_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), fmt_sig)
}

pub fn render_text(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment: {}", report.label);
    let _ = writeln!(out, "variant: {}", report.variant.name());
    if report.hypotheses.is_empty() {
        let _ = writeln!(out, "hypotheses: none");
    } else {
        let _ = writeln!(out, "hypotheses:");
        for h in &report.hypotheses {
            let _ = writeln!(
                out,
                "  {}: {} ({})",
                h.statement,
                h.evaluated,
                if h.holds { "holds" } else { "FAILS" }
            );
        }
    }
    if report.out_of_hypothesis {
        let _ = writeln!(out, "mode: out-of-hypothesis exploration");
    }
    let _ = writeln!(
        out,
        "replications: {}  horizon: {}  tail window: {}  min tail: {}  seed: {}",
        report.replications,
        report.horizon,
        report.tail_window,
        report.min_tail,
        report.master_seed
    );
    let _ = writeln!(out, "pass threshold: {}", fmt_sig(report.pass_threshold));
    let _ = writeln!(
        out,
        "check | criterion | bound | pass fraction | tail max min/median/max | entry time n min/q1/median/q3/max"
    );
    if report.checks.is_empty() {
        return out;
    }
    for c in &report.checks {
        let check = &c.check;
        let mode = match check.mode {
            CheckMode::Diameter => "diameter".to_string(),
            CheckMode::Anchored { anchor } => format!("anchored at {}", fmt_sig(anchor)),
        };
        let criterion = match check.criterion {
            Criterion::ConfirmedEntry => "confirmed entry",
            Criterion::TailMax => "tail max",
            Criterion::Descriptive => "descriptive",
        };
        let entries = c.entry_times.map_or_else(
            || "none".to_string(),
            |q| {
                format!(
                    "{} {}/{}/{}/{}/{}",
                    q.count, q.min, q.q1, q.median, q.q3, q.max
                )
            },
        );
        let _ = writeln!(
            out,
            "{} [{:?}, {}] | {} | {} | {} | {}/{}/{} | {}",
            check.label,
            check.subset,
            mode,
            criterion,
            opt(check.bound),
            opt(c.pass_fraction),
            fmt_sig(c.tail_max.min),
            fmt_sig(c.tail_max.median),
            fmt_sig(c.tail_max.max),
            entries
        );
    }
    let _ = writeln!(
        out,
        "all checks pass fraction: {}",
        fmt_sig(report.all_checks_pass_fraction)
    );
    let _ = writeln!(
        out,
        "verdict: {}",
        if report.passed { "PASS" } else { "FAIL" }
    );
    let hist = report
        .cluster_histogram
        .iter()
        .map(|b| format!("{}:{}", b.clusters, b.count))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "clusters at horizon (count:replications): {hist}");
    if let (Some(k), Some(f)) = (report.expected_clusters, report.expected_cluster_fraction) {
        let _ = writeln!(out, "fraction ending with {k} clusters: {}", fmt_sig(f));
    }
    if let Some(f) = report.fixed_point_fraction {
        let _ = writeln!(
            out,
            "fraction reaching an exact fixed point: {}",
            fmt_sig(f)
        );
    }
    let _ = writeln!(out, "{}", report.cluster_rule);
    for n in &report.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn emit_report(report: &ExperimentReport, path: &Path, format: Format) -> Result<()> {
    let body = match format {
        Format::Json => render_json(report),
        Format::Text => render_text(report),
        Format::Csv => {
            return Err(Error::InvalidArgument(
                "reports are written as text or json".into(),
            ))
        }
    };
    write_file(path, &body)
}

//! Acceptance suite: one `PASS`/`FAIL` line per criterion, non-zero exit if
//! any criterion fails.
//!
//! Run with `cargo test -p noisy-hk --test acceptance`.

use noisy_hk::harness::{
    self, HeteroPrejudiceParams, HeteroStubbornParams, HomoStubbornParams, StubbornCase,
};
use noisy_hk::metrics::{anchored_deviation, cluster_partition, diameter};
use noisy_hk::{
    run_ensemble, Dynamics, Error, ExperimentReport, Model, ModelConfig, NoiseModel, OpinionState,
    RunSettings, SeedStream,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, title: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("criterion {id} [{tag}] {title}: {detail}");
}

fn check_fraction(report: &ExperimentReport, k: usize) -> f64 {
    report.checks[k].pass_fraction.unwrap_or(0.0)
}

fn two_group_params(delta: f64) -> HeteroPrejudiceParams {
    HeteroPrejudiceParams::split(20, 10, 0.2, delta, 0.4, 0.6, 0.2)
}

fn criterion_1_plain_two_delta_consensus() -> bool {
    let settings = RunSettings::new(100, Some(20_000), 1);
    let spec = harness::preset_theorem1a(10, 0.2, 0.01, &settings).unwrap();
    assert_eq!(spec.min_tail, 4000);
    let report = run_ensemble(&spec).unwrap();
    let frac = check_fraction(&report, 0);
    let ok = frac >= 0.95;
    verdict(
        1,
        "plain noisy model reaches confirmed 2δ-consensus",
        ok,
        &format!("confirmed fraction {frac} (need >= 0.95)"),
    );
    ok
}

fn criterion_2_single_stubborn_consensus() -> bool {
    // At 2e4 steps about a fifth of the runs are still split into clusters
    // drifting towards each other; 1e5 steps (tail window 2e4) lets them merge.
    let settings = RunSettings::new(100, Some(100_000), 2);
    let p = HomoStubbornParams {
        n: 10,
        epsilon: 0.2,
        delta: 0.008,
        b1: 0.5,
        b1_count: 1,
    };
    let spec = harness::preset_theorem1c(&p, &settings).unwrap();
    assert!((spec.checks[1].bound.unwrap() - 0.088).abs() < 1e-12);
    assert!((spec.checks[0].bound.unwrap() - 0.016).abs() < 1e-12);
    let report = run_ensemble(&spec).unwrap();
    let frac = report.all_checks_pass_fraction;
    let ok = frac >= 0.95;
    verdict(
        2,
        "one stubborn at 0.5: tail d_V^B1 <= 0.088 and d_V <= 0.016",
        ok,
        &format!(
            "both-checks fraction {frac} (d_V {:?}, d_V^B1 {:?})",
            report.checks[0].pass_fraction, report.checks[1].pass_fraction
        ),
    );
    ok
}

fn criterion_3_hetero_prejudice_coarse_bound() -> bool {
    let settings = RunSettings::new(100, Some(20_000), 3);
    let p = two_group_params(0.02);
    assert!((p.coarse_bound() - 0.35).abs() < 1e-12);
    let spec = harness::preset_theorem2(&p, &settings).unwrap();
    let report = run_ensemble(&spec).unwrap();
    let bound_frac = report.all_checks_pass_fraction;
    let two = report.cluster_fraction(2);
    let ok = bound_frac == 1.0 && two >= 0.95;
    verdict(
        3,
        "two prejudiced groups stay within 0.35 and split in two",
        ok,
        &format!("bound fraction {bound_frac} (need 1), two-cluster fraction {two} (need >= 0.95)"),
    );
    ok
}

fn criterion_4_hetero_prejudice_fine_bound() -> bool {
    let settings = RunSettings::new(100, Some(20_000), 4);
    let p = HeteroPrejudiceParams::split(20, 10, 0.1, 0.01, 0.8, 0.9, 0.1);
    assert!((p.fine_bound() - 0.0125).abs() < 1e-12);
    let spec = harness::preset_theorem3(&p, &settings).unwrap();
    let report = run_ensemble(&spec).unwrap();
    let joint = report
        .per_replication
        .iter()
        .filter(|r| r.passed && r.final_clusters == 2)
        .count() as f64
        / report.replications as f64;
    let ok = joint >= 0.95;
    verdict(
        4,
        "far-apart prejudices: tail deviation <= 0.0125 with two clusters",
        ok,
        &format!(
            "fraction within bound and two clusters {joint} (bound alone {})",
            report.all_checks_pass_fraction
        ),
    );
    ok
}

fn criterion_5_noise_free_baseline_and_noisy_collapse() -> bool {
    let settings = RunSettings::new(50, Some(10_000), 5);
    let p = two_group_params(0.0);
    let base_cfg = ModelConfig {
        n: p.n,
        epsilon: p.epsilon,
        noise: NoiseModel::zero(),
        dynamics: Dynamics::HeteroPrejudice {
            alpha: p.alpha,
            j1: p.j1,
            j2: p.j2,
            s1: p.s1,
            s2: p.s2,
        },
    };
    let spec = harness::preset_noise_free_baseline(base_cfg, &settings).unwrap();
    let base = run_ensemble(&spec).unwrap();
    let fixed = base.fixed_point_fraction.unwrap_or(0.0);
    let max_clusters = base
        .per_replication
        .iter()
        .map(|r| r.final_clusters)
        .max()
        .unwrap_or(0);

    let noisy_settings = RunSettings::new(50, Some(20_000), 5);
    let noisy_spec = harness::preset_theorem2(&two_group_params(0.02), &noisy_settings).unwrap();
    let noisy = run_ensemble(&noisy_spec).unwrap();
    let noisy_two = noisy.cluster_fraction(2);

    let ok_fixed = fixed == 1.0;
    let ok_many = max_clusters > 2;
    let ok_noisy = noisy_two == 1.0;
    let ok = ok_fixed && ok_many && ok_noisy;
    let hist: Vec<String> = base
        .cluster_histogram
        .iter()
        .map(|b| format!("{}:{}", b.clusters, b.count))
        .collect();
    let noisy_hist: Vec<String> = noisy
        .cluster_histogram
        .iter()
        .map(|b| format!("{}:{}", b.clusters, b.count))
        .collect();
    verdict(
        5,
        "noise-free fixed points fragment, noise restores two clusters",
        ok,
        &format!(
            "fixed-point fraction {fixed} (need 1), max clusters {max_clusters} (need > 2), \
             noise-free histogram [{}], noisy two-cluster fraction {noisy_two} (need 1), \
             noisy histogram [{}]",
            hist.join(" "),
            noisy_hist.join(" ")
        ),
    );
    ok
}

fn criterion_6_two_stubborn_split_groups() -> bool {
    let settings = RunSettings::new(100, Some(20_000), 6);
    let p = HeteroStubbornParams {
        n: 10,
        epsilon: 0.2,
        delta: 0.01,
        b1: 0.2,
        b2: 0.8,
        b1_count: 1,
        b2_count: 1,
        v1: (0..5).collect(),
        initial: None,
    };
    let spec = harness::preset_theorem4(StubbornCase::II, &p, &settings).unwrap();
    let report = run_ensemble(&spec).unwrap();
    let frac = report.all_checks_pass_fraction;
    let ok = frac >= 0.95;
    verdict(
        6,
        "two stubborn values: each group within 0.02",
        ok,
        &format!(
            "both-groups fraction {frac} (V1 {:?}, V2 {:?})",
            report.checks[0].pass_fraction, report.checks[1].pass_fraction
        ),
    );
    ok
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> OpinionState {
    let spread: f64 = rng.random_range(0.05..=1.0);
    let base: f64 = rng.random_range(0.0..=1.0 - spread);
    OpinionState {
        t: 0,
        mobile: (0..n)
            .map(|_| base + spread * rng.random::<f64>())
            .collect(),
        stubborn: Vec::new(),
    }
}

fn union_find_components(values: &[f64], eps: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..n {
            if (values[i] - values[j]).abs() <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => groups[k].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn canonical(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
}

fn criterion_7_property_suite() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures: Vec<String> = Vec::new();

    for case in 0..1000 {
        let n = rng.random_range(1..=30);
        let eps = rng.random_range(0.01..=0.5);
        let state = random_state(&mut rng, n);
        let got = canonical(cluster_partition(&state, eps));
        let want = canonical(union_find_components(&state.mobile, eps));
        if got != want {
            failures.push(format!("cluster partition mismatch on state {case}"));
        }
        let all: Vec<usize> = (0..n).collect();
        let d = diameter(&state, &all).unwrap();
        let anchor = rng.random::<f64>();
        let dev = anchored_deviation(&state, &all, anchor).unwrap();
        if d > 2.0 * dev + 1e-15 {
            failures.push(format!(
                "diameter {d} exceeds twice deviation {dev} on state {case}"
            ));
        }
    }

    let configs = [
        ModelConfig::plain(12, 0.2, NoiseModel::uniform(0.05)),
        ModelConfig {
            n: 12,
            epsilon: 0.2,
            noise: NoiseModel::scaled_rademacher(0.05, 0.03),
            dynamics: Dynamics::HeteroStubborn {
                b1: 0.2,
                b1_count: 2,
                b2: 0.8,
                b2_count: 1,
            },
        },
        ModelConfig {
            n: 12,
            epsilon: 0.2,
            noise: NoiseModel::truncated_gaussian(0.05, 0.02),
            dynamics: Dynamics::HeteroPrejudice {
                alpha: 0.3,
                j1: 0.7,
                j2: 0.1,
                s1: (0..6).collect(),
                s2: (6..12).collect(),
            },
        },
    ];
    for (k, cfg) in configs.iter().enumerate() {
        let model = Model::new(cfg.clone()).unwrap();
        let seed = SeedStream::new(99, k as u64);
        let a = model.run_trajectory(None, 300, seed).unwrap();
        let b = model.run_trajectory(None, 300, seed).unwrap();
        let bits = |t: &noisy_hk::Trajectory| -> Vec<u64> {
            t.states
                .iter()
                .flat_map(|s| s.mobile.iter().map(|x| x.to_bits()))
                .collect()
        };
        if bits(&a) != bits(&b) {
            failures.push(format!("replay of config {k} is not bit-identical"));
        }
        let stubborn0 = a.initial().stubborn.clone();
        for s in &a.states {
            if s.mobile.iter().any(|x| !(0.0..=1.0).contains(x)) {
                failures.push(format!("config {k} left [0,1] at t={}", s.t));
                break;
            }
            if s.stubborn != stubborn0 {
                failures.push(format!("config {k} moved a stubborn agent at t={}", s.t));
                break;
            }
        }
        let state = a.last();
        for i in 0..cfg.n {
            let ni = model.neighbor_set(i, state).unwrap();
            if !ni.contains(&noisy_hk::Participant::Mobile(i)) {
                failures.push(format!("agent {i} missing from its own neighbour set"));
            }
            for p in ni {
                if let noisy_hk::Participant::Mobile(j) = p {
                    let nj = model.neighbor_set(j, state).unwrap();
                    if !nj.contains(&noisy_hk::Participant::Mobile(i)) {
                        failures.push(format!("neighbour relation {i}~{j} not symmetric"));
                    }
                }
            }
        }
    }

    for trial in 0..100 {
        let n = rng.random_range(1..=20);
        let lo = rng.random_range(0.0..0.8);
        let x0: Vec<f64> = (0..n).map(|_| lo + 0.2 * rng.random::<f64>()).collect();
        let model = Model::new(ModelConfig::plain(n, 0.2, NoiseModel::zero())).unwrap();
        let s0 = model.initial_state(x0.clone()).unwrap();
        let s1 = model.step(&s0, &mut rng);
        let mean = x0.iter().sum::<f64>() / n as f64;
        if s1.mobile.iter().any(|&x| (x - mean).abs() > 1e-12) {
            failures.push(format!("clique trial {trial} did not collapse to the mean"));
        }
    }

    let samplers = [
        NoiseModel::uniform(0.05),
        NoiseModel::scaled_rademacher(0.05, 0.02),
        NoiseModel::truncated_gaussian(0.05, 0.03),
    ];
    for noise in &samplers {
        let draws: Vec<f64> = (0..200_000).map(|_| noise.sample(&mut rng)).collect();
        if draws.iter().any(|x| x.abs() > noise.delta) {
            failures.push(format!("{noise:?} drew outside [-δ, δ]"));
        }
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let sd = noise.variance().sqrt();
        if mean.abs() > 5.0 * sd / (draws.len() as f64).sqrt() {
            failures.push(format!(
                "{noise:?} sample mean {mean} is not symmetric about 0"
            ));
        }
        let pos = draws.iter().filter(|&&x| x > 0.0).count() as f64 / draws.len() as f64;
        if (pos - 0.5).abs() > 0.01 {
            failures.push(format!("{noise:?} positive fraction {pos}"));
        }
    }

    let ok = failures.is_empty();
    verdict(
        7,
        "property suite",
        ok,
        &if ok {
            "all properties hold".to_string()
        } else {
            failures.join("; ")
        },
    );
    ok
}

fn hypothesis_text(result: noisy_hk::Result<noisy_hk::ExperimentSpec>) -> Option<String> {
    match result {
        Err(e @ Error::Hypothesis(_)) => Some(e.to_string()),
        _ => None,
    }
}

fn criterion_8_hypothesis_gates() -> bool {
    let s = RunSettings::default();
    let mut failures: Vec<String> = Vec::new();
    let mut expect = |name: &str, got: Option<String>, needles: &[&str]| match got {
        Some(msg) if needles.iter().all(|n| msg.contains(n)) => {}
        Some(msg) => failures.push(format!("{name}: message {msg:?} lacks {needles:?}")),
        None => failures.push(format!("{name}: not rejected")),
    };

    expect(
        "3 with J1−J2 = 0.4",
        hypothesis_text(harness::preset_theorem3(&two_group_params(0.02), &s)),
        &["0.4 vs 0.9"],
    );
    expect(
        "1a with δ > ε/2",
        hypothesis_text(harness::preset_theorem1a(10, 0.2, 0.15, &s)),
        &["0.15 vs 0.1"],
    );
    expect(
        "1c with δ too large",
        hypothesis_text(harness::preset_theorem1c(
            &HomoStubbornParams {
                n: 10,
                epsilon: 0.2,
                delta: 0.01,
                b1: 0.5,
                b1_count: 1,
            },
            &s,
        )),
        &["0.01 vs 0.00909091"],
    );
    let two_stubborn = |delta: f64, initial: Option<Vec<f64>>| HeteroStubbornParams {
        n: 10,
        epsilon: 0.2,
        delta,
        b1: 0.2,
        b2: 0.8,
        b1_count: 1,
        b2_count: 1,
        v1: (0..5).collect(),
        initial,
    };
    expect(
        "4(ii) with δ too large",
        hypothesis_text(harness::preset_theorem4(
            StubbornCase::II,
            &two_stubborn(0.02, None),
            &s,
        )),
        &["0.02 vs 0.0181818"],
    );
    expect(
        "4(i) with δ too large",
        hypothesis_text(harness::preset_theorem4(
            StubbornCase::I,
            &two_stubborn(0.04, None),
            &s,
        )),
        &["0.04 vs 0.0363636"],
    );
    let mut x0 = vec![0.1; 5];
    x0.extend(vec![0.5; 5]);
    expect(
        "4(ii) with V2 started below B2",
        hypothesis_text(harness::preset_theorem4(
            StubbornCase::II,
            &two_stubborn(0.01, Some(x0)),
            &s,
        )),
        &["x_5(0)", "0.5"],
    );

    let overridden = RunSettings {
        override_hypothesis: true,
        ..RunSettings::default()
    };
    match harness::preset_theorem3(&two_group_params(0.02), &overridden) {
        Ok(spec) if spec.out_of_hypothesis => {}
        other => failures.push(format!("override did not flag the spec: {other:?}")),
    }

    let ok = failures.is_empty();
    verdict(
        8,
        "hypothesis gates",
        ok,
        &if ok {
            "every out-of-hypothesis preset rejected with both sides quoted".to_string()
        } else {
            failures.join("; ")
        },
    );
    ok
}

fn main() -> std::process::ExitCode {
    let criteria: [fn() -> bool; 8] = [
        criterion_1_plain_two_delta_consensus,
        criterion_2_single_stubborn_consensus,
        criterion_3_hetero_prejudice_coarse_bound,
        criterion_4_hetero_prejudice_fine_bound,
        criterion_5_noise_free_baseline_and_noisy_collapse,
        criterion_6_two_stubborn_split_groups,
        criterion_7_property_suite,
        criterion_8_hypothesis_gates,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}

//! Acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! Lines go straight to stderr so they show up without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use lp2norm::functional::{fnorm_21, fnorm_22_g, fnorm_22_h, yq_norm, Fnorm22Options};
use lp2norm::geometry::volume;
use lp2norm::grid::{make_rule, sample_kernel, RuleKind};
use lp2norm::two_norm::{gahler_norm, gunawan_norm, AscentOptions};
use lp2norm::verify::{run_suite_with_threads, CheckClass, Report, SuiteConfig, SuiteId};

struct Outcome {
    failures: Vec<String>,
}

impl Outcome {
    fn record(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        let status = if ok { "PASS" } else { "FAIL" };
        let line = format!("acceptance {id} {name}: {status} ({detail})\n");
        std::io::stderr().lock().write_all(line.as_bytes()).unwrap();
        if !ok {
            self.failures.push(line);
        }
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn run(suite: SuiteId, p_list: &[f64], trials: usize, grid: usize) -> Vec<Report> {
    let config = SuiteConfig {
        p_list: p_list.to_vec(),
        trials,
        grid_n: grid,
        master_seed: 2024,
        ..SuiteConfig::new(suite)
    };
    run_suite_with_threads(&config, 1).unwrap()
}

fn fails(reports: &[Report]) -> usize {
    reports.iter().map(|r| r.summary.fail).sum()
}

fn trials(reports: &[Report]) -> usize {
    reports.iter().map(|r| r.trials.len()).sum()
}

/// Smallest margin of a class over all reports, minus that check's tolerance.
fn worst_excess(reports: &[Report], class: CheckClass) -> f64 {
    reports
        .iter()
        .flat_map(|r| {
            r.summary
                .min_margins
                .iter()
                .filter(move |(name, _)| r.checks[*name].class == class)
                .map(move |(name, m)| m + r.checks[name].tolerance)
        })
        .fold(f64::INFINITY, f64::min)
}

fn min_margin(reports: &[Report], class: CheckClass) -> f64 {
    reports
        .iter()
        .filter_map(|r| r.min_margin_of(class))
        .fold(f64::INFINITY, f64::min)
}

fn analytic_anchor(out: &mut Outcome) {
    let start = Instant::now();
    let exact = 1.0 / 12f64.sqrt();
    let fine = make_rule(RuleKind::Midpoint, 1024).unwrap();
    let nested = make_rule(RuleKind::Midpoint, 256).unwrap();
    let (one, t) = (fine.sample(|_| 1.0), fine.sample(|t| t));
    let opts = AscentOptions::default();
    let tight = Fnorm22Options::default().fnorm21;
    let theta_fine = sample_kernel(&fine, &"wedge:poly:0,1|const:1".parse().unwrap()).unwrap();
    let theta = sample_kernel(&nested, &"wedge:poly:0,1|const:1".parse().unwrap()).unwrap();
    let quantities = [
        ("gunawan", gunawan_norm(&one, &t, 2.0).unwrap(), 1e-6),
        ("gahler", gahler_norm(&one, &t, 2.0, &opts).unwrap().value, 1e-6),
        ("volume", volume(&one, &t, 2.0).unwrap(), 1e-6),
        ("yq", yq_norm(&theta_fine, 2.0, &tight).unwrap().value, 1e-6),
        ("fnorm21", fnorm_21(&theta_fine, 2.0, &tight).unwrap().value, 1e-6),
        (
            "fnorm22_g",
            fnorm_22_g(&theta, 2.0, &Fnorm22Options::default()).unwrap().value,
            1e-4,
        ),
        (
            "fnorm22_h",
            fnorm_22_h(&theta, 2.0, &Fnorm22Options::default()).unwrap().value,
            1e-4,
        ),
    ];
    let elapsed = start.elapsed();
    let mut ok = within(elapsed, 30);
    let mut detail = Vec::new();
    for (name, v, tol) in quantities {
        let rel = (v - exact).abs() / exact;
        ok &= rel <= tol;
        detail.push(format!("{name} rel {rel:.1e}"));
    }
    detail.push(format!("{:.1}s", elapsed.as_secs_f64()));
    out.record(1, "analytic anchor", ok, detail.join(", "));
}

fn suite_criterion(
    out: &mut Outcome,
    id: u32,
    name: &str,
    limit_s: u64,
    reports: impl FnOnce() -> Vec<Report>,
    require_all: bool,
) {
    let start = Instant::now();
    let reports = reports();
    let elapsed = start.elapsed();
    let pass_side = worst_excess(&reports, CheckClass::Pass);
    let monitor = min_margin(&reports, CheckClass::Monitor);
    let failed = fails(&reports);
    let mut ok = within(elapsed, limit_s) && pass_side >= 0.0 && worst_excess(&reports, CheckClass::Monitor) >= 0.0;
    if require_all {
        ok &= failed == 0;
    }
    out.record(
        id,
        name,
        ok,
        format!(
            "{} trials, {failed} failed, min PASS margin {:.2e}, min MONITOR margin {:.2e}, {:.1}s",
            trials(&reports),
            min_margin(&reports, CheckClass::Pass),
            monitor,
            elapsed.as_secs_f64()
        ),
    );
}

/// The `values` maps of every trial in a CLI report file.
fn value_maps(doc: &serde_json::Value) -> Vec<serde_json::Value> {
    doc.as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["trials"].as_array().unwrap().iter().map(|t| t["values"].clone()))
        .collect()
}

fn without_timing(mut doc: serde_json::Value) -> serde_json::Value {
    for r in doc.as_array_mut().unwrap() {
        r["summary"].as_object_mut().unwrap().remove("wall_ms");
    }
    doc
}

fn determinism(out: &mut Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let run_cli = |name: &str, parallel: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_lp2norm"))
            .args([
                "verify",
                "--suite",
                "all",
                "--seed",
                "42",
                "--trials",
                "3",
                "--parallel",
                parallel,
                "--out",
            ])
            .arg(&path)
            .output()
            .unwrap()
            .status;
        assert!(matches!(status.code(), Some(0 | 3)), "verify exited with {status}");
        serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(path).unwrap()).unwrap()
    };
    let first = run_cli("a.json", "1");
    let second = run_cli("b.json", "1");
    let parallel = run_cli("c.json", "4");
    let elapsed = start.elapsed();
    let same_values = value_maps(&first) == value_maps(&second);
    let same_reports = without_timing(first.clone()) == without_timing(parallel);
    let reports = first.as_array().unwrap().len();
    out.record(
        9,
        "determinism",
        same_values && same_reports && reports == 8 * 4,
        format!(
            "{reports} reports, repeat values identical: {same_values}, parallel 4 vs serial identical: {same_reports}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn acceptance() {
    let mut out = Outcome { failures: Vec::new() };
    let all_p = [1.0, 1.5, 2.0, 3.0];

    analytic_anchor(&mut out);
    suite_criterion(
        &mut out,
        2,
        "norm axioms",
        120,
        || run(SuiteId::Axioms, &all_p, 100, 256),
        true,
    );
    suite_criterion(
        &mut out,
        3,
        "gahler sandwich",
        300,
        || run(SuiteId::Sandwich, &all_p, 200, 256),
        false,
    );
    suite_criterion(
        &mut out,
        4,
        "dual isometry",
        180,
        || run(SuiteId::Isometry, &[1.0, 1.5, 2.0, 3.0], 100, 64),
        true,
    );
    suite_criterion(
        &mut out,
        5,
        "g properties",
        60,
        || run(SuiteId::GProperties, &all_p, 100, 256),
        true,
    );
    suite_criterion(
        &mut out,
        6,
        "volume bound",
        120,
        || run(SuiteId::GeometryVolume, &all_p, 100, 256),
        true,
    );
    suite_criterion(
        &mut out,
        7,
        "functional bounds",
        600,
        || run(SuiteId::FunctionalBounds, &[1.5, 2.0, 3.0], 50, 64),
        false,
    );
    suite_criterion(
        &mut out,
        8,
        "round trip",
        10,
        || run(SuiteId::Roundtrip, &[2.0], 50, 256),
        true,
    );
    determinism(&mut out);

    assert!(out.failures.is_empty(), "failed criteria:\n{}", out.failures.concat());
}

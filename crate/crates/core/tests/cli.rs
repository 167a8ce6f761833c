use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn birkhoff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_birkhoff"))
        .args(args)
        .output()
        .unwrap()
}

fn run_fixture(name: &str, command: &[&str]) -> (i32, Value) {
    let config = fixtures().join(format!("{name}.json"));
    let mut args = command.to_vec();
    args.extend(["--config", config.to_str().unwrap()]);
    let out = birkhoff(&args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

fn num(report: &Value, pointer: &str) -> f64 {
    report
        .pointer(pointer)
        .and_then(Value::as_f64)
        .unwrap_or_else(|| panic!("{pointer} missing in {report}"))
}

/// Weights of the default test measure, `2^-(n+1)`.
fn w(n: u64) -> f64 {
    0.5f64.powi(n as i32 + 1)
}

/// `Σ f(n) w(n)` over the given points.
fn series(points: &[(u64, f64)]) -> f64 {
    points.iter().map(|&(n, x)| x * w(n)).sum()
}

fn assert_close(got: f64, want: f64) {
    assert!((got - want).abs() <= 1e-12, "got {got}, want {want}");
}

#[test]
fn manifest_expectations_hold() {
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("manifest.json")).unwrap())
            .unwrap();
    for entry in manifest.as_array().unwrap() {
        let name = entry["name"].as_str().unwrap();
        let command: Vec<&str> = entry["command"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap())
            .collect();
        let config = fixtures().join(entry["config"].as_str().unwrap());
        let mut args = command.clone();
        args.extend(["--config", config.to_str().unwrap()]);
        let out = birkhoff(&args);
        assert_eq!(
            out.status.code(),
            entry["expected_exit"].as_i64().map(|c| c as i32),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["exit_code"], entry["expected_exit"], "{name}");
        if let Some(expect) = entry.get("expect").and_then(Value::as_object) {
            for (pointer, want) in expect {
                let got = report
                    .pointer(pointer)
                    .unwrap_or_else(|| panic!("{name}: {pointer} missing"));
                match (got.as_f64(), want.as_f64()) {
                    (Some(g), Some(x)) => assert_close(g, x),
                    _ => assert_eq!(got, want, "{name}: {pointer}"),
                }
            }
        }
    }
}

#[test]
fn integrator_values_match_the_series() {
    let (_, r) = run_fixture("tagged_sum_singletons", &["integrate"]);
    assert_close(num(&r, "/tagged_sums/0/value"), w(0) + w(1));
    let (_, r) = run_fixture("tagged_sum_max_coarse", &["integrate"]);
    assert_close(num(&r, "/tagged_sums/0/value"), w(0).max(w(1)));
    let (_, r) = run_fixture("integral_constant_one", &["integrate"]);
    assert_close(num(&r, "/integrals/0/result/value"), (0..200).map(w).sum());
    let (_, r) = run_fixture("integral_max_oscillates", &["integrate"]);
    assert!(num(&r, "/integrals/0/result/oscillation") >= (w(0) + w(1)) - w(0).max(w(1)));
    let (_, a) = run_fixture("integrate_on_everything", &["integrate"]);
    let (_, b) = run_fixture("integrate_without_set", &["integrate"]);
    assert_eq!(a["integrals"][0]["result"], b["integrals"][0]["result"]);
    let geom: Vec<(u64, f64)> = (0..200).map(|n| (n, 0.5f64.powi(n as i32))).collect();
    assert_close(num(&a, "/integrals/0/result/value"), series(&geom));
    let (_, r) = run_fixture("integrate_on_zero", &["integrate"]);
    assert_close(num(&r, "/integrals/0/result/value"), w(0));
}

#[test]
fn norms_and_pointwise_values_match_the_series() {
    let (_, r) = run_fixture("norm_two_indicator", &["norm"]);
    assert_close(num(&r, "/norms/0/value"), series(&[(0, 4.0)]).sqrt());
    let (_, r) = run_fixture("norm_half", &["norm"]);
    assert_close(num(&r, "/norms/0/value"), series(&[(0, 1.0)]).powi(2));
    let (_, r) = run_fixture("pointwise_max_idempotent", &["integrate"]);
    assert_close(num(&r, "/integrals/0/result/value"), w(0));
    let (_, r) = run_fixture("pointwise_abs", &["integrate"]);
    assert_close(num(&r, "/integrals/0/result/value"), 3.0 * w(0));
    let (_, r) = run_fixture("expr_indicator_times_two", &["integrate"]);
    assert_close(num(&r, "/integrals/0/result/value"), 2.0 * w(0));
    let (_, r) = run_fixture("expr_geom_at_three", &["integrate"]);
    assert_close(num(&r, "/tagged_sums/0/value"), 0.5f64.powi(3));
}

#[test]
fn inequality_sides_match_the_series() {
    let cases: [(&str, &str, f64, f64); 12] = [
        ("holder_equal", "holder", w(0), w(0).sqrt() * w(0).sqrt()),
        ("holder_disjoint", "holder", 0.0, w(0).sqrt() * w(1).sqrt()),
        (
            "minkowski_equal",
            "minkowski",
            (4.0 * w(0)).sqrt(),
            2.0 * w(0).sqrt(),
        ),
        (
            "minkowski_disjoint",
            "minkowski",
            (w(0) + w(1)).sqrt(),
            w(0).sqrt() + w(1).sqrt(),
        ),
        ("reverse_holder_basic", "reverse_holder", w(0), w(0).powi(2)),
        (
            "reverse_minkowski_disjoint",
            "reverse_minkowski",
            (w(0) + w(1)).powi(2),
            w(0).powi(2) + w(1).powi(2),
        ),
        (
            "reverse_minkowski_equal",
            "reverse_minkowski",
            (2f64.sqrt() * w(0)).powi(2),
            2.0 * w(0).powi(2),
        ),
        ("weighted_basic", "weighted", w(0).powi(2), w(0)),
        ("weighted_reverse", "weighted", w(0).sqrt(), w(0)),
        ("radon_basic", "radon_ratio", w(0), w(0).powi(2)),
        ("radon_reverse", "radon_ratio", w(0), w(0).sqrt()),
        (
            "bounded_b_bump",
            "bounded_ratio_b",
            (4.0 * w(0) + (1.0 - w(0))).sqrt(),
            2f64.sqrt() * (2.0 * w(0) + (1.0 - w(0))),
        ),
    ];
    for (name, check, lhs, rhs) in cases {
        let (code, r) = run_fixture(name, &["check", check]);
        assert_eq!(code, 0, "{name}");
        assert_close(num(&r, "/verdicts/0/lhs"), lhs);
        assert_close(num(&r, "/verdicts/0/rhs"), rhs);
    }
    let (_, r) = run_fixture("bounded_a_bump", &["check", "bounded_ratio_a"]);
    let mixed = 2f64.sqrt() * w(0) + (1.0 - w(0));
    assert_close(
        num(&r, "/verdicts/0/lhs"),
        (2.0 * w(0) + (1.0 - w(0))).sqrt(),
    );
    assert_close(num(&r, "/verdicts/0/rhs"), 2f64.powf(0.25) * mixed);
}

#[test]
fn documented_cli_examples() {
    let (code, r) = run_fixture("cli_reverse_minkowski", &["check", "reverse_minkowski"]);
    assert_eq!(code, 0);
    let lhs = (w(0) + w(1)).powi(2);
    let rhs = w(0).powi(2) + w(1).powi(2);
    assert_close(num(&r, "/verdicts/0/slack"), lhs - rhs);

    let (code, r) = run_fixture("cli_max_audit", &["audit"]);
    assert_eq!(code, 2);
    let audit = r["audits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["property"] == "a_integrability")
        .unwrap();
    assert_eq!(audit["verdict"], "failed");
    assert_eq!(num(audit, "/witness/low/sum"), w(0).max(w(1)));
    assert_eq!(num(audit, "/witness/high/sum"), w(0) + w(1));

    let (code, r) = run_fixture("expr_syntax_error", &["integrate"]);
    assert_eq!(code, 3);
    assert!(r["error"]["message"].as_str().unwrap().contains('3'), "{r}");

    let out = birkhoff(&["audit", "--config", "/nonexistent/birkhoff.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_and_flags() {
    assert_eq!(birkhoff(&["--help"]).status.code(), Some(0));
    assert_eq!(birkhoff(&["--version"]).status.code(), Some(0));
    assert_eq!(birkhoff(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(birkhoff(&["audit"]).status.code(), Some(3));

    let config = fixtures().join("integral_constant_one.json");
    let config = config.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = birkhoff(&[
        "integrate",
        "--config",
        config,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(written["command"], "integrate");

    let out = birkhoff(&[
        "integrate",
        "--config",
        config,
        "--tol",
        "1e-6",
        "--stages",
        "3",
        "--samples",
        "4",
        "--horizon",
        "40",
        "--seed",
        "7",
    ]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["run"]["stages"], 3);
    assert_eq!(r["run"]["samples_per_stage"], 4);
    assert_eq!(r["run"]["horizon"], 40);
    assert_eq!(r["run"]["seed"], 7);
    assert!(r.get("timings_ms").is_none());

    let out = birkhoff(&["integrate", "--config", config, "--timings"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["timings_ms"]["integral"].is_number());

    let out = birkhoff(&["integrate", "--config", config, "--stages", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_config_keys_are_rejected_with_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"measure": {"additive": {"weights": "geometric:0.5", "extra": 1}}}"#,
    )
    .unwrap();
    let out = birkhoff(&["audit", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["error"]["kind"], "config");
    assert!(
        r["error"]["path"].as_str().unwrap().starts_with("measure"),
        "{r}"
    );
}

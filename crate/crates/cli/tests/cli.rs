use std::process::{Command, Output};

use serde_json::Value;

fn dprr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dprr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = dprr(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stderr.is_empty());
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn fails_with(args: &[&str], code: i32) -> String {
    let out = dprr(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    assert!(out.stdout.is_empty(), "nothing on stdout for a failure");
    String::from_utf8(out.stderr).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

/// Rebuilds the command line from an envelope's `inputs`.
fn args_from_envelope(env: &Value) -> Vec<String> {
    let mut args = vec![env["command"].as_str().unwrap().to_string()];
    for (key, value) in env["inputs"].as_object().unwrap() {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Null => {}
            Value::Bool(true) => args.push(flag),
            Value::Bool(false) => {}
            Value::Array(items) => {
                for item in items {
                    args.push(flag.clone());
                    args.push(item.to_string());
                }
            }
            Value::String(s) => {
                args.push(flag);
                args.push(s.clone());
            }
            other => {
                args.push(flag);
                args.push(other.to_string());
            }
        }
    }
    args
}

fn round_trips(args: &[&str]) {
    let first = ok_json(args);
    assert_eq!(first["schema_version"], 1);
    let rebuilt = args_from_envelope(&first);
    let rebuilt: Vec<&str> = rebuilt.iter().map(String::as_str).collect();
    let second = ok_json(&rebuilt);
    assert_eq!(first, second, "re-running {rebuilt:?}");
}

#[test]
fn optimal_boundary_mechanism() {
    let env = ok_json(&[
        "optimal",
        "--epsilon",
        "1",
        "--delta",
        "0.4",
        "--pi",
        "0.1",
        "--n",
        "1",
    ]);
    assert_eq!(env["command"], "optimal");
    assert_eq!(env["schema_version"], 1);
    let r = &env["result"];
    assert_eq!(r["regime"], "CornerBoundary");
    let mechs = r["mechanisms"].as_array().unwrap();
    assert_eq!(mechs.len(), 1);
    assert_eq!(num(&mechs[0]["p00"]), 1.0);
    assert!((num(&mechs[0]["p11"]) - 0.4).abs() < 1e-15);
    assert!((num(&r["variance"]) - 0.24).abs() < 1e-12);
}

#[test]
fn optimal_strict_budget_gives_warner_diagonal() {
    let env = ok_json(&[
        "optimal",
        "--epsilon",
        "1",
        "--delta",
        "0",
        "--pi",
        "0.3",
        "--n",
        "1",
    ]);
    let e = std::f64::consts::E;
    let m = &env["result"]["mechanisms"][0];
    assert!((num(&m["p00"]) - e / (e + 1.0)).abs() < 1e-15);
    assert!((num(&m["p11"]) - e / (e + 1.0)).abs() < 1e-15);
}

#[test]
fn optimal_variance_scales_with_n() {
    let one = ok_json(&[
        "optimal",
        "--epsilon",
        "0.5",
        "--delta",
        "0.1",
        "--pi",
        "0.25",
    ]);
    let many = ok_json(&[
        "optimal",
        "--epsilon",
        "0.5",
        "--delta",
        "0.1",
        "--pi",
        "0.25",
        "--n",
        "100",
    ]);
    let v1 = num(&one["result"]["variance"]);
    assert!((num(&many["result"]["variance"]) - v1 / 100.0).abs() < 1e-15);
    assert!((v1 - 2.3724068629786537).abs() < 1e-12);
}

#[test]
fn optimal_warner_flag() {
    let env = ok_json(&[
        "optimal",
        "--epsilon",
        "1",
        "--delta",
        "0.4",
        "--pi",
        "0.1",
        "--warner",
    ]);
    assert_eq!(env["result"]["regime"], "WarnerDiagonal");
    let m = &env["result"]["mechanisms"][0];
    assert_eq!(num(&m["p00"]), num(&m["p11"]));
}

#[test]
fn optimal_csv_lists_mechanisms() {
    let out = dprr(&[
        "optimal",
        "--epsilon",
        "1",
        "--delta",
        "0.4",
        "--pi",
        "0.1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p00,p11,variance");
    assert!(lines[1].starts_with("1,0.4,"));
}

#[test]
fn optimal_rejects_unbounded_error_budget() {
    let msg = fails_with(
        &[
            "optimal",
            "--epsilon",
            "0",
            "--delta",
            "0",
            "--pi",
            "0.3",
            "--n",
            "1",
        ],
        2,
    );
    assert!(msg.contains("unbounded"), "{msg}");
    assert_eq!(msg.trim_end().lines().count(), 1);
}

#[test]
fn optimal_rejects_bad_inputs() {
    fails_with(
        &["optimal", "--epsilon", "1", "--delta", "0.4", "--pi", "0"],
        2,
    );
    fails_with(
        &["optimal", "--epsilon", "1", "--delta", "0.4", "--pi", "1.5"],
        2,
    );
    fails_with(
        &[
            "optimal",
            "--epsilon",
            "-1",
            "--delta",
            "0.4",
            "--pi",
            "0.2",
        ],
        2,
    );
    fails_with(
        &["optimal", "--epsilon", "1", "--delta", "1.2", "--pi", "0.2"],
        2,
    );
    fails_with(
        &[
            "optimal",
            "--epsilon",
            "1",
            "--delta",
            "0.4",
            "--pi",
            "0.2",
            "--n",
            "0",
        ],
        2,
    );
    fails_with(
        &[
            "optimal",
            "--epsilon",
            "nan",
            "--delta",
            "0.4",
            "--pi",
            "0.2",
        ],
        2,
    );
}

#[test]
fn verify_tight_corner() {
    let env = ok_json(&[
        "verify",
        "--p00",
        "0.75",
        "--p11",
        "0.75",
        "--epsilon",
        &3f64.ln().to_string(),
        "--delta",
        "0",
    ]);
    let r = &env["result"];
    assert_eq!(r["pass"], true);
    assert!(num(&r["slacks"]["dp1"]).abs() < 1e-12);
    assert!(num(&r["slacks"]["dp2"]).abs() < 1e-12);
    assert_eq!(r["in_region_r_prime"], true);
    assert_eq!(r["on_boundary_r_double_prime"], true);
    assert_eq!(r["violated"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_direct_questioning_fails() {
    let env = ok_json(&[
        "verify",
        "--p00",
        "1",
        "--p11",
        "1",
        "--epsilon",
        "1",
        "--delta",
        "0",
    ]);
    let r = &env["result"];
    assert_eq!(r["pass"], false);
    assert_eq!(num(&r["slacks"]["dp1"]), -1.0);
    assert_eq!(r["violated"], serde_json::json!(["dp1", "dp2"]));
    assert_eq!(r["in_region_r_prime"], false);
}

#[test]
fn verify_boundary_edge_passes() {
    let env = ok_json(&[
        "verify",
        "--p00",
        "1",
        "--p11",
        "0.4",
        "--epsilon",
        "1",
        "--delta",
        "0.4",
    ]);
    assert_eq!(env["result"]["pass"], true);
    assert_eq!(env["result"]["on_boundary_r_double_prime"], true);
}

#[test]
fn verify_rejects_out_of_range() {
    fails_with(
        &[
            "verify",
            "--p00",
            "1.1",
            "--p11",
            "0.4",
            "--epsilon",
            "1",
            "--delta",
            "0.4",
        ],
        2,
    );
    fails_with(
        &[
            "verify",
            "--p00",
            "0.9",
            "--p11",
            "-0.1",
            "--epsilon",
            "1",
            "--delta",
            "0.4",
        ],
        2,
    );
    fails_with(
        &[
            "verify",
            "--p00",
            "0.9",
            "--p11",
            "0.5",
            "--epsilon",
            "1",
            "--delta",
            "0.4",
            "--tolerance",
            "-1",
        ],
        2,
    );
}

#[test]
fn estimate_direct_questioning() {
    let env = ok_json(&[
        "estimate",
        "--p00",
        "1",
        "--p11",
        "1",
        "--n",
        "100",
        "--count-ones",
        "37",
    ]);
    let r = &env["result"];
    assert!((num(&r["pi_hat_raw"]) - 0.37).abs() < 1e-15);
    let moe = 1.96 * (0.37f64 * 0.63 / 100.0).sqrt();
    assert!((num(&r["moe_normal"]) - moe).abs() < 1e-12);
    assert!((num(&r["moe_chebyshev"]) - moe / 1.96 * 4.5).abs() < 1e-12);
}

#[test]
fn estimate_hand_evaluation_and_reference() {
    let env = ok_json(&[
        "estimate",
        "--p00",
        "0.8",
        "--p11",
        "0.7",
        "--n",
        "200",
        "--count-ones",
        "90",
    ]);
    assert!((num(&env["result"]["pi_hat_raw"]) - 0.5).abs() < 1e-12);
    let env = ok_json(&[
        "estimate",
        "--p00",
        "0.8",
        "--p11",
        "0.7",
        "--n",
        "200",
        "--count-ones",
        "90",
        "--reference-pi",
        "0.2",
    ]);
    assert_eq!(num(&env["result"]["variance_pi"]), 0.2);
}

#[test]
fn estimate_rejects_degenerate_and_bad_tally() {
    let msg = fails_with(
        &[
            "estimate",
            "--p00",
            "0.5",
            "--p11",
            "0.5",
            "--n",
            "10",
            "--count-ones",
            "5",
        ],
        2,
    );
    assert!(msg.contains("degenerate"), "{msg}");
    fails_with(
        &[
            "estimate",
            "--p00",
            "0.9",
            "--p11",
            "0.9",
            "--n",
            "10",
            "--count-ones",
            "11",
        ],
        2,
    );
    fails_with(
        &[
            "estimate",
            "--p00",
            "0.9",
            "--p11",
            "0.9",
            "--n",
            "0",
            "--count-ones",
            "0",
        ],
        2,
    );
}

#[test]
fn simulate_zero_signal() {
    let env = ok_json(&[
        "simulate", "--p00", "1", "--p11", "1", "--pi", "0", "--n", "100", "--trials", "10",
        "--seed", "7",
    ]);
    assert_eq!(num(&env["result"]["mean_estimate"]), 0.0);
    assert_eq!(env["result"]["trials"], 10);
}

#[test]
fn simulate_is_byte_identical() {
    let args = [
        "simulate", "--p00", "0.8", "--p11", "0.6", "--pi", "0.3", "--n", "50", "--trials", "2000",
        "--seed", "11",
    ];
    let a = dprr(&args);
    let b = dprr(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_edge_variance() {
    let env = ok_json(&[
        "simulate", "--p00", "1", "--p11", "0.4", "--pi", "0.1", "--n", "1", "--trials", "1000000",
        "--seed", "42",
    ]);
    let r = &env["result"];
    assert!(
        (num(&r["empirical_variance"]) / 0.24 - 1.0).abs() <= 0.01,
        "{r}"
    );
    assert!(num(&r["z_score_bias"]).abs() <= 4.0);
}

#[test]
fn simulate_requires_seed_and_valid_mechanism() {
    fails_with(
        &[
            "simulate", "--p00", "1", "--p11", "1", "--pi", "0.2", "--n", "10",
        ],
        2,
    );
    fails_with(
        &[
            "simulate", "--p00", "0.3", "--p11", "0.7", "--pi", "0.2", "--n", "10", "--seed", "1",
        ],
        2,
    );
    fails_with(
        &[
            "simulate", "--p00", "1", "--p11", "1", "--pi", "0.2", "--n", "10", "--trials", "0",
            "--seed", "1",
        ],
        2,
    );
}

#[test]
fn contour_single_cell() {
    let eps = 2f64.ln().to_string();
    let out = dprr(&[
        "contour",
        "--eps-min",
        &eps,
        "--eps-max",
        &eps,
        "--delta-min",
        "0.25",
        "--delta-max",
        "0.25",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.split_terminator('\n').collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert!((fields[2].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn contour_zero_delta_is_zero() {
    let out = dprr(&[
        "contour",
        "--delta-min",
        "0",
        "--delta-max",
        "0",
        "--resolution",
        "10",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.ends_with(",0")), "{rows:?}");
}

#[test]
fn contour_default_file_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let env = ok_json(&[
        "contour",
        "--out",
        path.to_str().unwrap(),
        "--level",
        "0.1",
        "--level",
        "0.25",
    ]);
    assert_eq!(env["result"]["rows"], 40000);
    assert_eq!(env["result"]["level_curves"].as_array().unwrap().len(), 2);

    let bytes = std::fs::read(&path).unwrap();
    assert!(!bytes.contains(&b'\r'), "LF line endings only");
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["epsilon", "delta", "g"]);
    let rows: Vec<(f64, f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 40000);
    // ε-major: δ runs fastest.
    assert_eq!(rows[0].0, rows[199].0);
    assert!(rows[200].0 > rows[0].0);
    assert_eq!((rows[0].0, rows[0].1), (0.01, 0.0));
    assert_eq!((rows[39999].0, rows[39999].1), (3.0, 0.5));

    // Nearest lattice point to (0.5, 0.1) is within one cell of g(0.5, 0.1) ≈ 0.243.
    let spot = rows
        .iter()
        .min_by(|a, b| {
            let da = (a.0 - 0.5).hypot(a.1 - 0.1);
            let db = (b.0 - 0.5).hypot(b.1 - 0.1);
            da.total_cmp(&db)
        })
        .unwrap();
    assert!((spot.2 - 0.243).abs() < 0.01, "{spot:?}");
}

#[test]
fn contour_writes_nan_for_singular_cells() {
    // e^0 + 2·0 - 1 = 0.
    let out = dprr(&[
        "contour",
        "--eps-min",
        "0",
        "--eps-max",
        "0",
        "--delta-min",
        "0",
        "--delta-max",
        "0.1",
        "--resolution",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "0,0,nan");
}

#[test]
fn contour_failures() {
    fails_with(&["contour", "--out", "/nonexistent-dir/g.csv"], 3);
    let dir = tempfile::tempdir().unwrap();
    fails_with(&["contour", "--out", dir.path().to_str().unwrap()], 3);
    fails_with(&["contour", "--resolution", "1"], 2);
    fails_with(&["contour", "--eps-min", "2", "--eps-max", "1"], 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(dprr(&[]).status.code(), Some(2));
    assert_eq!(dprr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        dprr(&["optimal", "--epsilon", "x", "--delta", "0", "--pi", "0.3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dprr(&["--help"]).status.code(), Some(0));
}

#[test]
fn envelopes_round_trip() {
    round_trips(&[
        "optimal",
        "--epsilon",
        "0.7",
        "--delta",
        "0.05",
        "--pi",
        "0.8",
        "--n",
        "30",
    ]);
    round_trips(&[
        "optimal",
        "--epsilon",
        "1",
        "--delta",
        "0.4",
        "--pi",
        "0.1",
        "--warner",
    ]);
    round_trips(&[
        "verify",
        "--p00",
        "0.9",
        "--p11",
        "0.35",
        "--epsilon",
        "1.3",
        "--delta",
        "0.01",
    ]);
    round_trips(&[
        "estimate",
        "--p00",
        "0.8",
        "--p11",
        "0.7",
        "--n",
        "200",
        "--count-ones",
        "90",
    ]);
    round_trips(&[
        "estimate",
        "--p00",
        "0.8",
        "--p11",
        "0.7",
        "--n",
        "200",
        "--count-ones",
        "3",
        "--reference-pi",
        "0.1",
    ]);
    round_trips(&[
        "simulate", "--p00", "0.9", "--p11", "0.6", "--pi", "0.2", "--n", "20", "--trials", "500",
        "--seed", "3",
    ]);
    round_trips(&["contour", "--resolution", "5", "--level", "0.2"]);
}

#[test]
fn full_precision_numbers() {
    let env = ok_json(&[
        "optimal",
        "--epsilon",
        "0.5",
        "--delta",
        "0.1",
        "--pi",
        "0.25",
    ]);
    let privacy = dprr_core::PrivacyParams::new(0.5, 0.1).unwrap();
    let g = dprr_core::g_threshold(&privacy).unwrap();
    assert_eq!(num(&env["result"]["g_value"]).to_bits(), g.to_bits());
    let v = dprr_core::optimal_relaxed(&privacy, 0.25)
        .unwrap()
        .variance_at_pi;
    assert_eq!(num(&env["result"]["variance"]).to_bits(), v.to_bits());
}

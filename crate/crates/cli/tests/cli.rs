//! Runs the `bestprox` binary and checks outputs and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bestprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bestprox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Value of a `key  value` line of the plain summary.
fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).filter(|rest| rest.starts_with(' ')))
        .unwrap_or_else(|| panic!("no '{key}' in:\n{text}"))
        .trim()
        .to_string()
}

const SOLVE_EXAMPLE: &[&str] = &[
    "solve",
    "--map",
    "example1",
    "--lambda",
    "0.5",
    "--p",
    "2",
    "--x0",
    "1000,8",
    "--criterion",
    "aposteriori",
    "--eps",
    "1e-2",
];

#[test]
fn solve_reproduces_the_published_stopping_step() {
    let o = bestprox(SOLVE_EXAMPLE);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "stopped_at"), "30");
    assert!(field(&out, "true_error").parse::<f64>().unwrap() < 1e-2);
    assert!(field(&out, "aposteriori_bound").parse::<f64>().unwrap() < 1e-2);
}

#[test]
fn solve_from_the_solution_stops_at_two() {
    let o = bestprox(&[
        "solve",
        "--map",
        "example1",
        "--lambda",
        "0.5",
        "--p",
        "2",
        "--x0",
        "1,0",
        "--criterion",
        "aposteriori",
        "--eps",
        "1e-6",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(field(&out, "stopped_at"), "2");
    assert_eq!(field(&out, "approximation"), "(1, 0)");
}

#[test]
fn solve_with_the_apriori_rule_meets_the_tolerance() {
    let o = bestprox(&[
        "solve",
        "--map",
        "example1",
        "--lambda",
        "0.5",
        "--p",
        "3",
        "--x0",
        "1000,8",
        "--criterion",
        "apriori",
        "--eps",
        "1e-4",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(field(&out, "true_error").parse::<f64>().unwrap() < 1e-4);
    assert!(field(&out, "apriori_bound").parse::<f64>().unwrap() < 1e-4);
}

fn trace_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn solve_writes_a_deterministic_trace() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let mut args = SOLVE_EXAMPLE.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(code(&bestprox(&args)), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let rows = trace_rows(&a);
    assert_eq!(
        rows[0].join(","),
        "step,side,coord_0,coord_1,displacement,apriori,aposteriori"
    );
    assert_eq!(rows.len(), 1 + 31);
    for (i, row) in rows[1..].iter().enumerate() {
        assert_eq!(row.len(), 7);
        assert_eq!(row[0], i.to_string());
        assert_eq!(row[1], if i % 2 == 0 { "A" } else { "B" });
        assert_eq!(row[4].is_empty(), i == 0);
        let has_bounds = i >= 2 && i % 2 == 0;
        assert_eq!(!row[5].is_empty(), has_bounds, "row {i}");
        assert_eq!(!row[6].is_empty(), has_bounds, "row {i}");
        // 17 significant digits.
        assert_eq!(
            row[2]
                .split('e')
                .next()
                .unwrap()
                .replace(['-', '.'], "")
                .len(),
            17
        );
    }
    let last_bound: f64 = rows[31][6].parse().unwrap();
    assert!(last_bound < 1e-2);
}

#[test]
fn solve_csv_format_streams_the_trace() {
    let mut args = SOLVE_EXAMPLE.to_vec();
    args.extend(["--format", "csv"]);
    let o = bestprox(&args);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("step,side,coord_0,coord_1,displacement,apriori,aposteriori\n"));
    assert!(stderr(&o).contains("stopped_at"));
}

#[test]
fn solve_markdown_summary() {
    let mut args = SOLVE_EXAMPLE.to_vec();
    args.extend(["--format", "markdown", "--no-oracle"]);
    let o = bestprox(&args);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("| quantity | value |"));
    assert!(out.contains("| stopped_at | 30 |"));
    assert!(!out.contains("true_error"));
}

#[test]
fn solve_in_double_precision() {
    let mut args = SOLVE_EXAMPLE.to_vec();
    args.extend(["--arithmetic", "double"]);
    let o = bestprox(&args);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "stopped_at"), "30");
}

#[test]
fn invalid_inputs_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["solve", "--p", "1", "--x0", "1000,8", "--eps", "1e-2"],
        &["solve", "--p", "2", "--x0", "0,0", "--eps", "1e-2"],
        &["solve", "--p", "2", "--x0", "1000,8,1", "--eps", "1e-2"],
        &["solve", "--p", "2", "--x0", "1000,8", "--eps", "-1"],
        &[
            "solve",
            "--p",
            "2",
            "--x0",
            "1000,8",
            "--eps",
            "1e-2",
            "--max-steps",
            "7",
        ],
        &[
            "solve", "--p", "2", "--x0", "1000,8", "--eps", "1e-2", "--lambda", "1",
        ],
        &["solve", "--p", "2", "--x0", "abc", "--eps", "1e-2"],
        &["solve", "--p", "2", "--eps", "1e-2"],
        &[
            "solve", "--p", "2", "--x0", "1000,8", "--eps", "1e-2", "--map", "other",
        ],
        &["table", "--eps", "0"],
        &["table", "--p", "0.5"],
        &["modulus", "--p", "2", "--eps", "3"],
        &["modulus", "--p", "0.9", "--eps", "1"],
        &["verify", "--suite", "geometry"],
        &["verify", "--declared-k", "1.5"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = bestprox(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unwritable_output_path_is_an_input_error() {
    let mut args = SOLVE_EXAMPLE.to_vec();
    args.extend(["--out", "/nonexistent-dir/trace.csv"]);
    assert_eq!(code(&bestprox(&args)), 2);
}

#[test]
fn exhausted_step_cap_exits_with_one() {
    let o = bestprox(&[
        "solve",
        "--lambda",
        "0.9",
        "--p",
        "20",
        "--x0",
        "1000,8",
        "--eps",
        "1e-10",
        "--max-steps",
        "10",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("no convergence"));
    let o = bestprox(&[
        "solve",
        "--lambda",
        "0.9",
        "--p",
        "20",
        "--x0",
        "1000,8",
        "--eps",
        "1e-10",
        "--criterion",
        "apriori",
        "--max-steps",
        "10",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn single_cell_table() {
    let o = bestprox(&[
        "table",
        "--criterion",
        "aposteriori",
        "--eps",
        "1e-2",
        "--p",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "eps,2\n1e-2,30\n");
}

#[test]
fn aposteriori_table_matches_the_published_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.csv");
    let o = bestprox(&[
        "table",
        "--kind",
        "aposteriori",
        "--compare-paper",
        "--format",
        "markdown",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("**published counts**"));
    assert!(out.contains("| 1e-10 | 88 | 84 | 84 | 122 | 200 | 798 |"));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with(
        "# computed aposteriori counts\neps,1.1,1.5,2,3,5,20\n1e-2,34,32,30,42,66,266\n"
    ));
    assert!(
        csv.contains("# delta (computed - published)\neps,1.1,1.5,2,3,5,20\n1e-2,0,0,0,0,0,0\n")
    );
}

#[test]
fn apriori_table_reports_every_delta() {
    let o = bestprox(&["table", "--kind", "apriori", "--compare-paper"]);
    // The literal a priori counts sit above the published grid for p >= 2.
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("computed apriori counts"));
    assert!(out.contains("published counts"));
    assert!(out.contains("delta (computed - published)"));
    assert!(stderr(&o).contains("tolerance ±4"));
}

#[test]
fn table_outside_the_reference_scenario_has_no_comparison() {
    let o = bestprox(&[
        "table",
        "--lambda",
        "0.3",
        "--eps",
        "1e-2",
        "--p",
        "2",
        "--compare-paper",
    ]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).contains("published"));
}

#[test]
fn verify_norms_passes() {
    let o = bestprox(&["verify", "--suite", "norms", "--seed", "42"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(
        stdout(&o)
            .lines()
            .filter(|l| l.starts_with("[PASS]"))
            .count(),
        4
    );
}

#[test]
fn verify_flags_a_corrupted_contraction_coefficient() {
    let o = bestprox(&["verify", "--suite", "cyclic", "--declared-k", "0.05"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("[FAIL] cyclic/contraction"));
    assert!(stderr(&o).contains("cyclic/contraction"));
}

#[test]
fn verify_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let o = bestprox(&[
        "verify",
        "--suite",
        "cyclic",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file, stdout(&o));
    assert!(file.starts_with("suite,property,result,detail\ncyclic,cyclicity,pass,"));
}

#[test]
fn modulus_examples() {
    let o = bestprox(&["modulus", "--p", "2", "--eps", "2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(field(&out, "delta"), "1");
    assert_eq!(field(&out, "lower_bound"), "0.5");
    assert_eq!(field(&out, "C"), "0.125");
    assert_eq!(field(&out, "q"), "2");

    let out = stdout(&bestprox(&["modulus", "--p", "3", "--eps", "1"]));
    let expected = 1.0 - (7.0f64 / 8.0).cbrt();
    assert!((field(&out, "delta").parse::<f64>().unwrap() - expected).abs() < 1e-6);
    assert_eq!(field(&out, "C"), "0.0416667");

    let o = bestprox(&["modulus", "--p", "1.5", "--eps", "0.5", "--format", "csv"]);
    let out = stdout(&o);
    let row: Vec<f64> = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row[3], 0.0625 * 0.25);
    assert!(row[2] > row[3]);
}

#[test]
fn help_exits_cleanly() {
    let o = bestprox(&["--help"]);
    assert_eq!(code(&o), 0);
    for cmd in ["solve", "table", "verify", "modulus"] {
        assert!(stdout(&o).contains(cmd));
    }
}

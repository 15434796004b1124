//! End-to-end tests of the `helmpanel` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helmpanel")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Values of the final `result,...` line.
fn result_line(text: &str) -> Vec<f64> {
    let line = text.lines().find(|l| l.starts_with("result,")).expect("result line");
    line.split(',').skip(1).map(|v| v.parse().unwrap()).collect()
}

#[test]
fn missing_or_bad_arguments_fail() {
    assert!(!run(&["integrate"]).status.success());
    assert!(!run(&["integrate", "--point", "0.1,0.2"]).status.success());
    assert!(!run(&["integrate", "--point", "0.1,0.2,0.3", "--tol", "0.5"]).status.success());
    assert!(!run(&["integrate", "--point", "0.1,0.2,0.3", "--tri", "0,0,0,1,0,0,2,0,0"]).status.success());
    assert!(!run(&["economize", "--dx", "banana"]).status.success());
    assert!(!run(&["frobnicate"]).status.success());
}

#[test]
fn static_integrate_is_real() {
    let v = result_line(&stdout(&["integrate", "--point", "0.3,0.2,0.1", "--k", "0"]));
    assert_eq!(v.len(), 12);
    for pair in v.chunks(2) {
        assert!(pair[1].abs() <= 1e-14, "{pair:?}");
    }
}

#[test]
fn tolerances_agree() {
    let args = |tol| ["integrate", "--point", "0.4,0.25,0.01", "--k", "2", "--tol", tol, "--hyper"];
    let a = result_line(&stdout(&args("1e-9")));
    let b = result_line(&stdout(&args("1e-12")));
    assert_eq!(a.len(), 14);
    // error of each complex value, relative to its modulus
    for (x, y) in a.chunks(2).zip(b.chunks(2)) {
        let diff = (x[0] - y[0]).hypot(x[1] - y[1]);
        assert!(diff <= 1e-8 * (1.0 + y[0].hypot(y[1])), "{x:?} vs {y:?}");
    }
}

#[test]
fn sweep_is_parseable_csv() {
    let text = stdout(&["sweep", "--steps", "2", "--proj", "interior", "--tols", "1e-6", "--orders", "8"]);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    let header: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(header[0], "z");
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), header.len());
        assert_eq!(cells[1], 1.0);
    }
}

#[test]
fn economize_table() {
    let text = stdout(&["economize", "--dx", "pi/2", "--eps", "1e-9"]);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("delta_x"))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[2] == "8"));
}

#[test]
fn estimate_on_the_element() {
    let text = stdout(&["estimate", "--r-max", "1", "--r-min", "1", "--z", "0"]);
    assert!(text.contains("estimate undefined") || text.contains("# selected Q 1 "), "{text}");
    let text = stdout(&["estimate", "--r-max", "1", "--z", "0.5", "--tol", "1e-3"]);
    assert!(text.lines().any(|l| l.starts_with("# selected Q")));
}

#[test]
fn output_is_deterministic() {
    let args = ["sweep", "--steps", "3", "--log", "--tols", "1e-6,1e-9", "--orders", "4,8"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["integrate", "--point", "0.2,0.1,0.05", "--k", "1.5", "--hyper"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn quadsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadsym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, content: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_owned()
}

fn analyze_to(dir: &TempDir, problem: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.path().join(name);
    let out = out.to_str().unwrap();
    let mut args = vec!["analyze", problem.to_str().unwrap(), "--json", out];
    args.extend_from_slice(extra);
    let o = quadsym(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    out.to_owned()
}

#[test]
fn validate_reports_pivot() {
    let o = quadsym(&["validate", data("crossed_ellipses.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("n=2 M=2"), "{text}");
    assert!(
        text.contains("B_Σ positive definite, min pivot 1.0"),
        "{text}"
    );
}

#[test]
fn validate_rejects_indefinite_sum() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "bad.json",
        r#"{"n": 2, "objective": [[1, 0], [0, 1]], "constraints": [[[1, 0], [0, -1]]]}"#,
    );
    let o = quadsym(&["validate", &p]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("sum of constraint matrices not positive definite"),
        "{err}"
    );
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let broken = write(
        &dir,
        "broken.json",
        "{\n  \"n\": 2,\n  \"objective\": [[1, 0], [0,\n",
    );
    let o = quadsym(&["validate", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let ragged = write(
        &dir,
        "ragged.json",
        r#"{"n": 2, "objective": [[1, 0], [0]], "constraints": [[[1, 0], [0, 1]]]}"#,
    );
    assert_eq!(quadsym(&["validate", &ragged]).status.code(), Some(2));
    assert_eq!(quadsym(&["analyze", &ragged]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_with_one() {
    assert_eq!(
        quadsym(&["validate", "/nonexistent/problem.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn analyze_summaries() {
    let o = quadsym(&["analyze", data("crossed_ellipses.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("K=0; det+1 cosets: 2; det-1 cosets: 2"));

    let o = quadsym(&["analyze", data("axial_rotation.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("K=1; det+1 cosets: 2;"));
}

#[test]
fn permutation_budget_exits_with_four() {
    let o = quadsym(&[
        "analyze",
        data("crossed_ellipses.json").to_str().unwrap(),
        "--max-perms",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn objective_free_mode_agrees_when_objective_is_isotropic() {
    let dir = TempDir::new().unwrap();
    let p = data("axial_rotation.json");
    let full = quadsym(&["analyze", p.to_str().unwrap()]);
    let free = quadsym(&["analyze", p.to_str().unwrap(), "--constraints-only"]);
    assert_eq!(stdout(&full), stdout(&free));

    let a = analyze_to(&dir, &p, "full.json", &[]);
    let b = analyze_to(&dir, &p, "free.json", &["--constraints-only"]);
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a).unwrap()).unwrap();
    let mut b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b).unwrap()).unwrap();
    assert_eq!(a["constraints_only"], false);
    assert_eq!(b["constraints_only"], true);
    a["constraints_only"] = serde_json::Value::Null;
    b["constraints_only"] = serde_json::Value::Null;
    assert_eq!(a, b);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let p = data("axial_rotation.json");
    let a = analyze_to(&dir, &p, "a.json", &["--seed", "42"]);
    let b = analyze_to(&dir, &p, "b.json", &["--seed", "42"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn report_round_trips_through_verification() {
    let dir = TempDir::new().unwrap();
    let p = data("crossed_ellipses.json");
    let out = analyze_to(&dir, &p, "r.json", &[]);
    let text = std::fs::read_to_string(out).unwrap();
    let report = quadsym::group::SymmetryReport::from_json(&text).unwrap();
    let (_, problem) = quadsym::cli::load_problem(&p).unwrap();
    assert!(report.verify(&problem).unwrap().passed());
    let again = quadsym::group::SymmetryReport::from_json(&report.to_json()).unwrap();
    assert_eq!(again, report);
    assert_eq!(
        again.verify(&problem).unwrap(),
        report.verify(&problem).unwrap()
    );
}

#[test]
fn orbit_line_counts() {
    let dir = TempDir::new().unwrap();
    let p = data("crossed_ellipses.json");
    let report = analyze_to(&dir, &p, "r.json", &[]);
    let ps = p.to_str().unwrap();

    let o = quadsym(&["orbit", ps, &report, "0.3,0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4, "{text}");
    assert!(text.lines().all(|l| l.contains("coset")));

    let o = quadsym(&["orbit", ps, &report, "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);

    let o = quadsym(&["orbit", ps, &report, "-0.3,0.1"]);
    assert_eq!(o.status.code(), Some(0));

    assert_eq!(
        quadsym(&["orbit", ps, &report, "0.3"]).status.code(),
        Some(2)
    );
}

#[test]
fn stale_report_exits_with_five() {
    let dir = TempDir::new().unwrap();
    let report = analyze_to(&dir, &data("crossed_ellipses.json"), "r.json", &[]);
    let changed = write(
        &dir,
        "changed.json",
        r#"{"n": 2, "objective": [[1, 0], [0, 0.7]], "constraints": [[[0.5, 2], [2, 0.5]], [[0.5, -2], [-2, 0.5]]]}"#,
    );
    assert_eq!(
        quadsym(&["orbit", &changed, &report, "0.3,0.1"])
            .status
            .code(),
        Some(5)
    );
    assert_eq!(quadsym(&["cuts", &changed, &report]).status.code(), Some(5));
}

#[test]
fn cuts_for_examples() {
    let dir = TempDir::new().unwrap();
    let p = data("crossed_ellipses.json");
    let report = analyze_to(&dir, &p, "r.json", &[]);
    let o = quadsym(&["cuts", p.to_str().unwrap(), &report]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    // −E is the rotation by π; every vector is a −1 eigenvector and e₁ is chosen
    assert!(text.lines().any(|l| l.ends_with(": 1 0 >= 0")), "{text}");

    let p = data("axial_rotation.json");
    let report = analyze_to(&dir, &p, "a.json", &[]);
    let o = quadsym(&["cuts", p.to_str().unwrap(), &report]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.ends_with(": 0 1 0 >= 0")), "{text}");
}

#[test]
fn identity_only_report_has_no_cuts() {
    let dir = TempDir::new().unwrap();
    let p = data("crossed_ellipses.json");
    let out = analyze_to(&dir, &p, "r.json", &[]);
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    v["cosets"].as_array_mut().unwrap().truncate(1);
    let trimmed = write(&dir, "trimmed.json", &v.to_string());
    let o = quadsym(&["cuts", p.to_str().unwrap(), &trimmed]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}

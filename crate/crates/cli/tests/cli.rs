use std::process::Command;

use quasifin_core::report::{Report, Status};

fn fixture(name: &str) -> String {
    format!("{}/../core/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_quasifin")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Report, String) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out, _) = run(&all);
    let rep = Report::from_json(&out).expect("json report");
    (code, rep, out)
}

#[test]
fn trivial_quotient_dims_table() {
    let input = fixture("trivial.json");
    let (code, rep, _) = json(&["--command", "quotient-dims", "--input", &input, "--n-max", "2", "--d-min", "-2", "--d-max", "2"]);
    assert_eq!(code, 0);
    assert_eq!(rep.rows.len(), 15);
    for row in &rep.rows {
        let expect = if row[1] == "0" { "1" } else { "0" };
        assert_eq!(row[2], expect, "{row:?}");
        assert_eq!(row[3], "yes");
    }
}

/// Strict sequences with parts `>= -n` summing to `d`, as subsets.
fn strict_count(d: i64, n: i64) -> Vec<usize> {
    let hi = d + n * (n + 1) / 2;
    let vals: Vec<i64> = if hi < -n { vec![] } else { (-n..=hi).collect() };
    let mut by_len = vec![0usize; vals.len() + 1];
    for mask in 0u32..(1 << vals.len()) {
        let sum: i64 = (0..vals.len()).filter(|i| mask & (1 << i) != 0).map(|i| vals[i]).sum();
        if sum == d {
            by_len[mask.count_ones() as usize] += 1;
        }
    }
    by_len
}

#[test]
fn pca_bounds_match_subset_count() {
    let input = fixture("poisson/dual_numbers.json");
    let (code, rep, _) = json(&["--command", "pca-bounds", "--input", &input, "--n-max", "3", "--d-min", "-4", "--d-max", "4"]);
    assert_eq!(code, 0, "{:?}", rep.notes);
    assert_eq!(rep.rows.len(), 4 * 9);
    for row in &rep.rows {
        let (n, d): (i64, i64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        // one non-unit basis element, so r = 1
        let expect: usize = strict_count(d, n).iter().sum();
        assert_eq!(row[2], expect.to_string(), "n={n} d={d}");
        assert!(row[3].parse::<usize>().unwrap() <= expect);
    }
}

#[test]
fn mutated_borcherds_fails_with_witnesses() {
    let input = fixture("heisenberg_w4_mutated.json");
    let (code, rep, _) = json(&["--command", "borcherds", "--input", &input]);
    assert_eq!(code, 1);
    assert_eq!(rep.status, Status::Fail);
    assert!(!rep.rows.is_empty());
    assert!(rep.rows.iter().all(|r| r[6] != "0"));
    let clean = fixture("heisenberg_w4.json");
    assert_eq!(run(&["--command", "borcherds", "--input", &clean]).0, 0);
}

#[test]
fn heisenberg_surjection_is_inconclusive() {
    let input = fixture("heisenberg_w4.json");
    let (code, out, _) = run(&["--command", "surjection-check", "--input", &input, "--n-max", "0", "--d-min", "0", "--d-max", "0"]);
    assert_eq!(code, 2);
    assert!(out.contains("INCONCLUSIVE"));
}

#[test]
fn input_errors_exit_three() {
    let (code, _, err) = run(&["--command", "spectrum", "--input", "/no/such/file.json"]);
    assert_eq!(code, 3);
    assert!(err.contains("/no/such/file.json"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": 3\n}\n").unwrap();
    let (code, _, err) = run(&["--command", "check-axioms", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(err.contains("line 2"), "{err}");
    let (code, _, _) = run(&["--command", "quotient-dims", "--input", &fixture("trivial.json"), "--d-min", "2", "--d-max", "1"]);
    assert_eq!(code, 3);
    let (code, _, _) = run(&["--command", "straighten", "--input", &fixture("poisson/dual_numbers.json"), "--monomial", "Q(e)"]);
    assert_eq!(code, 3);
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let cases: Vec<Vec<String>> = vec![
        vec!["spectrum".into(), fixture("lee_yang_w6.json")],
        vec!["zhu-poisson".into(), fixture("heisenberg_w4.json")],
        vec!["finite-algebra".into(), fixture("lee_yang_w6.json")],
        vec!["pca-bounds".into(), fixture("poisson/truncated_cubic.json")],
    ];
    for c in cases {
        let args = ["--command", &c[0], "--input", &c[1], "--n-max", "1"];
        let (code1, rep, first) = json(&args);
        let (code2, _, second) = json(&args);
        assert_eq!(code1, code2);
        assert_eq!(first, second, "{}", c[0]);
        assert_eq!(rep.to_json(), first);
        let t1 = run(&args).1;
        assert_eq!(t1, run(&args).1);
    }
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (code, stdout, _) = run(&[
        "--command",
        "functor-check",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let rep = Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(rep.rows.iter().all(|r| r[5] == "yes"));
    assert!(rep.rows.len() > 10);
}

#[test]
fn straighten_prints_certificate_steps() {
    let input = fixture("poisson/dual_numbers.json");
    let (code, rep, _) = json(&["--command", "straighten", "--input", &input, "--n-max", "3", "--monomial", "P_-2(e)*P_-2(e)"]);
    assert_eq!(code, 0);
    assert_eq!(rep.rows.len(), 1);
    assert_eq!(rep.rows[0][2], "rewrite@0");
    assert!(rep.notes[0].contains("-2/1*P_-3(e)*P_-1(e)"));
}

#[test]
fn empty_failure_table_is_header_only() {
    let (code, out, _) = run(&["--command", "check-axioms", "--input", &fixture("trivial.json")]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[1..3], ["failure", "-------"]);
    assert!(lines[3].starts_with("note:"));
}

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tori")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.push("--format");
    full.push("json");
    let o = run(&full);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn chi_of_half_open_interval_is_zero() {
    let o = run(&["chi", &fixture("unit_interval.txt")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
    let o = run(&["chi", &fixture("closed_square.txt")]);
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn chi_reads_stdin_and_json() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tori"))
        .args(["chi", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"and": [{"coeffs": [1], "rel": ">=", "rhs": "0"}, {"coeffs": [1], "rel": "<=", "rhs": "5/2"}]}"#)
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn rank_example() {
    let o = run(&["rank", &fixture("pol_2_1_1_2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n");
    let (code, r) = report(&["rank", &fixture("pol_diag_2_3.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["rank"], 6);
    assert_eq!(r["results"]["smith_invariants"], serde_json::json!([1, 6]));
}

#[test]
fn hilbert_variant_flag() {
    let (_, paper) = report(&["rank", &fixture("pol_2_1_1_2.json")]);
    assert_eq!(paper["results"]["hilbert_polynomial"]["text"], "3x^2");
    let (_, rig) = report(&["rank", "--hilbert-variant", "rigidified", &fixture("pol_2_1_1_2.json")]);
    assert_eq!(rig["results"]["hilbert_polynomial"]["text"], "108x^2");
    assert_eq!(rig["command"]["options"]["hilbert_variant"], "rigidified");
}

#[test]
fn smith_and_theta_reps() {
    let (code, r) = report(&["smith", &fixture("pol_2_1_1_2.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["invariants"], serde_json::json!([1, 3]));
    let (code, r) = report(&["theta-reps", "--m", "6", &fixture("pol_2_1_1_2.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["count"], 108);
    assert_eq!(r["results"]["expected"], 108);
    assert_eq!(r["results"]["reps"].as_array().unwrap().len(), 108);
}

#[test]
fn reduce_reports_omega_in_both_conventions() {
    let (code, std) = report(&["reduce", &fixture("lattice_5_3_3_2.json")]);
    assert_eq!(code, 0);
    assert_eq!(std["results"]["trop_red"], serde_json::json!([["1", "0"], ["0", "1"]]));
    let (_, tr) = report(&["reduce", "--transpose-action", &fixture("lattice_5_3_3_2.json")]);
    let w = &std["results"]["omega"]["entries"];
    let wt = &tr["results"]["omega"]["entries"];
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(w[i][j], wt[j][i]);
        }
    }
    assert_eq!(tr["results"]["convention"], "transposed");

    let (_, fixed) = report(&["reduce", &fixture("lattice_reduced.json")]);
    assert_eq!(fixed["results"]["steps"], serde_json::json!([]));
}

#[test]
fn check_polarization() {
    let (code, r) = report(&["check-polarization", &fixture("lattice_5_3_3_2.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["is_polarization"], true);
    assert_eq!(r["results"]["in_fundamental_domain"], false);
    let (_, r) = report(&["check-polarization", &fixture("lattice_reduced.json")]);
    assert_eq!(r["results"]["in_fundamental_domain"], true);
}

#[test]
fn verify_tate_family() {
    let o = run(&["verify", &fixture("tate.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("vanishes: true"));
    let (code, r) = report(&["verify", &fixture("tate.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["succeeded"], true);
    assert_eq!(r["results"]["direct"]["poly"], serde_json::json!([]));
    assert_eq!(r["errors"], serde_json::json!([]));
}

#[test]
fn verify_other_families() {
    for f in ["constant_principal.json", "diagonal_two_parameter.json"] {
        let (code, r) = report(&["verify", &fixture(f)]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(r["results"]["vanishes"], true);
        assert_eq!(r["results"]["agree"], true);
    }
}

#[test]
fn closed_fibres_do_not_vanish() {
    let o = run(&["volume", &fixture("tate_closed_fibres.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "direct: L^2 - 2L + 1\nfubini: L^2 - 2L + 1\n");
    let (code, r) = report(&["verify", &fixture("tate_closed_fibres.json")]);
    assert_eq!(code, 1);
    assert_eq!(r["results"]["agree"], true);
    assert_eq!(r["results"]["vanishes"], false);
}

#[test]
fn domain_errors_exit_one() {
    let (code, r) = report(&["verify", &fixture("not_positive.json")]);
    assert_eq!(code, 1);
    assert_eq!(r["errors"][0]["name"], "NotPositiveDefiniteAt");
    assert_eq!(r["errors"][0]["stage"], "validation");
    let (code, r) = report(&["volume", &fixture("not_positive.json")]);
    assert_eq!(code, 1);
    assert_eq!(r["errors"][0]["name"], "NotPositiveDefiniteAt");
}

#[test]
fn malformed_input_exits_two_with_position() {
    let (code, r) = report(&["chi", &fixture("malformed.txt")]);
    assert_eq!(code, 2);
    let e = &r["errors"][0];
    assert_eq!(e["name"], "MalformedInput");
    assert_eq!((e["line"].as_u64(), e["column"].as_u64()), (Some(2), Some(13)));
    assert_eq!(r["results"], Value::Null);

    let o = run(&["rank", &fixture("unit_interval.txt")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MalformedInput"));

    let o = run(&["rank", "no/such/file.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "--format", "json", &fixture("diagonal_two_parameter.json")];
    let a = run(&args).stdout;
    let b = run(&args).stdout;
    assert_eq!(a, b);
    let (_, r) = report(&["chi", &fixture("unit_interval.txt")]);
    let digest = r["inputs_digest"].as_str().unwrap();
    assert!(digest.starts_with("sha256:") && digest.len() == 7 + 64);
    let (_, other) = report(&["chi", &fixture("closed_square.txt")]);
    assert_ne!(other["inputs_digest"], r["inputs_digest"]);
    assert!(r.get("timing").is_none());
    let (_, timed) = report(&["chi", "--timing", &fixture("unit_interval.txt")]);
    assert!(timed["timing"]["elapsed_ms"].is_number());
}

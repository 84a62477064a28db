use std::path::Path;
use std::process::{Command, Output};

use dualcert::methods::read_trace_csv;

fn dualcert(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualcert"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DUALCERT_TOL")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> bool {
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.success()
}

fn ks(path: &Path) -> Vec<usize> {
    read_trace_csv(std::fs::File::open(path).unwrap())
        .unwrap()
        .iter()
        .map(|r| r.k)
        .collect()
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ok(&dualcert(&["gen", "--seed", "5", "-o", "a.json"], d)));
    assert!(ok(&dualcert(&["gen", "--seed", "5", "-o", "b.json"], d)));
    assert!(ok(&dualcert(&["gen", "--seed", "6", "-o", "c.json"], d)));
    let read = |f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
    let bad = dualcert(&["gen", "--n", "2", "--p", "3", "-o", "x.json"], d);
    assert!(!bad.status.success());
}

#[test]
fn full_pipeline_certifies_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ok(&dualcert(&["gen", "--seed", "2", "-o", "inst.json"], d)));
    assert!(ok(&dualcert(&["reference", "inst.json", "-o", "ref.json"], d)));
    let run = dualcert(
        &[
            "run", "inst.json", "--ref", "ref.json", "--methods", "pg,fista,tseng", "--k", "10000",
            "--alpha-rule", "linear", "-o", "out",
        ],
        d,
    );
    assert!(ok(&run));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert_eq!(stdout.matches(" 0 certificate violations").count(), 3, "{stdout}");

    let out = d.join("out");
    let grid = ks(&out.join("pg_trace.csv"));
    assert_eq!(grid.len(), 10_001);
    assert_eq!(grid, ks(&out.join("fista_trace.csv")));
    assert_eq!(grid, ks(&out.join("tseng_trace.csv")));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    // 13 grid points per method plus the header
    assert_eq!(summary.lines().count(), 1 + 3 * 13);

    let verify = dualcert(&["verify", "out"], d);
    assert!(ok(&verify));
    assert!(String::from_utf8_lossy(&verify.stdout).contains("pg_dual_gap"));

    // all traces except the wall-time column repeat exactly
    assert!(ok(&dualcert(
        &["run", "inst.json", "--ref", "ref.json", "--methods", "pg", "--k", "200", "-o", "again"],
        d
    )));
    assert!(ok(&dualcert(
        &["run", "inst.json", "--ref", "ref.json", "--methods", "pg", "--k", "200", "-o", "again2"],
        d
    )));
    let strip = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(
        strip(&d.join("again/pg_trace.csv")),
        strip(&d.join("again2/pg_trace.csv"))
    );
    assert_eq!(
        std::fs::read(d.join("again/pg_cert.json")).unwrap(),
        std::fs::read(d.join("again2/pg_cert.json")).unwrap()
    );
}

#[test]
fn explicit_alpha_rule_and_bad_rule() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ok(&dualcert(&["gen", "--seed", "3", "--m", "1", "--p", "0", "-o", "inst.json"], d)));
    assert!(ok(&dualcert(&["reference", "inst.json", "-o", "ref.json"], d)));
    let bad = dualcert(
        &["run", "inst.json", "--ref", "ref.json", "--alpha-rule", "fast", "-o", "out"],
        d,
    );
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("alpha rule"));
    assert!(ok(&dualcert(
        &[
            "run", "inst.json", "--ref", "ref.json", "--methods", "pg,tseng", "--k", "500",
            "--alpha-rule", "explicit:0.01", "-o", "out",
        ],
        d
    )));
    assert!(ok(&dualcert(&["verify", "out"], d)));
}

#[test]
fn empty_method_list_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = dualcert(
        &["run", "missing.json", "--ref", "missing.json", "--methods", "", "-o", "out"],
        d,
    );
    assert!(out.status.success());
    assert!(!d.join("out").exists());
}

#[test]
fn verify_rejects_missing_reference_and_malformed_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ok(&dualcert(&["gen", "--seed", "4", "-o", "inst.json"], d)));
    assert!(ok(&dualcert(&["reference", "inst.json", "-o", "ref.json"], d)));
    assert!(ok(&dualcert(
        &["run", "inst.json", "--ref", "ref.json", "--methods", "fista", "--k", "100", "-o", "out"],
        d
    )));
    let cert = d.join("out/fista_cert.json");
    let original = std::fs::read_to_string(&cert).unwrap();

    let mut json: serde_json::Value = serde_json::from_str(&original).unwrap();
    json["reference"] = serde_json::Value::Null;
    std::fs::write(&cert, json.to_string()).unwrap();
    let out = dualcert(&["verify", "out"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("reference required"));

    std::fs::write(&cert, &original[..original.len() / 2]).unwrap();
    let out = dualcert(&["verify", "out"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed report"));

    let empty = tempfile::tempdir().unwrap();
    assert!(!dualcert(&["verify", "."], empty.path()).status.success());
}

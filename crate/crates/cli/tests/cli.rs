use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn evoset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoset"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn model(name: &str) -> String {
    fixture(&format!("models/{name}"))
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_exit_codes() {
    assert_eq!(
        evoset(&["check", "example-square", "--horizon", "64"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        evoset(&["check", "toy-genealogy", "--horizon", "8"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        evoset(&["check", &model("reentry.json"), "--horizon", "6"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        evoset(&["check", &model("finite_chronology.json"), "--horizon", "4"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        evoset(&["check", &model("finite_chronology.json"), "--horizon", "16"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(evoset(&["check", "example-square"]).status.code(), Some(2));
    assert_eq!(
        evoset(&["check", "example-square", "--horizon", "zero"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn every_kind_checks() {
    for name in [
        "atoms.json",
        "convergent.json",
        "distance_pullback.json",
        "pair_with_integrand.json",
        "shell_of_pairs.json",
        "span_of_square.json",
        "windows.json",
    ] {
        let out = evoset(&["check", &model(name), "--horizon", "16"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let doc = report(&out);
        let verdicts = doc["report"]["axioms"]["verdicts"].as_array().unwrap();
        assert!(
            verdicts[..3].iter().all(|v| v == "PASS"),
            "{name}: {verdicts:?}"
        );
        assert_eq!(doc["model"]["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn toy_genealogy_reports_the_terminal_failure() {
    let out = evoset(&["check", "toy-genealogy", "--horizon", "8"]);
    let doc = report(&out);
    let axioms = &doc["report"]["axioms"];
    assert_eq!(axioms["verdicts"][1], "FAIL");
    let v = &axioms["violations"][0];
    assert_eq!(
        (
            v["condition"].as_u64(),
            v["stage"].as_u64(),
            v["other"].as_u64()
        ),
        (Some(2), Some(2), Some(3))
    );
    assert_eq!(v["witness"], Value::Array(vec![]));

    let out = evoset(&[
        "genealogy",
        "toy-genealogy",
        "--horizon",
        "8",
        "--couple",
        "m1,f1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = report(&out);
    assert_eq!(doc["report"]["placement"], "PASS");
    assert_eq!(doc["report"]["ancestry"]["acyclic"], "PASS");
    assert_eq!(
        doc["report"]["couple"]["children"],
        serde_json::json!(["f2", "m2"])
    );
    assert_eq!(doc["report"]["trace"]["stages"][3], serde_json::json!([]));
}

#[test]
fn schema_and_kind_errors_exit_two() {
    let out = evoset(&["check", &model("bad_field.json"), "--horizon", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/stepp"), "{}", stderr(&out));

    let out = evoset(&["check", &model("unknown_kind.json"), "--horizon", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown model kind `nope`"));

    let out = evoset(&["genealogy", &model("prime_founders.json"), "--horizon", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("founder"));
    assert!(out.stdout.is_empty());
}

#[test]
fn measure_reports_threshold_and_integrals() {
    let out = evoset(&[
        "measure",
        "geom-pair",
        "--horizon",
        "32",
        "--epsilon",
        "1e-3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["report"]["decay"]["first_below"], 11);

    let out = evoset(&[
        "measure",
        &model("pair_with_integrand.json"),
        "--horizon",
        "16",
        "--epsilon",
        "1e-3",
    ]);
    let doc = report(&out);
    assert_eq!(doc["report"]["integral"]["bound_holds"], "PASS");
    // E_3 = {2, 3}: 0.5 / 8 + 1.5 / 16
    assert_eq!(doc["report"]["integral"]["integrals"][2], 0.15625);

    let out = evoset(&[
        "measure",
        &model("pair_with_integrand.json"),
        "--horizon",
        "16",
        "--epsilon",
        "1e-3",
        "--bound",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["report"]["integral"]["bound_holds"], "FAIL");

    let out = evoset(&[
        "measure",
        "example-square",
        "--horizon",
        "16",
        "--epsilon",
        "1e-3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_matches_the_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let golden = std::fs::read(fixture("geom_pair_h32.csv")).unwrap();
    for run in 0..2 {
        let path = dir.path().join(format!("run{run}.csv"));
        let out = evoset(&[
            "trace",
            "geom-pair",
            "--horizon",
            "32",
            "--csv",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(std::fs::read(&path).unwrap(), golden);
    }
    let first = evoset(&["trace", "geom-pair", "--horizon", "32"]);
    let second = evoset(&["trace", "geom-pair", "--horizon", "32"]);
    assert_eq!(first.stdout, golden);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn reports_are_byte_stable() {
    for args in [
        ["check", "example-square", "--horizon", "40"],
        ["check", "toy-genealogy", "--horizon", "8"],
        ["reduce", "geom-pair", "--horizon", "24"],
    ] {
        assert_eq!(evoset(&args).stdout, evoset(&args).stdout, "{args:?}");
    }
}

#[test]
fn reduce_outcomes() {
    let doc = report(&evoset(&["reduce", "geom-pair", "--horizon", "24"]));
    assert_eq!(
        doc["report"]["reduction"]["outcome"],
        "not-found-within-bounds"
    );
    let doc = report(&evoset(&["reduce", "example-square", "--horizon", "12"]));
    assert_eq!(doc["report"]["reduction"]["outcome"], "reducible");
}

#[test]
fn constructed_family_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.json");
    let path = path.to_str().unwrap();
    let out = evoset(&[
        "construct-convergent",
        "--phi",
        "pow:-0.5+const:-1",
        "--tol",
        "0.05",
        "--horizon",
        "200",
        "--out",
        path,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = report(&out);
    assert_eq!(doc["report"]["total"], 1.0);
    assert!(doc["report"]["sup_error_after"].as_f64().unwrap() <= 0.05);

    let out = evoset(&["check", path, "--horizon", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = report(&out);
    assert_eq!(doc["model"]["kind"], "explicit-stages");
    assert_eq!(
        doc["report"]["axioms"]["verdicts"].as_array().unwrap()[..3],
        ["PASS", "PASS", "PASS"]
    );

    let trace = evoset(&["trace", path, "--horizon", "4"]);
    let text = String::from_utf8(trace.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("1,,"));
}

#[test]
fn single_signed_integrands_are_obstructed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.json");
    let out = evoset(&[
        "construct-convergent",
        "--phi",
        "const:1",
        "--tol",
        "0.01",
        "--horizon",
        "50",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["report"]["outcome"], "sign-obstruction");
    assert!(!path.exists());

    let out = evoset(&[
        "construct-convergent",
        "--phi",
        "sin:1",
        "--tol",
        "0.01",
        "--horizon",
        "50",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

use std::path::Path;
use std::process::{Command, Output};

use caidgeo::report::Report;

fn caidgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caidgeo"))
        .args(args)
        .env_remove("CAIDGEO_LOG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn report_of(o: &Output) -> Report {
    Report::from_json(std::str::from_utf8(&o.stdout).unwrap()).expect("stdout is a report")
}

#[test]
fn identity_file_gives_ln2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.json", r#"{"version": 1, "kind": "classical", "matrix": [[1, 0], [0, 1]]}"#);
    let o = caidgeo(&["capacity", "--file", &f, "--json"]);
    assert_eq!(code(&o), 0);
    assert!((report_of(&o).capacity.capacity - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn malformed_file_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.json", "{\"version\": 1,\n  \"kind\": \"classical\",\n  \"matrix\": [[1, 0], [0 1]]\n}");
    let o = caidgeo(&["capacity", "--file", &f]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3, column"), "{err}");
}

#[test]
fn appendix_b_capacity_matches_closed_form() {
    let o = caidgeo(&["capacity", "--corpus", "appendix-b", "--json"]);
    assert_eq!(code(&o), 0);
    let eps = caidgeo::corpus::appendix_b_epsilon();
    assert!((eps - 0.45).abs() < 1e-2);
    assert!((report_of(&o).capacity.capacity - (1.0 - eps) * 5f64.ln()).abs() < 1e-9);
}

#[test]
fn unknown_corpus_exits_2_with_suggestions() {
    let o = caidgeo(&["constants", "--corpus", "nonesuch"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("identity-n") && err.contains("cq-commuting"), "{err}");
}

#[test]
fn corpus_listing() {
    let all = caidgeo(&["corpus"]);
    assert_eq!(code(&all), 0);
    assert_eq!(String::from_utf8_lossy(&all.stdout).lines().count(), 8);
    let q = caidgeo(&["corpus", "--quantum"]);
    assert_eq!(String::from_utf8_lossy(&q.stdout).lines().count(), 2);
}

#[test]
fn theorem1_constants_positive_on_corpus() {
    for name in ["identity-n", "bsc-p", "example-1", "appendix-b"] {
        let o = caidgeo(&["constants", "--corpus", name, "--theorem", "1", "--json"]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let t1 = report_of(&o).constants.unwrap().quadratic.unwrap();
        assert!(t1.gamma > 0.0 && t1.delta > 0.0, "{name}");
    }
    for name in ["cq-pure-pair", "cq-commuting"] {
        let o = caidgeo(&["constants", "--corpus", name, "--theorem", "3", "--json"]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let t1 = report_of(&o).constants.unwrap().quadratic.unwrap();
        assert!(t1.gamma > 0.0 && t1.delta > 0.0, "{name}");
    }
}

#[test]
fn appendix_b_theorem2_has_zero_linear_constant() {
    let o = caidgeo(&["constants", "--corpus", "appendix-b", "--theorem", "2", "--json"]);
    assert_eq!(code(&o), 0);
    let t2 = report_of(&o).constants.unwrap().decay.unwrap();
    assert_eq!(t2.gamma1.value, 0.0);
    assert!(t2.gamma2.unwrap().value > 0.0);
}

#[test]
fn zeta_theorem2_is_partial() {
    let o = caidgeo(&["constants", "--corpus", "zeta", "--n", "64", "--trunc", "1000", "--theorem", "2", "--json"]);
    assert_eq!(code(&o), 4);
    let k = report_of(&o).constants.unwrap();
    assert!(k.partial);
    assert!(k.a_coefficient.unwrap().lower_bound_only);
}

#[test]
fn certify_appendix_b_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = caidgeo(&[
        "certify",
        "--corpus",
        "ppv-counterexample",
        "--samples",
        "2000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("refuted true") && text.contains("v0"), "{text}");
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("distance,I,bound,margin"));
    assert_eq!(lines.count(), 2000);
    let r = Report::from_json(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r.certification.unwrap().violations, 0);
}

#[test]
fn certify_theorem2_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = caidgeo(&[
        "certify",
        "--corpus",
        "bsc-p",
        "--theorem",
        "2",
        "--samples",
        "500",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let curve = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(curve.starts_with("tau,I,lower,upper\n"));
    assert_eq!(curve.lines().count(), 22);
}

#[test]
fn reports_are_byte_identical_across_job_counts() {
    let run = |jobs: &str| {
        caidgeo(&[
            "certify", "--corpus", "example-1", "--samples", "3000", "--seed", "11", "--jobs", jobs, "--json",
        ])
        .stdout
    };
    let a = run("1");
    assert!(!a.is_empty());
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
}

#[test]
fn report_round_trips() {
    for args in [
        vec!["certify", "--corpus", "example-1", "--samples", "500", "--json"],
        vec!["certify", "--corpus", "cq-commuting", "--theorem", "4", "--samples", "500", "--json"],
        vec!["constants", "--corpus", "zeta", "--n", "20", "--trunc", "100", "--theorem", "2", "--json"],
    ] {
        let o = caidgeo(&args);
        let text = String::from_utf8(o.stdout).unwrap();
        let r = Report::from_json(&text).unwrap();
        assert_eq!(r.to_json(), text, "{args:?}");
    }
}

#[test]
fn classical_theorem_on_quantum_channel_is_rejected() {
    let o = caidgeo(&["constants", "--corpus", "cq-pure-pair", "--theorem", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn embedded_classical_channel_matches() {
    let c = report_of(&caidgeo(&["constants", "--corpus", "bsc-p", "--theorem", "2", "--json"]));
    let q = report_of(&caidgeo(&["constants", "--corpus", "bsc-p", "--theorem", "4", "--json"]));
    assert!(q.source.embedded);
    let (c2, q2) = (c.constants.unwrap().decay.unwrap(), q.constants.unwrap().decay.unwrap());
    assert!((c2.gamma2.unwrap().value - q2.gamma2.unwrap().value).abs() < 1e-9);
    assert!((c2.a_coeff.value - q2.a_coeff.value).abs() < 1e-9);
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(code(&caidgeo(&["constants", "--corpus", "bsc-p", "--theorem", "5"])), 2);
    assert_eq!(code(&caidgeo(&["capacity"])), 2);
    assert_eq!(code(&caidgeo(&["capacity", "--corpus", "bsc-p", "--tol", "-1"])), 2);
}

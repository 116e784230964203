use std::process::Command;

use nsym_cli::{cmd_check, CheckInput, Report, Source};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data");

fn data(rel: &str) -> String {
    format!("{DATA}/{rel}")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn report(&self) -> Report {
        Report::from_json(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn nsym_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nsym"));
    cmd.args(args).env_remove("NSYM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn nsym(args: &[&str]) -> Run {
    nsym_env(args, &[])
}

#[test]
fn verify_nls_generators() {
    let r = nsym(&["verify", &data("nls.nsym"), &data("generators/nls.nsym")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report();
    assert_eq!(rep.verdicts.len(), 5);
    assert!(rep.verdicts.iter().all(|v| v.passed && v.residuals.is_empty()));
    assert_eq!(rep.inputs.len(), 2);
    assert_eq!(rep.inputs[0].sha256.len(), 64);
}

#[test]
fn verify_reports_residual_of_a_non_symmetry() {
    let r = nsym(&["verify", &data("mkdv.nsym"), &data("generators/mkdv-perturbed.nsym")]);
    assert_eq!(r.code, 1);
    let rep = r.report();
    let dil = rep.verdicts.iter().find(|v| v.name == "dilation_u").unwrap();
    assert!(!dil.passed);
    assert_eq!(dil.residuals, vec!["2*u*u@(-x, -t)*D[u,x]".to_string()]);
}

#[test]
fn verify_needs_generators() {
    assert_eq!(nsym(&["verify", &data("nls.nsym")]).code, 2);
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.nsym");
    std::fs::write(&empty, "vars x, t;\ndeps q complex;\n").unwrap();
    let r = nsym(&["verify", &data("nls.nsym"), empty.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("no generators"));
}

#[test]
fn parse_errors_point_at_the_source() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nsym");
    std::fs::write(&bad, "vars x, t;\ndeps u;\neq e1: D[u,t] + * u = 0;\n").unwrap();
    let r = nsym(&["classify", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("3:"), "{}", r.stderr);
    assert!(r.stderr.contains('^'), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn classify_dimensions() {
    let dim = |args: &[&str]| {
        let r = nsym(args);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let rep = r.report();
        assert_eq!(rep.basis.len(), rep.dimension.unwrap());
        let n = rep.basis.len();
        assert_eq!(rep.brackets.len(), n * (n - 1) / 2);
        n
    };
    assert_eq!(dim(&["classify", &data("nls.nsym"), "--degree", "2"]), 7);
    assert_eq!(dim(&["classify", &data("nls-real.nsym"), "--real-fields"]), 4);
    assert_eq!(dim(&["classify", &data("nls.nsym"), "--realify", "--real-fields"]), 4);
    assert_eq!(dim(&["classify", &data("mkdv.nsym")]), 3);
}

#[test]
fn reduce_catalog_entries() {
    let r = nsym(&["reduce", "--entry", "mkdv-traveling-local"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out = r.report().output.unwrap();
    assert!(out.contains("integrate C1"), "{out}");
    assert!(out.contains("C1"));

    let r = nsym(&["reduce", "--entry", "nls-nonlocal-painleve"]);
    let rep = r.report();
    assert!(rep.passed);
    assert!(rep.verdicts[0].detail.as_deref().unwrap().starts_with("nonlocal"));

    let r = nsym(&["reduce", "--entry", "mkdv-painleve2"]);
    assert_eq!(r.code, 0);
    assert!(r.report().output.unwrap().contains("D[v,y,y]"));

    assert_eq!(nsym(&["reduce", "--entry", "no-such-entry"]).code, 2);
}

#[test]
fn reduce_from_files() {
    let r = nsym(&["reduce", &data("mkdv.nsym"), &data("reductions/mkdv-painleve2.nsym")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report().inputs.len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.nsym");
    let text = std::fs::read_to_string(data("reductions/mkdv-painleve2.nsym")).unwrap();
    std::fs::write(&spec, text.replace("multiplier: 1/cbrt(t);", "multiplier: 1;")).unwrap();
    let r = nsym(&["reduce", &data("mkdv.nsym"), spec.to_str().unwrap()]);
    assert_eq!(r.code, 2, "{}", r.stdout);
}

#[test]
fn check_solution_files() {
    let r = nsym(&["check", &data("solutions/nls-sn.nsym")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.report().residuals[0].max_rel < 1e-8);

    let r = nsym(&["check", &data("solutions/mkdv-traveling.nsym"), "--samples", "64", "--seed", "5"]);
    assert_eq!(r.code, 1);
    let rep = r.report();
    assert!(rep.residuals.iter().all(|row| row.samples == 64));
    let off = rep.residuals.iter().find(|row| row.case == "exponential-off-constraint").unwrap();
    assert!(off.max_rel > 1e-3);
    let soliton = rep.verdicts.iter().find(|v| v.name == "soliton").unwrap();
    assert!(soliton.passed);
}

#[test]
fn check_quadrature_and_domain_errors() {
    let r = nsym(&["check", "--quadrature", "1,1,0,1", "--samples", "16"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = nsym(&["check", "--quadrature", "1,-1,0,1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("b > 0"), "{}", r.stderr);
    assert_eq!(nsym(&["check", "--quadrature", "1,1"]).code, 2);
}

fn transform(args: &[&str]) -> Report {
    let r = nsym(args);
    assert_eq!(r.code, 0, "{:?}: {}", args, r.stderr);
    let rep = r.report();
    assert!(rep.passed && !rep.verdicts.is_empty());
    rep
}

#[test]
fn transform_matches_expected_files() {
    transform(&["transform", &data("nls.nsym"), "--exp", "x", "--expect", &data("dde/nls-dde.nsym")]);
    transform(&["transform", &data("mkdv.nsym"), "--exp", "x,t", "--expect", &data("dde/mkdv-dde.nsym")]);
    transform(&["transform", &data("dde/traveling.nsym"), "--exp", "y", "--expect", &data("dde/traveling-dde.nsym")]);
    transform(&[
        "transform",
        &data("dde/traveling-dde.nsym"),
        "--rescale",
        "y=i*pi",
        "--expect",
        &data("dde/traveling-dde-rescaled.nsym"),
    ]);
    transform(&["transform", &data("dde/nls-dde.nsym"), "--rescale", "x=i*pi", "--expect", &data("dde/nls-dde-rescaled.nsym")]);
    let rep = transform(&[
        "transform",
        &data("nls.nsym"),
        "--exp",
        "x",
        "--rescale",
        "x=i*pi",
        "--expect",
        &data("dde/nls-dde-rescaled.nsym"),
    ]);
    assert!(rep.output.unwrap().contains("@(1 + x, t)"));
}

#[test]
fn transform_mismatch_and_errors() {
    let r = nsym(&["transform", &data("nls.nsym"), "--exp", "x", "--expect", &data("dde/nls-dde-rescaled.nsym")]);
    assert_eq!(r.code, 1);
    assert_eq!(nsym(&["transform", &data("nls.nsym"), "--rescale", "x=0"]).code, 2);
    assert_eq!(nsym(&["transform", &data("nls.nsym"), "--exp", "z"]).code, 2);
    let r = nsym(&["transform", &data("nls.nsym"), "--rescale", "x=i", "--rescale", "t=-1", "--conj", "schwarz"]);
    assert_eq!(r.code, 0);
    assert!(!r.report().output.unwrap().contains('@'));
}

#[test]
fn reports_are_deterministic() {
    let args = ["check", &data("solutions/mkdv-traveling.nsym"), "--seed", "3", "--no-timing"];
    let a = nsym(&args);
    let b = nsym_env(&args, &[("NSYM_THREADS", "1")]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.report().seed, 3);
    assert_eq!(a.report().wall_time_ms, 0);
    let c = nsym(&["check", &data("solutions/mkdv-traveling.nsym"), "--seed", "4", "--no-timing"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn thread_count_must_be_positive() {
    let r = nsym_env(&["reduce", "--entry", "mkdv-painleve2"], &[("NSYM_THREADS", "0")]);
    assert_eq!(r.code, 2);
}

#[test]
fn out_file_and_schema_version() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let r = nsym(&["reduce", "--entry", "mkdv-painleve2", "--out", path.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["command"], "reduce");
}

#[test]
fn report_json_round_trips() {
    let src = Source::read(&data("solutions/mkdv-traveling.nsym")).unwrap();
    let rep = cmd_check(CheckInput::File(&src), Some(32), 9).unwrap();
    assert_eq!(Report::from_json(&rep.to_json()).unwrap(), rep);
    let r = nsym(&["classify", &data("mkdv.nsym")]).report();
    assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
}

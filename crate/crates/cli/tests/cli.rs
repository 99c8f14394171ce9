use std::path::PathBuf;
use std::process::{Command, Output};

use courant_cli::config::{parse_config, print_config, Config};
use courant_core::fixtures;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn courant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_courant")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = courant(&all);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (v, out.status.code().unwrap())
}

fn check<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn fixture_files_match_core_fixtures() {
    let pairs = [
        ("fixture_a.toml", fixtures::fixture_a()),
        ("fixture_a3.toml", fixtures::fixture_a3()),
        ("fixture_b.toml", fixtures::fixture_b()),
        ("fixture_c.toml", fixtures::fixture_c()),
        ("fixture_c_without_h.toml", fixtures::fixture_c_without_h()),
        ("fixture_d.toml", fixtures::fixture_d()),
        ("fixture_d4.toml", fixtures::fixture_d4()),
        ("line_field.toml", fixtures::line_field()),
        ("su2_plus_line.toml", fixtures::su2_plus_line()),
    ];
    for (file, q) in pairs {
        let cfg = parse_config(&fixture(file)).unwrap();
        assert_eq!(cfg.quintuple().unwrap(), q, "{file}");
        let text = std::fs::read_to_string(fixture(file)).unwrap();
        assert_eq!(print_config(&cfg), text, "{file} is not canonical");
    }
}

#[test]
fn fixture_d_reads_with_expected_shape() {
    let cfg: Config = parse_config(&fixture("fixture_d.toml")).unwrap();
    assert_eq!((cfg.n(), cfg.p(), cfg.m()), (2, 2, 3));
}

#[test]
fn check_fixture_c_passes() {
    let (v, code) = json(&["check", fixture("fixture_c.toml").to_str().unwrap(), "--degree", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["exit"], 0);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass" && c["witness"].is_null()));
}

#[test]
fn check_without_h_reports_pontryagin_witness() {
    let (v, code) = json(&["check", fixture("fixture_c_without_h.toml").to_str().unwrap(), "--degree", "0"]);
    assert_eq!(code, 1);
    assert_eq!(v["exit"], 1);
    let c = check(&v, "dF_H_equals_RR");
    assert_eq!(c["status"], "fail");
    assert_eq!(c["witness"]["identity"], "dF_H_equals_RR");
    assert_eq!(c["witness"]["indices"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(c["witness"]["residual"], "2");
}

#[test]
fn text_mode_lists_pass_lines() {
    let out = courant(&["roundtrip", fixture("fixture_d.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "PASS roundtrip\n");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let path = fixture("fixture_d.toml");
    let args = ["naive", path.to_str().unwrap(), "--seed", "3", "--format", "json"];
    let a = courant(&args);
    let b = courant(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("courant-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let d = std::fs::read_to_string(fixture("fixture_d.toml")).unwrap();

    let bad_var = dir.join("bad_var.toml");
    std::fs::write(&bad_var, d.replace("R.1.2.3 = \"1\"", "R.1.2.3 = \"x3\"")).unwrap();
    let out = courant(&["check", bad_var.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("curvature.R.1.2.3"));

    let diagonal = dir.join("diagonal.toml");
    std::fs::write(&diagonal, d.replace("R.1.2.3 = \"1\"", "R.1.1.3 = \"1\"")).unwrap();
    assert_eq!(courant(&["check", diagonal.to_str().unwrap()]).status.code(), Some(2));

    let syntax = dir.join("syntax.toml");
    std::fs::write(&syntax, "[base]\nn = \n").unwrap();
    let out = courant(&["check", syntax.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(courant(&["check", dir.join("missing.toml").to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(courant(&["transport", fixture("fixture_d.toml").to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn charform_and_pontryagin_on_fixture_c() {
    let out = courant(&["charform", fixture("fixture_c.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("PASS closed\n"), "{text}");
    // C^s restricted to leaves is H.
    assert!(text.contains("[3,4,5] = 2*x1"), "{text}");

    let out = courant(&["pontryagin", fixture("fixture_c.toml").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[1,2,3,4] = 2"), "{text}");
}

#[test]
fn chernweil_compares_three_connections() {
    let (v, code) = json(&["chernweil", fixture("fixture_c.toml").to_str().unwrap(), "--seed", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn transport_shift_and_build() {
    let (v, code) = json(&["transport", fixture("fixture_d_iso.toml").to_str().unwrap(), "--degree", "1"]);
    assert_eq!(code, 0, "{v}");
    check(&v, "coboundary_identity");
    check(&v, "intertwines_dorfman");

    for (file, kind) in [
        ("fixture_d_hoist.toml", "hoist"),
        ("fixture_c_omega.toml", "omega"),
        ("su2_plus_line_central.toml", "central"),
    ] {
        let (v, code) = json(&["shift", fixture(file).to_str().unwrap(), "--kind", kind, "--degree", "1"]);
        assert_eq!(code, 0, "{kind}: {v}");
        assert_eq!(check(&v, "transport_matches_target")["status"], "pass");
    }

    let (v, code) = json(&["shift", fixture("fixture_d_hoist.toml").to_str().unwrap(), "--kind", "central"]);
    assert_eq!(code, 1);
    assert_eq!(check(&v, "J_central")["status"], "fail");

    let (v, code) = json(&["build", fixture("fixture_d.toml").to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    // C^s is coherent only for hoists that keep the connection; J above does not.
    let (v, code) = json(&["build", fixture("fixture_d_hoist.toml").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(check(&v, "coherent_mixed")["status"], "fail");
}

#[test]
fn built_config_reparses() {
    let out =
        courant(&["shift", fixture("fixture_c_omega.toml").to_str().unwrap(), "--kind", "omega", "--degree", "0"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let body = text.split("# target config\n").nth(1).expect("artifact present");
    let cfg = courant_cli::config::parse_str(body).unwrap();
    // H + d omega with omega = x2 dx1^dx3.
    assert_eq!(cfg.hform.get(&[0, 1, 2]).to_string(), "-1");
    assert_eq!(print_config(&cfg), body);
}

#[test]
fn coherent_finds_hoist_or_reports_obstruction() {
    let (v, code) = json(&["coherent", fixture("fixture_d_cform.toml").to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(check(&v, "find_hoist")["status"], "pass");

    let (v, code) = json(&["coherent", fixture("fixture_d_cform_open.toml").to_str().unwrap()]);
    assert_eq!(code, 1);
    let w = &check(&v, "find_hoist")["witness"];
    assert_eq!(w["identity"], "closed");
    assert_eq!(w["indices"], serde_json::json!([2, 3, 4, 5]));
}

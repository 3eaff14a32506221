mod common;

use std::process::{Command, Output};

use common::{parse_decimal, q};

fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}.sys", env!("CARGO_MANIFEST_DIR"))
}

fn semiroot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiroot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn json_box_encloses_the_root() {
    let out = semiroot(&["--json", &fixture_path("six_intersections")]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let boxes = doc["boxes"].as_array().unwrap();
    assert_eq!(boxes.len(), 1);
    assert_eq!(boxes[0]["certificate"], "krawczyk-unique");
    assert_eq!(doc["metadata"]["isolated"], 6);
    for (iv, root) in boxes[0]["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .zip([0.5605887445123685, 0.376338245290941])
    {
        let lo = parse_decimal(iv[0].as_str().unwrap());
        let hi = parse_decimal(iv[1].as_str().unwrap());
        assert!(lo <= q(root) && q(root) <= hi, "{iv}");
    }
}

#[test]
fn text_output_lists_boxes_and_removals() {
    let out = semiroot(&[&fixture_path("sign_zero")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("boxes: 1"));
    assert!(text.contains("CertifiedZero"));
    assert!(text.contains("x in ["));
}

#[test]
fn digits_control_printed_precision() {
    let out = semiroot(&["--json", "--digits", "4", &fixture_path("sign_zero")]);
    let doc = json(&out);
    for iv in doc["boxes"][0]["intervals"].as_array().unwrap() {
        for s in iv.as_array().unwrap() {
            let mant = s.as_str().unwrap().split('e').next().unwrap();
            assert!(mant.chars().filter(char::is_ascii_digit).count() <= 4, "{s}");
        }
    }
}

#[test]
fn seed_and_tau_flags_reach_the_solver() {
    let doc = json(&semiroot(&[
        "--json",
        "--seed",
        "42",
        "--tau",
        "1e-10",
        &fixture_path("sign_zero"),
    ]));
    assert_eq!(doc["metadata"]["seed"], 42);
    assert_eq!(doc["metadata"]["tau"], 1e-10);
}

#[test]
fn no_surviving_box_exits_one() {
    let out = semiroot(&[&fixture_path("a3")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(semiroot(&["/nonexistent/file.sys"]).status.code(), Some(2));
    assert_eq!(
        semiroot(&["--digits", "0", &fixture_path("sign_zero")]).status.code(),
        Some(2)
    );
    let dir = std::env::temp_dir().join(format!("semiroot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.sys");
    std::fs::write(&bad, "vars: x\neq:\n  x^2 - 2 +\n").unwrap();
    let out = semiroot(&[bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn polynomial_file_forced_through_transcend_is_rejected() {
    let out = semiroot(&["--pipeline", "transcend", &fixture_path("sign_zero")]);
    assert_eq!(out.status.code(), Some(2));
}

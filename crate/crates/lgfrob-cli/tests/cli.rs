use std::path::PathBuf;
use std::process::{Command, Output};

use lgfrob::oracle::kontsevich_nd;
use lgfrob::rational::parse_q;
use lgfrob::Q;
use serde_json::Value;

fn lgfrob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgfrob"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Compares stdout with a golden file; `LGFROB_BLESS=1` rewrites it.
fn assert_golden(args: &[&str], name: &str, code: i32) {
    let out = lgfrob(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = golden(name);
    if std::env::var_os("LGFROB_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        expected,
        "golden {name}"
    );
}

#[test]
fn analyze_circle() {
    assert_golden(&["analyze", "-n", "1", "u1+u1^-1"], "analyze_circle.txt", 0);
}

#[test]
fn analyze_plane_json() {
    assert_golden(
        &["analyze", "-n", "2", "u1+u2+u1^-1*u2^-1", "--json"],
        "analyze_p2.json",
        0,
    );
}

#[test]
fn not_convenient_is_a_precondition_error() {
    assert_golden(
        &["analyze", "-n", "2", "u1+u2", "--json"],
        "not_convenient.json",
        3,
    );
    let out = lgfrob(&["analyze", "-n", "2", "u1+u2"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not convenient"));
}

#[test]
fn degenerate_is_a_precondition_error() {
    // the edge part (u1 + u2)^2 vanishes with its derivatives at u1 = -u2
    let out = lgfrob(&[
        "analyze",
        "-n",
        "2",
        "u1^2 + 2*u1*u2 + u2^2 + u1^-1*u2^-1",
        "--json",
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(3), "{v}");
    assert_eq!(v["error"]["kind"], "precondition");
}

#[test]
fn input_errors() {
    let out = lgfrob(&["analyze", "-n", "1", "u1 + *", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "parse");
    let out = lgfrob(&["analyze", "-n", "1", "u1 + u2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn structure_of_the_circle() {
    assert_golden(
        &["structure", "-n", "1", "u1+u1^-1", "--deform", "good-max"],
        "structure_circle.txt",
        0,
    );
}

#[test]
fn structure_json_is_stable() {
    let args = ["structure", "-n", "1", "u1^2+u1^-2", "--json"];
    assert_golden(&args, "structure_quartic.json", 0);
    assert_eq!(lgfrob(&args).stdout, lgfrob(&args).stdout);
}

#[test]
fn explicit_deformation_list() {
    let out = lgfrob(&[
        "structure",
        "-n",
        "1",
        "u1^2+u1^-2",
        "--deform",
        "1, u1 + u1^-1, u1 - u1^-1",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["deformation"]["maximal"], true);
    assert_eq!(v["deformation"]["good"], false);
    let out = lgfrob(&["structure", "-n", "1", "u1^2+u1^-2", "--deform", "u1^2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn spectrum_of_the_plane() {
    assert_golden(
        &["spectrum", "-n", "2", "u1+u2+u1^-1*u2^-1"],
        "spectrum_p2.txt",
        0,
    );
}

#[test]
fn potential_of_the_line() {
    assert_golden(&["potential", "-n", "1", "u1+u1^-1"], "potential_p1.txt", 0);
}

fn coefficient(v: &Value, exp: &[i64]) -> Q {
    for term in v["potential"].as_array().unwrap() {
        let e: Vec<i64> = term[0]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_i64().unwrap())
            .collect();
        if e == exp {
            return parse_q(term[1].as_str().unwrap()).unwrap();
        }
    }
    Q::from_integer(0.into())
}

#[test]
fn potential_of_the_plane_counts_curves() {
    let out = lgfrob(&[
        "potential",
        "-n",
        "2",
        "u1+u2+u1^-1*u2^-1",
        "--order",
        "6",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for d in 1..=3i64 {
        let k = 3 * d - 1;
        let fact: i64 = (1..=k).product();
        let nd = kontsevich_nd(d).unwrap();
        let lin =
            coefficient(&v, &[0, 1, k]) * Q::from_integer(fact.into()) / Q::from_integer(d.into());
        assert_eq!(lin, Q::from_integer(nd));
    }
    for c in v["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], true, "{c}");
    }
}

#[test]
fn structure_document_feeds_later_stages() {
    let out = lgfrob(&["structure", "-n", "2", "u1+u2+u1^-1*u2^-1", "--json"]);
    let dir = std::env::temp_dir().join(format!("lgfrob-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("p2.json");
    std::fs::write(&file, &out.stdout).unwrap();
    let from_file = lgfrob(&["potential", "--structure", file.to_str().unwrap(), "--json"]);
    let direct = lgfrob(&["potential", "-n", "2", "u1+u2+u1^-1*u2^-1", "--json"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, direct.stdout);
    std::fs::write(&file, "{ \"n\": 2 }").unwrap();
    let bad = lgfrob(&["deform", "--structure", file.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn deform_reports_relations() {
    let out = lgfrob(&["deform", "-n", "1", "u1^2+u1^-2", "--order", "4", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["variables"].as_array().unwrap().len(), 4);
    assert!(v["relations"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn verify_positive_control() {
    let out = lgfrob(&["verify", "-n", "1", "u1+u1^-1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("all checks passed\n"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_flags_a_tampered_structure() {
    let out = lgfrob(&["structure", "-n", "1", "u1+u1^-1", "--json"]);
    let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["Binf"][0][0] = Value::String("1/3".into());
    let dir = std::env::temp_dir().join(format!("lgfrob-cli-t{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.json");
    std::fs::write(&file, v.to_string()).unwrap();
    let out = lgfrob(&["verify", "--structure", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
    std::fs::remove_dir_all(&dir).unwrap();
}

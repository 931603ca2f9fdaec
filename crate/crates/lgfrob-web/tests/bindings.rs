use lgfrob_web::{analyze, potential, structure, MAX_ORDER};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn analyze_circle() {
    let v = parse(analyze("u1 + u1^-1", 1));
    assert_eq!(v["mu"], 2);
    assert_eq!(v["spectrum"], serde_json::json!(["0", "1"]));
}

#[test]
fn errors_are_documents() {
    let v = parse(analyze("u1 + u2", 2));
    assert_eq!(v["error"]["kind"], "precondition");
    let v = parse(potential("u1 + u1^-1", 1, MAX_ORDER + 1));
    assert_eq!(v["error"]["kind"], "input");
}

#[test]
fn structure_relations_pass() {
    let v = parse(structure("u1^2 + u1^-2", 1));
    assert_eq!(v["mu"], 4);
    assert!(v["relations"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn plane_potential() {
    let v = parse(potential("u1 + u2 + u1^-1*u2^-1", 2, 6));
    let terms = v["potential"].as_array().unwrap();
    // t2^8 carries N_3 / 8! = 12 / 40320
    assert!(terms
        .iter()
        .any(|t| t[0] == serde_json::json!([0, 0, 8]) && t[1] == "1/3360"));
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

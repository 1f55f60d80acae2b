// SPDX-License-Identifier: Apache-2.0

use qlc_demo::*;
use serde_json::{json, Value};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn compiles_bell_with_the_example_config() {
    let v = parse(compile_source(
        &example_source("bell"),
        &example_config(),
        "decompose,optimize,schedule",
        "alap",
        false,
    ));
    assert!(v["cqasm"].as_str().unwrap().contains("cz q[0],q[1]"));
    assert!(v["timing"].as_str().unwrap().starts_with("kernel\t"));
}

#[test]
fn compile_errors_are_reported_inline() {
    let v = parse(compile_source(
        "version 1.0\nqubits 1\n  bogus q[0]\n",
        "",
        "",
        "alap",
        false,
    ));
    assert!(v["error"].as_str().unwrap().contains("bogus"));
    let v = parse(compile_source(
        &example_source("bell"),
        "",
        "schedule",
        "sideways",
        false,
    ));
    assert!(v.get("error").is_some());
}

#[test]
fn qsd_counts_match_closed_form() {
    for n in 1..=3 {
        let v = parse(qsd_random(n, 7));
        assert_eq!(v["rotations"], v["expected_rotations"]);
        assert_eq!(v["cnots"], v["expected_cnots"]);
        assert!(v["distance"].as_f64().unwrap() < 1e-8);
    }
    assert!(parse(qsd_random(9, 0)).get("error").is_some());
}

#[test]
fn routing_is_verified_on_small_topologies() {
    let src = "version 1.0\nqubits 4\n.k\n    cnot q[0],q[3]\n    cz q[1],q[3]\n    h q[2]\n    cnot q[2],q[0]\n";
    for shape in ["line", "ring", "grid"] {
        let v = parse(route_source(src, shape, 4));
        assert_eq!(v["verified"], json!(true), "{shape}: {v}");
    }
    assert!(parse(route_source(src, "torus", 4)).get("error").is_some());
}

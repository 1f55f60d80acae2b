// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use qlc_core::emit::{parse_cqasm, TimingTrace};
use qlc_core::examples::{bell, builtin, grover_3q, BUILTIN_NAMES};
use qlc_core::ir::{circuit_unitary, Gate, Kernel, Program, UnitaryMatrix};
use qlc_core::optimize::unitary_distance;
use qlc_core::pipeline::{compile, program_compile, CompileOptions, Pass};
use qlc_core::platform::{example_platform, Platform, EXAMPLE_CONFIG};

#[test]
fn bell_matches_scheduled_golden() {
    let out = program_compile(&bell(), true, "alap").unwrap();
    assert_eq!(out.cqasm, include_str!("golden/bell.alap.cq"));
}

#[test]
fn grover_without_transforming_passes_matches_golden() {
    let opts = CompileOptions::with_passes(&[Pass::Schedule]);
    let out = compile(&grover_3q(), None, &opts).unwrap();
    assert_eq!(out.cqasm, include_str!("golden/grover-3q.alap.cq"));
    let bare = compile(&grover_3q(), None, &CompileOptions::with_passes(&[])).unwrap();
    assert_eq!(bare.cqasm, include_str!("golden/grover-3q.cq"));
}

#[test]
fn every_builtin_compiles_on_the_example_platform() {
    let platform = example_platform();
    for name in BUILTIN_NAMES {
        let program = builtin(name).unwrap();
        let out = compile(&program, Some(&platform), &CompileOptions::default()).unwrap();
        let trace: &TimingTrace = out.timing.as_ref().unwrap();
        assert!(!trace.records.is_empty(), "{name}");
        assert!(
            trace.records.iter().all(|r| r.compensated_ns >= 0),
            "{name}"
        );
        assert_eq!(out.reports.len(), 4, "{name}");
    }
}

#[test]
fn unknown_schedule_name_is_a_schedule_error() {
    let err = program_compile(&bell(), true, "sideways").unwrap_err();
    assert_eq!(err.code(), "SCHEDULE-UnknownMode");
}

#[test]
fn emitted_program_parses_back_to_the_same_unitary() {
    let mut program = Program::new("mix", 3, None);
    let mut k = Kernel::new("k", 3);
    k.hadamard(0)
        .unwrap()
        .cnot(0, 1)
        .unwrap()
        .rz(2, 0.3)
        .unwrap()
        .toffoli(0, 1, 2)
        .unwrap();
    program.add_kernel(k).unwrap();
    let out = program_compile(&program, true, "asap").unwrap();
    let parsed = parse_cqasm(&out.cqasm, "mix", None).unwrap();
    let original = circuit_unitary(program.kernels()[0].gates(), 3).unwrap();
    let compiled = circuit_unitary(parsed.kernels()[0].gates(), 3).unwrap();
    assert!(unitary_distance(&original, &compiled).unwrap() < 1e-9);
}

#[test]
fn custom_two_qubit_matrix_is_lowered_by_qsd() {
    let iswap = {
        use num_complex::Complex64 as C;
        let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
        UnitaryMatrix::from_rows(&[&[o, z, z, z], &[z, z, i, z], &[z, i, z, z], &[z, z, z, o]])
            .unwrap()
    };
    let mut program = Program::new("iswap", 2, None);
    let gate = Gate::custom("iswap", &[0, 1], Some(Arc::new(iswap.clone()))).unwrap();
    program
        .add_kernel(Kernel::with_gates("k", 2, vec![gate.clone()]).unwrap())
        .unwrap();
    let opts = CompileOptions::with_passes(&[Pass::Decompose]);
    let out = compile(&program, None, &opts).unwrap();
    let lowered = out.program.kernels()[0].gates();
    assert!(lowered
        .iter()
        .all(|g| ["ry", "rz", "cnot"].contains(&g.name.as_str())));
    let want = circuit_unitary(&[gate], 2).unwrap();
    let got = circuit_unitary(lowered, 2).unwrap();
    assert!(unitary_distance(&want, &got).unwrap() < 1e-9);
}

fn with_topology(edges: &[[usize; 2]], n: usize) -> Platform {
    let mut doc: serde_json::Value = serde_json::from_str(EXAMPLE_CONFIG).unwrap();
    doc["topology"] = serde_json::json!({ "qubit_count": n, "edges": edges });
    Platform::load("mapped", &doc.to_string()).unwrap()
}

#[test]
fn mapping_makes_two_qubit_gates_adjacent() {
    let platform = with_topology(&[[0, 1], [1, 2], [2, 3], [3, 4]], 5);
    let topology = platform.topology.clone().unwrap();
    let mut program = Program::new("far", 5, Some(Arc::new(platform.clone())));
    let mut k = Kernel::new("k", 5);
    k.cz(0, 4)
        .unwrap()
        .cz(1, 3)
        .unwrap()
        .cz(0, 2)
        .unwrap()
        .cz(4, 1)
        .unwrap();
    program.add_kernel(k).unwrap();
    let opts = CompileOptions::with_passes(&[Pass::Map, Pass::Schedule]);
    let out = compile(&program, Some(&platform), &opts).unwrap();
    for g in out.program.kernels()[0].gates() {
        if let [a, b] = g.operands[..] {
            assert!(topology.is_edge(a, b), "{g}");
        }
    }
    assert!(out.mapping.is_some());
}

#[test]
fn disconnected_topology_is_reported() {
    let platform = with_topology(&[[0, 1], [2, 3]], 4);
    let mut program = Program::new("split", 4, None);
    let mut k = Kernel::new("k", 4);
    k.cz(0, 3).unwrap().cz(1, 2).unwrap().cz(0, 2).unwrap();
    program.add_kernel(k).unwrap();
    let opts = CompileOptions::with_passes(&[Pass::Map]);
    let err = compile(&program, Some(&platform), &opts).unwrap_err();
    assert_eq!(err.code(), "MAP-DisconnectedTopology");
}

#[test]
fn map_without_topology_is_skipped() {
    let out = compile(
        &bell(),
        Some(&example_platform()),
        &CompileOptions::default(),
    )
    .unwrap();
    let map = out.reports.iter().find(|r| r.pass == Pass::Map).unwrap();
    assert!(map.note.contains("no topology"));
}

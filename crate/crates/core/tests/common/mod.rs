// SPDX-License-Identifier: Apache-2.0

//! Random circuit generators and independent checkers shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qlc_core::ir::{Gate, UnitaryMatrix};
use qlc_core::platform::Platform;
use qlc_core::schedule::Schedule;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const ONE_QUBIT: &[&str] = &["h", "x", "y", "z", "s", "sdag", "t", "tdag", "x90", "my90"];
pub const ROTATIONS: &[&str] = &["rx", "ry", "rz"];
pub const TWO_QUBIT: &[&str] = &["cnot", "cz", "swap"];

/// Distinct random qubits out of `0..n`.
pub fn pick_qubits<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let all: Vec<usize> = (0..n).collect();
    all.choose_multiple(rng, k).copied().collect()
}

pub fn random_one_qubit<R: Rng>(rng: &mut R, q: usize) -> Gate {
    if rng.random_bool(0.3) {
        let name = ROTATIONS.choose(rng).unwrap();
        Gate::new(name, &[q], Some(rng.random_range(-PI..PI))).unwrap()
    } else {
        Gate::simple(ONE_QUBIT.choose(rng).unwrap(), &[q])
    }
}

/// Random unitary circuit of one- and two-qubit gates on `n ≥ 2` qubits.
pub fn random_circuit<R: Rng>(
    rng: &mut R,
    n: usize,
    len: usize,
    two_qubit_ratio: f64,
) -> Vec<Gate> {
    (0..len)
        .map(|_| {
            if n >= 2 && rng.random_bool(two_qubit_ratio) {
                let qs = pick_qubits(rng, n, 2);
                if rng.random_bool(0.15) {
                    Gate::new("crz", &qs, Some(rng.random_range(-PI..PI))).unwrap()
                } else {
                    Gate::simple(TWO_QUBIT.choose(rng).unwrap(), &qs)
                }
            } else {
                let q = rng.random_range(0..n);
                random_one_qubit(rng, q)
            }
        })
        .collect()
}

/// Matrix of `u` (on `target`) controlled by every qubit in `controls`,
/// over `n` qubits with qubit `q` as bit `q` of the basis index.
pub fn multi_controlled_matrix(
    u: &UnitaryMatrix,
    controls: &[usize],
    target: usize,
    n: usize,
) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let on = controls.iter().all(|&c| (col >> c) & 1 == 1);
        if !on {
            m[(col, col)] = Complex64::new(1.0, 0.0);
            continue;
        }
        let bit = (col >> target) & 1;
        for out in 0..2 {
            let row = (col & !(1 << target)) | (out << target);
            m[(row, col)] = u.get(out, bit);
        }
    }
    m
}

/// Phase-aligned distance between the columns of `a` and `b` listed in
/// `cols`, normalized like the full-matrix distance.
pub fn column_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, cols: &[usize]) -> f64 {
    let mut overlap = Complex64::new(0.0, 0.0);
    for &c in cols {
        for r in 0..a.nrows() {
            overlap += b[(r, c)].conj() * a[(r, c)];
        }
    }
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut diff = 0.0;
    for &c in cols {
        for r in 0..a.nrows() {
            diff += (a[(r, c)] - b[(r, c)] * phase).norm_sqr();
        }
    }
    (diff / (2.0 * cols.len() as f64)).sqrt()
}

/// Basis columns where every qubit in `zeros` is `|0⟩`.
pub fn columns_with_zero(n: usize, zeros: &[usize]) -> Vec<usize> {
    (0..1usize << n)
        .filter(|c| zeros.iter().all(|&z| (c >> z) & 1 == 0))
        .collect()
}

/// Config document with per-gate durations (ns), types and resources.
pub fn platform_json(
    cycle_ns: u64,
    instr: &[(&str, u64, &str)],
    resources: &[(&str, u32, &[&str])],
    buffers: &[(&str, u64)],
) -> String {
    let mut hw = format!(r#""qubit_number": 8, "cycle_time": {cycle_ns}"#);
    for (k, v) in buffers {
        hw.push_str(&format!(r#", "{k}": {v}"#));
    }
    let instructions: Vec<String> = instr
        .iter()
        .map(|(name, d, kind)| {
            format!(
                r#""{name}": {{ "duration": {d}, "latency": 0, "qubits": [], "type": "{kind}" }}"#
            )
        })
        .collect();
    let res: Vec<String> = resources
        .iter()
        .map(|(name, count, types)| {
            let ts: Vec<String> = types.iter().map(|t| format!("\"{t}\"")).collect();
            format!(
                r#""{name}": {{ "count": {count}, "types": [{}] }}"#,
                ts.join(", ")
            )
        })
        .collect();
    format!(
        r#"{{ "eqasm_compiler": "none", "hardware_settings": {{ {hw} }}, "instructions": {{ {} }}, "gate_decomposition": {{}}, "resources": {{ {} }} }}"#,
        instructions.join(", "),
        res.join(", ")
    )
}

/// Platform giving every test gate name a random duration and type.
pub fn random_platform<R: Rng>(rng: &mut R, resources: bool) -> Platform {
    let kinds = ["mw", "flux", "readout"];
    let names: Vec<&str> = ONE_QUBIT
        .iter()
        .chain(ROTATIONS)
        .chain(TWO_QUBIT)
        .chain(&["crz", "measure"])
        .copied()
        .collect();
    let cycle = rng.random_range(1..=20u64);
    let instr: Vec<(&str, u64, &str)> = names
        .iter()
        .map(|&n| {
            let kind = if n == "measure" {
                "readout"
            } else if TWO_QUBIT.contains(&n) || n == "crz" {
                "flux"
            } else {
                *kinds[..2].choose(rng).unwrap()
            };
            (n, rng.random_range(1..=120u64), kind)
        })
        .collect();
    let buffers = [
        ("mw_mw_buffer", rng.random_range(0..=30u64)),
        ("mw_flux_buffer", rng.random_range(0..=30u64)),
    ];
    let mut res: Vec<(&str, u32, &[&str])> = Vec::new();
    if resources {
        res.push(("awg", rng.random_range(1..=3), &["mw"]));
        res.push(("flux_ctl", rng.random_range(1..=2), &["flux"]));
        if rng.random_bool(0.5) {
            res.push(("adc", 1, &["readout"]));
        }
    }
    Platform::load("random", &platform_json(cycle, &instr, &res, &buffers)).unwrap()
}

/// Violations of `start(b) ≥ start(a) + dur(a)` for any later gate `b`
/// sharing a qubit with `a` (buffers ignored, so this is a lower bound).
pub fn dependency_violations(s: &Schedule) -> usize {
    let mut bad = 0;
    for (i, a) in s.entries.iter().enumerate() {
        for b in &s.entries[i + 1..] {
            let shares = a.gate.operands.iter().any(|q| b.gate.operands.contains(q));
            if shares && b.start < a.start + a.duration {
                bad += 1;
            }
        }
    }
    bad
}

/// Cycles in which some resource is over-subscribed, found by summing the
/// claims of every gate active in each cycle.
pub fn resource_violations(s: &Schedule, platform: &Platform) -> usize {
    let mut usage: BTreeMap<(String, u32), u32> = BTreeMap::new();
    for e in &s.entries {
        for c in platform.resource_claims(&e.gate) {
            for t in e.start..e.start + e.duration {
                *usage.entry((c.resource.clone(), t)).or_default() += c.units;
            }
        }
    }
    usage
        .iter()
        .filter(|((r, _), &u)| u > platform.resources.capacity(r))
        .count()
}

// SPDX-License-Identifier: Apache-2.0

//! Browser bindings for the qlc compiler. Every export takes and returns
//! plain strings; results are JSON objects with either the payload or an
//! `error` field, so the page never has to catch exceptions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qlc_core::decompose::{
    qsd_cnot_count, qsd_decompose, qsd_rotation_count, random_unitary, MAX_QSD_QUBITS,
};
use qlc_core::emit::parse_cqasm;
use qlc_core::examples::builtin;
use qlc_core::ir::circuit_unitary;
use qlc_core::map::{initial_placement, route, PlacementBudget};
use qlc_core::optimize::unitary_distance;
use qlc_core::pipeline::{compile, CompileOptions, Pass};
use qlc_core::platform::{example_platform, Platform, Topology, EXAMPLE_CONFIG};
use qlc_core::sim::equivalent_up_to_permutation;

const DEMO_QSD_LIMIT: usize = 5;

fn respond(result: Result<Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[wasm_bindgen]
pub fn example_config() -> String {
    EXAMPLE_CONFIG.to_string()
}

#[wasm_bindgen]
pub fn example_source(name: &str) -> String {
    builtin(name)
        .map(|p| qlc_core::emit::emit_cqasm(&p, None))
        .unwrap_or_default()
}

/// Compiles cQASM `source`. An empty `config` compiles without a platform.
/// `passes` is a comma-separated list such as `decompose,optimize,schedule`.
#[wasm_bindgen]
pub fn compile_source(
    source: &str,
    config: &str,
    passes: &str,
    schedule: &str,
    resource_constrained: bool,
) -> String {
    respond(compile_value(
        source,
        config,
        passes,
        schedule,
        resource_constrained,
    ))
}

fn compile_value(
    source: &str,
    config: &str,
    passes: &str,
    schedule: &str,
    rc: bool,
) -> Result<Value, String> {
    let platform = match config.trim() {
        "" => None,
        text => Some(Platform::load("demo", text).map_err(err)?),
    };
    let program = parse_cqasm(source, "demo", platform.as_ref()).map_err(err)?;
    let passes: Vec<Pass> = passes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let options = CompileOptions {
        schedule_mode: schedule.parse().map_err(err)?,
        resource_constrained: rc,
        ..CompileOptions::with_passes(&passes)
    };
    let out =
        compile(&program, platform.as_ref(), &options).map_err(|e| format!("{}: {e}", e.code()))?;
    Ok(json!({
        "cqasm": out.cqasm,
        "report": out.report_text(),
        "timing": out.timing.as_ref().map(|t| t.to_tsv()),
    }))
}

/// Decomposes a seeded Haar-random unitary on `n` qubits and reports gate
/// counts against the closed-form counts plus the reconstruction error.
#[wasm_bindgen]
pub fn qsd_random(n: u32, seed: u64) -> String {
    respond(qsd_value(n as usize, seed))
}

fn qsd_value(n: usize, seed: u64) -> Result<Value, String> {
    if n == 0 || n > DEMO_QSD_LIMIT.min(MAX_QSD_QUBITS) {
        return Err(format!("n must be between 1 and {DEMO_QSD_LIMIT}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(1 << n, &mut rng);
    let qubits: Vec<usize> = (0..n).rev().collect();
    let gates = qsd_decompose(&u, &qubits).map_err(err)?;
    let v = circuit_unitary(&gates, n).map_err(err)?;
    let rotations = gates.iter().filter(|g| g.name != "cnot").count();
    Ok(json!({
        "rotations": rotations,
        "cnots": gates.len() - rotations,
        "expected_rotations": qsd_rotation_count(n as u32),
        "expected_cnots": qsd_cnot_count(n as u32),
        "distance": unitary_distance(&u, &v).map_err(err)?,
        "preview": gates.iter().take(12).map(ToString::to_string).collect::<Vec<_>>(),
    }))
}

/// Places and routes the gates of `source` on a `line`, `ring` or
/// `grid` topology of `size` qubits (`grid` takes the nearest 2-row shape).
#[wasm_bindgen]
pub fn route_source(source: &str, shape: &str, size: u32) -> String {
    respond(route_value(source, shape, size as usize))
}

fn route_value(source: &str, shape: &str, size: usize) -> Result<Value, String> {
    if !(2..=12).contains(&size) {
        return Err("size must be between 2 and 12".into());
    }
    let topology = match shape {
        "line" => Topology::line(size),
        "ring" if size >= 3 => Topology::ring(size),
        "grid" => Topology::grid(2, size.div_ceil(2)),
        _ => return Err(format!("unknown topology `{shape}`")),
    };
    let program = parse_cqasm(source, "demo", Some(&example_platform())).map_err(err)?;
    let gates: Vec<_> = program
        .kernels()
        .iter()
        .flat_map(|k| k.gates().iter().cloned())
        .collect();
    let placement =
        initial_placement(&gates, &topology, PlacementBudget::default()).map_err(err)?;
    let routed = route(&gates, &topology, &placement.mapping, None).map_err(err)?;
    let np = topology.qubit_count;
    let unitary = gates.iter().all(|g| g.has_matrix());
    let verified = if unitary && np <= 8 {
        let original = qlc_core::map::relabel(&gates, &placement.mapping);
        Some(
            equivalent_up_to_permutation(&original, &routed.gates, np, &routed.permutation(), 1e-9)
                .map_err(err)?,
        )
    } else {
        None
    };
    Ok(json!({
        "placement": placement.mapping.v2p(),
        "placement_exact": placement.exact,
        "swaps": routed.swaps_added,
        "depth_before": routed.depth_before,
        "depth_after": routed.depth_after,
        "gates": routed.gates.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "final": routed.final_mapping.v2p(),
        "verified": verified,
    }))
}

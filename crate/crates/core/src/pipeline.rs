// SPDX-License-Identifier: Apache-2.0

//! The compilation pipeline: decompose, optimize, map, schedule, emit.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::decompose::{decompose_toffoli, qsd_decompose};
use crate::emit::{emit_cqasm, timing_trace_for_kernels, TimingTrace};
use crate::error::Error;
use crate::ir::{Gate, GateKind, Kernel, Program};
use crate::map::{initial_placement, route, Mapping, PlacementBudget};
use crate::optimize::{optimize_circuit_with_stats, DEFAULT_EPSILON, DEFAULT_WINDOW};
use crate::platform::Platform;
use crate::schedule::{circuit_depth, schedule, Schedule, ScheduleError, ScheduleMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pass {
    Decompose,
    Optimize,
    Map,
    Schedule,
}

impl Pass {
    pub const ALL: [Pass; 4] = [Pass::Decompose, Pass::Optimize, Pass::Map, Pass::Schedule];

    pub fn as_str(self) -> &'static str {
        match self {
            Pass::Decompose => "decompose",
            Pass::Optimize => "optimize",
            Pass::Map => "map",
            Pass::Schedule => "schedule",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pass::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown pass `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    /// Passes to run; they always execute in the fixed pipeline order.
    pub passes: BTreeSet<Pass>,
    pub schedule_mode: ScheduleMode,
    pub resource_constrained: bool,
    pub epsilon: f64,
    pub window: usize,
    pub placement: PlacementBudget,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            passes: Pass::ALL.into_iter().collect(),
            schedule_mode: ScheduleMode::Alap,
            resource_constrained: false,
            epsilon: DEFAULT_EPSILON,
            window: DEFAULT_WINDOW,
            placement: PlacementBudget::default(),
        }
    }
}

impl CompileOptions {
    pub fn with_passes(passes: &[Pass]) -> Self {
        Self {
            passes: passes.iter().copied().collect(),
            ..Self::default()
        }
    }

    fn runs(&self, pass: Pass) -> bool {
        self.passes.contains(&pass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassReport {
    pub pass: Pass,
    pub gates_before: usize,
    pub gates_after: usize,
    pub depth_before: u32,
    pub depth_after: u32,
    pub swaps_added: usize,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct CompileOutput {
    pub program: Program,
    /// One schedule per kernel when the schedule pass ran.
    pub schedules: Option<Vec<Schedule>>,
    pub cqasm: String,
    /// Present when the program was scheduled against a platform.
    pub timing: Option<TimingTrace>,
    pub reports: Vec<PassReport>,
    /// Initial and final placement when the map pass ran.
    pub mapping: Option<(Mapping, Mapping)>,
}

impl CompileOutput {
    pub fn report_text(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&format!(
                "{:<10} gates {:>5} -> {:<5} depth {:>5} -> {:<5} swaps {}",
                r.pass, r.gates_before, r.gates_after, r.depth_before, r.depth_after, r.swaps_added
            ));
            if !r.note.is_empty() {
                out.push_str("  ");
                out.push_str(&r.note);
            }
            out.push('\n');
        }
        out
    }

    pub fn report_json(&self) -> Value {
        let passes: Vec<Value> = self
            .reports
            .iter()
            .map(|r| {
                json!({
                    "pass": r.pass.as_str(),
                    "gates_before": r.gates_before,
                    "gates_after": r.gates_after,
                    "depth_before": r.depth_before,
                    "depth_after": r.depth_after,
                    "swaps_added": r.swaps_added,
                    "note": r.note,
                })
            })
            .collect();
        let mut doc = json!({ "program": self.program.name, "passes": passes });
        if let Some(s) = &self.schedules {
            doc["makespan"] = json!(s.iter().map(|s| s.makespan).sum::<u32>());
        }
        if let Some((init, fin)) = &self.mapping {
            doc["initial_mapping"] = json!(init.v2p());
            doc["final_mapping"] = json!(fin.v2p());
        }
        doc
    }
}

fn depth_of(program: &Program) -> u32 {
    program
        .kernels()
        .iter()
        .map(|k| circuit_depth(k.gates()))
        .sum()
}

fn measure(program: &Program) -> (usize, u32) {
    (program.gate_count(), depth_of(program))
}

/// Rewrites every kernel with `f`, rebuilding the kernel around the new gates.
fn map_kernels<F>(program: &Program, qubit_count: usize, mut f: F) -> Result<Program, Error>
where
    F: FnMut(&Kernel) -> Result<Vec<Gate>, Error>,
{
    let mut out = Program::new(&program.name, qubit_count, program.platform.clone());
    for k in program.kernels() {
        let mut nk = Kernel::new(&k.name, qubit_count);
        nk.iterations = k.iterations;
        nk.display = k.display;
        nk.set_gates(f(k)?)?;
        out.add_kernel(nk)?;
    }
    Ok(out)
}

/// Lowers one gate: platform rules, Toffoli network, QSD for custom
/// multi-qubit matrices without an instruction, then platform rules again.
pub fn decompose_gate(gate: &Gate, platform: Option<&Platform>) -> Result<Vec<Gate>, Error> {
    let first = match platform {
        Some(p) => p.apply_custom_decomposition(gate)?,
        None => vec![gate.clone()],
    };
    let defined = |g: &Gate| platform.is_some_and(|p| p.lookup_instruction(g).is_ok());
    let mut lowered = Vec::new();
    for g in first {
        if g.name == "toffoli" && !defined(&g) {
            lowered.extend(decompose_toffoli(&g)?);
        } else if g.kind == GateKind::Custom && g.operands.len() >= 2 && !defined(&g) {
            match &g.matrix {
                Some(m) => lowered.extend(qsd_decompose(m, &g.operands)?),
                None => lowered.push(g),
            }
        } else {
            lowered.push(g);
        }
    }
    let mut out = Vec::new();
    for g in lowered {
        match platform {
            Some(p) => out.extend(p.apply_custom_decomposition(&g)?),
            None => out.push(g),
        }
    }
    Ok(out)
}

/// Runs the requested passes over `program` and renders the results.
pub fn compile(
    program: &Program,
    platform: Option<&Platform>,
    options: &CompileOptions,
) -> Result<CompileOutput, Error> {
    let mut reports = Vec::new();
    let mut current = program.clone();
    let mut mapping = None;

    if options.runs(Pass::Decompose) {
        let (gb, db) = measure(&current);
        current = map_kernels(&current, current.qubit_count, |k| {
            let mut gates = Vec::new();
            for g in k.gates() {
                gates.extend(decompose_gate(g, platform)?);
            }
            Ok(gates)
        })?;
        let (ga, da) = measure(&current);
        reports.push(PassReport {
            pass: Pass::Decompose,
            gates_before: gb,
            gates_after: ga,
            depth_before: db,
            depth_after: da,
            swaps_added: 0,
            note: String::new(),
        });
    }

    if options.runs(Pass::Optimize) {
        let (gb, db) = measure(&current);
        let mut replacements = 0;
        current = map_kernels(&current, current.qubit_count, |k| {
            let (gates, stats) =
                optimize_circuit_with_stats(k.gates(), options.epsilon, options.window);
            replacements += stats.replacements;
            Ok(gates)
        })?;
        let (ga, da) = measure(&current);
        reports.push(PassReport {
            pass: Pass::Optimize,
            gates_before: gb,
            gates_after: ga,
            depth_before: db,
            depth_after: da,
            swaps_added: 0,
            note: format!("{replacements} replacement(s)"),
        });
    }

    if options.runs(Pass::Map) {
        let (gb, db) = measure(&current);
        let topology = platform.and_then(|p| p.topology.clone());
        let note;
        let mut swaps = 0;
        match topology {
            Some(topo) => {
                let all: Vec<Gate> = current
                    .kernels()
                    .iter()
                    .flat_map(|k| k.gates().iter().cloned())
                    .collect();
                let placement = initial_placement(&all, &topo, options.placement)?;
                let initial = placement.mapping.clone();
                let mut state = placement.mapping;
                current = map_kernels(&current, topo.qubit_count, |k| {
                    let routed = route(k.gates(), &topo, &state, platform)?;
                    swaps += routed.swaps_added;
                    state = routed.final_mapping;
                    Ok(routed.gates)
                })?;
                note = format!(
                    "placement cost {} ({})",
                    placement.cost,
                    if placement.exact {
                        "exact"
                    } else {
                        "heuristic"
                    }
                );
                mapping = Some((initial, state));
            }
            None => note = "no topology; skipped".to_string(),
        }
        let (ga, da) = measure(&current);
        reports.push(PassReport {
            pass: Pass::Map,
            gates_before: gb,
            gates_after: ga,
            depth_before: db,
            depth_after: da,
            swaps_added: swaps,
            note,
        });
    }

    let mut schedules = None;
    let mut timing = None;
    if options.runs(Pass::Schedule) {
        let (gb, db) = measure(&current);
        let list: Vec<Schedule> = current
            .kernels()
            .iter()
            .map(|k| {
                schedule(
                    k.gates(),
                    platform,
                    options.schedule_mode,
                    options.resource_constrained,
                )
            })
            .collect::<Result<_, ScheduleError>>()?;
        let makespan: u32 = list.iter().map(|s| s.makespan).sum();
        if let Some(p) = platform {
            let named: Vec<(&str, &Schedule)> = current
                .kernels()
                .iter()
                .map(|k| k.name.as_str())
                .zip(list.iter())
                .collect();
            timing = Some(timing_trace_for_kernels(&named, p));
        }
        reports.push(PassReport {
            pass: Pass::Schedule,
            gates_before: gb,
            gates_after: gb,
            depth_before: db,
            depth_after: db,
            swaps_added: 0,
            note: format!("{} makespan {makespan} cycles", options.schedule_mode),
        });
        schedules = Some(list);
    }

    let cqasm = emit_cqasm(&current, schedules.as_deref());
    Ok(CompileOutput {
        program: current,
        schedules,
        cqasm,
        timing,
        reports,
        mapping,
    })
}

/// Builder-style entry point: decompose always runs, `optimize` toggles the
/// optimizer, and `schedule` names the scheduling discipline
/// (case-insensitive `asap`, `alap` or `uniform`).
pub fn program_compile(
    program: &Program,
    optimize: bool,
    schedule: &str,
) -> Result<CompileOutput, Error> {
    let mode: ScheduleMode = schedule.parse()?;
    let mut options = CompileOptions {
        schedule_mode: mode,
        ..CompileOptions::default()
    };
    if !optimize {
        options.passes.remove(&Pass::Optimize);
    }
    compile(program, program.platform.as_deref(), &options)
}

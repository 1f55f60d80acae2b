// SPDX-License-Identifier: Apache-2.0

//! Cycle assignment: ASAP, ALAP, uniform ALAP and resource-constrained
//! list scheduling over the gate dependency graph.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ir::Gate;
use crate::optimize::{build_gdg, Node};
use crate::platform::{InstructionType, Platform, ResourceClaim};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("gate `{gate}` claims {units} unit(s) of `{resource}`, which has {capacity}")]
    UnschedulableGate {
        gate: String,
        resource: String,
        units: u32,
        capacity: u32,
    },
    #[error("unknown schedule mode `{0}` (expected asap, alap or uniform)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ScheduleMode {
    Asap,
    #[default]
    Alap,
    Uniform,
}

impl FromStr for ScheduleMode {
    type Err = ScheduleError;

    /// Case-insensitive: `asap`, `alap`, `uniform`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "asap" => Ok(Self::Asap),
            "alap" => Ok(Self::Alap),
            "uniform" => Ok(Self::Uniform),
            _ => Err(ScheduleError::UnknownMode(s.to_string())),
        }
    }
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Asap => "asap",
            Self::Alap => "alap",
            Self::Uniform => "uniform",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Asap,
    Alap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledGate {
    pub gate: Gate,
    pub start: u32,
    pub duration: u32,
}

/// Start cycles for a gate list; `entries[i]` belongs to input gate `i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub entries: Vec<ScheduledGate>,
    pub makespan: u32,
}

impl Schedule {
    fn from_starts(gates: &[Gate], starts: &[u32], durations: &[u32]) -> Self {
        let entries: Vec<ScheduledGate> = gates
            .iter()
            .zip(starts.iter().zip(durations))
            .map(|(g, (&start, &duration))| {
                let mut gate = g.clone();
                gate.duration_cycles = Some(duration);
                ScheduledGate {
                    gate,
                    start,
                    duration,
                }
            })
            .collect();
        let makespan = entries
            .iter()
            .map(|e| e.start + e.duration)
            .max()
            .unwrap_or(0);
        Self { entries, makespan }
    }

    pub fn starts(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.start).collect()
    }

    /// Entry indices grouped by start cycle, program order within a cycle.
    pub fn bundles(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut map: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            map.entry(e.start).or_default().push(i);
        }
        map
    }

    /// Largest number of gates starting in one cycle.
    pub fn max_bundle_size(&self) -> usize {
        self.bundles().values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn gates(&self) -> Vec<Gate> {
        self.entries.iter().map(|e| e.gate.clone()).collect()
    }
}

/// Per-gate timing facts resolved against an optional platform.
struct Timing {
    durations: Vec<u32>,
    kinds: Vec<InstructionType>,
}

fn timing(gates: &[Gate], platform: Option<&Platform>) -> Timing {
    let mut durations = Vec::with_capacity(gates.len());
    let mut kinds = Vec::with_capacity(gates.len());
    for g in gates {
        let found = platform.and_then(|p| p.lookup_instruction(g).ok());
        durations.push(found.as_ref().map_or(1, |f| f.duration_cycles));
        kinds.push(found.map_or(InstructionType::None, |f| f.def.kind));
    }
    Timing { durations, kinds }
}

/// Weighted predecessor lists: `preds[b]` holds `(a, min distance a→b)`.
fn weighted_preds(
    gates: &[Gate],
    platform: Option<&Platform>,
    t: &Timing,
) -> Vec<Vec<(usize, u32)>> {
    let gdg = build_gdg(gates);
    let mut preds: Vec<Vec<(usize, u32)>> = vec![Vec::new(); gates.len()];
    for e in gdg.edges() {
        if let (Node::Gate(a), Node::Gate(b)) = (e.from, e.to) {
            let buffer = platform.map_or(0, |p| p.buffer_cycles(t.kinds[a], t.kinds[b]));
            let w = t.durations[a] + buffer;
            match preds[b].iter_mut().find(|(p, _)| *p == a) {
                Some(entry) => entry.1 = entry.1.max(w),
                None => preds[b].push((a, w)),
            }
        }
    }
    preds
}

fn successors_of(preds: &[Vec<(usize, u32)>]) -> Vec<Vec<(usize, u32)>> {
    let mut succ = vec![Vec::new(); preds.len()];
    for (b, ps) in preds.iter().enumerate() {
        for &(a, w) in ps {
            succ[a].push((b, w));
        }
    }
    succ
}

fn asap_starts(preds: &[Vec<(usize, u32)>]) -> Vec<u32> {
    let mut start = vec![0u32; preds.len()];
    for b in 0..preds.len() {
        start[b] = preds[b]
            .iter()
            .map(|&(a, w)| start[a] + w)
            .max()
            .unwrap_or(0);
    }
    start
}

fn makespan_of(starts: &[u32], durations: &[u32]) -> u32 {
    starts
        .iter()
        .zip(durations)
        .map(|(s, d)| s + d)
        .max()
        .unwrap_or(0)
}

/// Earliest start for every gate: longest path from the source.
pub fn schedule_asap(gates: &[Gate], platform: Option<&Platform>) -> Schedule {
    let t = timing(gates, platform);
    let preds = weighted_preds(gates, platform, &t);
    Schedule::from_starts(gates, &asap_starts(&preds), &t.durations)
}

/// Latest start for every gate with the ASAP makespan held fixed.
pub fn schedule_alap(gates: &[Gate], platform: Option<&Platform>) -> Schedule {
    let t = timing(gates, platform);
    let preds = weighted_preds(gates, platform, &t);
    let succ = successors_of(&preds);
    let makespan = makespan_of(&asap_starts(&preds), &t.durations);
    let mut start = vec![0u32; gates.len()];
    for a in (0..gates.len()).rev() {
        start[a] = succ[a]
            .iter()
            .map(|&(b, w)| start[b] - w)
            .min()
            .unwrap_or(u32::MAX)
            .min(makespan - t.durations[a]);
    }
    Schedule::from_starts(gates, &start, &t.durations)
}

/// ALAP-feasible schedule that delays gates from their ASAP cycle only into
/// cycles holding fewer than `⌈gates / makespan⌉` starts.
pub fn schedule_uniform_alap(gates: &[Gate], platform: Option<&Platform>) -> Schedule {
    let t = timing(gates, platform);
    let preds = weighted_preds(gates, platform, &t);
    let succ = successors_of(&preds);
    let mut start = asap_starts(&preds);
    let makespan = makespan_of(&start, &t.durations);
    if gates.is_empty() {
        return Schedule::default();
    }
    let target = gates.len().div_ceil(makespan as usize);
    let mut count = vec![0usize; makespan as usize];
    for &s in &start {
        count[s as usize] += 1;
    }
    for a in (0..gates.len()).rev() {
        let bound = succ[a]
            .iter()
            .map(|&(b, w)| start[b] - w)
            .min()
            .unwrap_or(u32::MAX)
            .min(makespan - t.durations[a]);
        let here = start[a];
        if let Some(c) = (here + 1..=bound)
            .rev()
            .find(|&c| count[c as usize] < target)
        {
            count[here as usize] -= 1;
            count[c as usize] += 1;
            start[a] = c;
        }
    }
    Schedule::from_starts(gates, &start, &t.durations)
}

/// Per-cycle occupancy of each resource.
#[derive(Debug, Default)]
struct Occupancy {
    used: BTreeMap<String, Vec<u32>>,
}

impl Occupancy {
    fn fits(&self, claims: &[ResourceClaim], platform: &Platform, at: u32, len: u32) -> bool {
        claims.iter().all(|c| {
            let cap = platform.resources.capacity(&c.resource);
            let row = self.used.get(&c.resource);
            (at..at + len).all(|t| {
                let u = row.and_then(|r| r.get(t as usize)).copied().unwrap_or(0);
                u + c.units <= cap
            })
        })
    }

    fn claim(&mut self, claims: &[ResourceClaim], at: u32, len: u32) {
        for c in claims {
            let row = self.used.entry(c.resource.clone()).or_default();
            let end = (at + len) as usize;
            if row.len() < end {
                row.resize(end, 0);
            }
            for u in &mut row[at as usize..end] {
                *u += c.units;
            }
        }
    }
}

/// Cycle-by-cycle list scheduling over `order`; `preds` uses the same
/// numbering. Resource claims are held for the whole gate duration.
fn list_schedule(
    order: &[usize],
    preds: &[Vec<(usize, u32)>],
    durations: &[u32],
    claims: &[Vec<ResourceClaim>],
    platform: &Platform,
) -> Vec<u32> {
    let n = order.len();
    let mut start: Vec<Option<u32>> = vec![None; n];
    let mut occupancy = Occupancy::default();
    let mut remaining = n;
    let mut cycle = 0u32;
    while remaining > 0 {
        let mut next_event = u32::MAX;
        for &g in order {
            if start[g].is_some() {
                continue;
            }
            let mut earliest = 0u32;
            let mut ready = true;
            for &(p, w) in &preds[g] {
                match start[p] {
                    Some(s) => earliest = earliest.max(s + w),
                    None => {
                        ready = false;
                        break;
                    }
                }
            }
            if !ready {
                continue;
            }
            if earliest > cycle {
                next_event = next_event.min(earliest);
                continue;
            }
            if occupancy.fits(&claims[g], platform, cycle, durations[g]) {
                occupancy.claim(&claims[g], cycle, durations[g]);
                start[g] = Some(cycle);
                remaining -= 1;
            } else {
                next_event = next_event.min(cycle + 1);
            }
        }
        // Every edge weight is at least one cycle, so nothing placed in this
        // cycle can release a successor into the same cycle.
        cycle = if next_event == u32::MAX {
            cycle + 1
        } else {
            next_event
        };
    }
    start.into_iter().map(|s| s.expect("all placed")).collect()
}

/// List scheduling that never exceeds any resource's count in any cycle.
///
/// `Direction::Alap` schedules the reversed dependency graph and mirrors
/// the result, so gates are packed towards the end.
pub fn schedule_resource_constrained(
    gates: &[Gate],
    platform: &Platform,
    direction: Direction,
) -> Result<Schedule, ScheduleError> {
    let t = timing(gates, Some(platform));
    let claims: Vec<Vec<ResourceClaim>> =
        gates.iter().map(|g| platform.resource_claims(g)).collect();
    for (g, cs) in gates.iter().zip(&claims) {
        for c in cs {
            let capacity = platform.resources.capacity(&c.resource);
            if c.units > capacity {
                return Err(ScheduleError::UnschedulableGate {
                    gate: g.to_string(),
                    resource: c.resource.clone(),
                    units: c.units,
                    capacity,
                });
            }
        }
    }
    let preds = weighted_preds(gates, Some(platform), &t);
    let start = match direction {
        Direction::Asap => {
            let order: Vec<usize> = (0..gates.len()).collect();
            list_schedule(&order, &preds, &t.durations, &claims, platform)
        }
        Direction::Alap => {
            // Reversed edge a→b carries d(b) + buffer(a, b).
            let mut rpreds: Vec<Vec<(usize, u32)>> = vec![Vec::new(); gates.len()];
            for (b, ps) in preds.iter().enumerate() {
                for &(a, w) in ps {
                    let buffer = w - t.durations[a];
                    rpreds[a].push((b, t.durations[b] + buffer));
                }
            }
            let order: Vec<usize> = (0..gates.len()).rev().collect();
            let mirrored = list_schedule(&order, &rpreds, &t.durations, &claims, platform);
            let span = makespan_of(&mirrored, &t.durations);
            mirrored
                .iter()
                .zip(&t.durations)
                .map(|(&s, &d)| span - s - d)
                .collect()
        }
    };
    Ok(Schedule::from_starts(gates, &start, &t.durations))
}

/// Dispatches on mode; resource-constrained uniform scheduling uses the
/// ALAP direction.
pub fn schedule(
    gates: &[Gate],
    platform: Option<&Platform>,
    mode: ScheduleMode,
    resource_constrained: bool,
) -> Result<Schedule, ScheduleError> {
    match (platform, resource_constrained) {
        (Some(p), true) => {
            let dir = match mode {
                ScheduleMode::Asap => Direction::Asap,
                ScheduleMode::Alap | ScheduleMode::Uniform => Direction::Alap,
            };
            schedule_resource_constrained(gates, p, dir)
        }
        _ => Ok(match mode {
            ScheduleMode::Asap => schedule_asap(gates, platform),
            ScheduleMode::Alap => schedule_alap(gates, platform),
            ScheduleMode::Uniform => schedule_uniform_alap(gates, platform),
        }),
    }
}

/// Unit-duration ASAP depth.
pub fn circuit_depth(gates: &[Gate]) -> u32 {
    schedule_asap(gates, None).makespan
}

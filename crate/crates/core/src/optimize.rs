// SPDX-License-Identifier: Apache-2.0

//! Gate dependency graph and sliding-window fusion of single-qubit runs.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::decompose::zyz_decompose;
use crate::ir::{gate_unitary, Axis, Gate, UnitaryMatrix};

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_WINDOW: usize = 8;
pub const MAX_SWEEPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptimizeError {
    #[error("cannot compare a {left}x{left} unitary with a {right}x{right} one")]
    DimMismatch { left: usize, right: usize },
}

/// Node of a [`GateDependencyGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Source,
    Gate(usize),
    Sink,
}

/// Same-qubit ordering edge. `qubit` is `None` only for the
/// `Source → Sink` edge of an empty circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GdgEdge {
    pub from: Node,
    pub to: Node,
    pub qubit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDependencyGraph {
    gate_count: usize,
    edges: Vec<GdgEdge>,
    chains: Vec<Vec<usize>>,
}

impl GateDependencyGraph {
    pub fn gate_count(&self) -> usize {
        self.gate_count
    }

    pub fn edges(&self) -> &[GdgEdge] {
        &self.edges
    }

    /// Gates touching `qubit`, in program order.
    pub fn chain(&self, qubit: usize) -> &[usize] {
        self.chains.get(qubit).map_or(&[], Vec::as_slice)
    }

    pub fn qubit_count(&self) -> usize {
        self.chains.len()
    }

    /// Distinct gate predecessors of gate `i`.
    pub fn predecessors(&self, i: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (Node::Gate(a), Node::Gate(b)) if b == i => Some(a),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }

    /// Distinct gate successors of gate `i`.
    pub fn successors(&self, i: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (Node::Gate(a), Node::Gate(b)) if a == i => Some(b),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }

    pub fn has_edge(&self, from: Node, to: Node) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }
}

/// Links every gate to the previous gate on each of its qubits.
pub fn build_gdg(gates: &[Gate]) -> GateDependencyGraph {
    let width = gates
        .iter()
        .filter_map(Gate::max_operand)
        .max()
        .map_or(0, |m| m + 1);
    let mut chains: Vec<Vec<usize>> = vec![Vec::new(); width];
    let mut edges = Vec::new();
    for (i, g) in gates.iter().enumerate() {
        for &q in &g.operands {
            let from = chains[q].last().map_or(Node::Source, |&p| Node::Gate(p));
            edges.push(GdgEdge {
                from,
                to: Node::Gate(i),
                qubit: Some(q),
            });
            chains[q].push(i);
        }
    }
    for (q, chain) in chains.iter().enumerate() {
        if let Some(&last) = chain.last() {
            edges.push(GdgEdge {
                from: Node::Gate(last),
                to: Node::Sink,
                qubit: Some(q),
            });
        }
    }
    if gates.is_empty() {
        edges.push(GdgEdge {
            from: Node::Source,
            to: Node::Sink,
            qubit: None,
        });
    }
    GateDependencyGraph {
        gate_count: gates.len(),
        edges,
        chains,
    }
}

/// Global-phase-invariant distance `sqrt(1 − |tr(U†V)|/dim)`.
///
/// Evaluated as `‖U − e^{iφ}V‖_F / sqrt(2·dim)` with `e^{iφ}` the phase of
/// `tr(V†U)`, which is the same quantity for unitaries but keeps full
/// relative precision near zero.
pub fn unitary_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64, OptimizeError> {
    matrix_distance(u.as_matrix(), v.as_matrix())
}

pub(crate) fn matrix_distance(
    u: &DMatrix<Complex64>,
    v: &DMatrix<Complex64>,
) -> Result<f64, OptimizeError> {
    if u.shape() != v.shape() {
        return Err(OptimizeError::DimMismatch {
            left: u.nrows(),
            right: v.nrows(),
        });
    }
    let dim = u.nrows();
    if dim == 0 {
        return Ok(0.0);
    }
    let overlap: Complex64 = v.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let diff: f64 = u
        .iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b * phase).norm_sqr())
        .sum();
    Ok((diff / (2.0 * dim as f64)).sqrt().min(1.0))
}

fn is_fusable(g: &Gate) -> bool {
    g.operands.len() == 1 && g.has_matrix() && !g.disable_optimization
}

fn run_product(run: &[Gate]) -> Option<UnitaryMatrix> {
    let mut acc = UnitaryMatrix::identity(2);
    for g in run {
        acc = gate_unitary(g).ok()?.mul(&acc);
    }
    Some(acc)
}

/// Angle equivalent to `theta` up to global phase, in `(−π, π]`.
fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Replacement for a same-qubit run, when a strictly shorter one exists
/// within `epsilon` of the run's product.
pub fn fuse_single_qubit_run(run: &[Gate], epsilon: f64) -> Option<Vec<Gate>> {
    let qubit = *run.first()?.operands.first()?;
    if !run.iter().all(|g| is_fusable(g) && g.operands[0] == qubit) {
        return None;
    }
    let product = run_product(run)?;
    let identity = UnitaryMatrix::identity(2);
    if unitary_distance(&product, &identity).ok()? <= epsilon {
        return Some(Vec::new());
    }
    if run.len() < 2 {
        return None;
    }
    let z = zyz_decompose(&product).ok()?;
    let replacement: Vec<Gate> = [(Axis::Z, z.delta), (Axis::Y, z.gamma), (Axis::Z, z.beta)]
        .into_iter()
        .map(|(axis, theta)| (axis, wrap_angle(theta)))
        .filter(|(_, theta)| theta.abs() > 1e-12)
        .map(|(axis, theta)| Gate::rotation(axis, qubit, theta))
        .collect();
    if replacement.len() >= run.len() {
        return None;
    }
    let rebuilt = run_product(&replacement)?;
    (unitary_distance(&rebuilt, &product).ok()? <= epsilon).then_some(replacement)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OptimizeStats {
    pub replacements: usize,
    pub sweeps: usize,
    pub gates_before: usize,
    pub gates_after: usize,
}

pub fn optimize_circuit(gates: &[Gate], epsilon: f64, window: usize) -> Vec<Gate> {
    optimize_circuit_with_stats(gates, epsilon, window).0
}

/// Fuses runs of single-qubit gates that are adjacent in the per-qubit
/// chains of the dependency graph, largest window first, until nothing
/// changes or [`MAX_SWEEPS`] sweeps have run.
pub fn optimize_circuit_with_stats(
    gates: &[Gate],
    epsilon: f64,
    window: usize,
) -> (Vec<Gate>, OptimizeStats) {
    let mut stats = OptimizeStats {
        gates_before: gates.len(),
        ..Default::default()
    };
    let mut current = gates.to_vec();
    if window < 2 || epsilon < 0.0 {
        stats.gates_after = current.len();
        return (current, stats);
    }
    while stats.sweeps < MAX_SWEEPS {
        stats.sweeps += 1;
        let gdg = build_gdg(&current);
        let mut removed = vec![false; current.len()];
        let mut inserted: Vec<Option<Vec<Gate>>> = vec![None; current.len()];
        let mut changed = false;
        for q in 0..gdg.qubit_count() {
            for run in fusable_runs(&current, gdg.chain(q)) {
                let mut p = 0;
                while p < run.len() {
                    let longest = window.min(run.len() - p);
                    let hit = (1..=longest).rev().find_map(|w| {
                        let slice: Vec<Gate> =
                            run[p..p + w].iter().map(|&i| current[i].clone()).collect();
                        fuse_single_qubit_run(&slice, epsilon).map(|r| (w, r))
                    });
                    match hit {
                        Some((w, replacement)) => {
                            for &i in &run[p..p + w] {
                                removed[i] = true;
                            }
                            inserted[run[p]] = Some(replacement);
                            stats.replacements += 1;
                            changed = true;
                            p += w;
                        }
                        None => p += 1,
                    }
                }
            }
        }
        if !changed {
            break;
        }
        let mut next = Vec::with_capacity(current.len());
        for (i, g) in current.into_iter().enumerate() {
            if let Some(rep) = inserted[i].take() {
                next.extend(rep);
            }
            if !removed[i] {
                next.push(g);
            }
        }
        current = next;
    }
    stats.gates_after = current.len();
    (current, stats)
}

/// Maximal stretches of a per-qubit chain made of fusable gates.
fn fusable_runs(gates: &[Gate], chain: &[usize]) -> Vec<Vec<usize>> {
    let mut runs = Vec::new();
    let mut cur = Vec::new();
    for &i in chain {
        if is_fusable(&gates[i]) {
            cur.push(i);
        } else if !cur.is_empty() {
            runs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    runs
}

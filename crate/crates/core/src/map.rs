// SPDX-License-Identifier: Apache-2.0

//! Initial placement of virtual qubits and SWAP-insertion routing.

use std::collections::VecDeque;

use thiserror::Error;

use crate::ir::{Gate, GateKind};
use crate::platform::{Platform, Topology};
use crate::schedule::{circuit_depth, schedule_asap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("topology is disconnected (no path from q{from} to q{to})")]
    DisconnectedTopology { from: usize, to: usize },
    #[error("circuit uses {virtuals} qubits but the topology has {physicals}")]
    TooManyVirtualQubits { virtuals: usize, physicals: usize },
    #[error("gate `{0}` acts on more than two qubits; decompose it before routing")]
    GateTooWide(String),
    #[error("mapping does not cover {0} qubits bijectively")]
    NotBijective(usize),
}

/// Virtual-to-physical bijection over every physical qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    v2p: Vec<usize>,
    p2v: Vec<usize>,
}

impl Mapping {
    pub fn identity(n: usize) -> Self {
        Self {
            v2p: (0..n).collect(),
            p2v: (0..n).collect(),
        }
    }

    pub fn from_v2p(v2p: Vec<usize>) -> Result<Self, MapError> {
        let n = v2p.len();
        let mut p2v = vec![usize::MAX; n];
        for (v, &p) in v2p.iter().enumerate() {
            if p >= n || p2v[p] != usize::MAX {
                return Err(MapError::NotBijective(n));
            }
            p2v[p] = v;
        }
        Ok(Self { v2p, p2v })
    }

    pub fn len(&self) -> usize {
        self.v2p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v2p.is_empty()
    }

    pub fn physical(&self, v: usize) -> usize {
        self.v2p[v]
    }

    pub fn virtual_at(&self, p: usize) -> usize {
        self.p2v[p]
    }

    pub fn v2p(&self) -> &[usize] {
        &self.v2p
    }

    pub fn p2v(&self) -> &[usize] {
        &self.p2v
    }

    /// Exchanges the virtual qubits held by physical qubits `a` and `b`.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (va, vb) = (self.p2v[a], self.p2v[b]);
        self.p2v.swap(a, b);
        self.v2p[va] = b;
        self.v2p[vb] = a;
    }
}

/// All-pairs hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    d: Vec<Vec<usize>>,
}

impl DistanceMatrix {
    pub fn get(&self, p: usize, q: usize) -> usize {
        self.d[p][q]
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

pub fn distance_matrix(topology: &Topology) -> Result<DistanceMatrix, MapError> {
    let n = topology.qubit_count;
    let adj: Vec<Vec<usize>> = (0..n).map(|p| topology.neighbors(p)).collect();
    let mut d = vec![vec![usize::MAX; n]; n];
    for (src, row) in d.iter_mut().enumerate() {
        row[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(p) = queue.pop_front() {
            for &q in &adj[p] {
                if row[q] == usize::MAX {
                    row[q] = row[p] + 1;
                    queue.push_back(q);
                }
            }
        }
        if let Some(to) = row.iter().position(|&x| x == usize::MAX) {
            return Err(MapError::DisconnectedTopology { from: src, to });
        }
    }
    Ok(DistanceMatrix { d })
}

/// Search limit for the exhaustive placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementBudget {
    /// Virtual-qubit count up to which the search is attempted.
    pub max_exact_virtuals: usize,
    /// Search-tree nodes visited before falling back to the best found.
    pub max_nodes: u64,
}

impl Default for PlacementBudget {
    fn default() -> Self {
        Self {
            max_exact_virtuals: 8,
            max_nodes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub mapping: Mapping,
    /// `Σ (d(p(a), p(b)) − 1)` over two-qubit gates.
    pub cost: usize,
    /// True when the search proved the cost optimal.
    pub exact: bool,
}

fn virtual_count(gates: &[Gate]) -> usize {
    gates
        .iter()
        .filter_map(Gate::max_operand)
        .max()
        .map_or(0, |m| m + 1)
}

/// Symmetric interaction counts between virtual qubits.
fn interactions(gates: &[Gate], n: usize) -> Vec<Vec<usize>> {
    let mut w = vec![vec![0; n]; n];
    for g in gates {
        if let [a, b] = g.operands[..] {
            w[a][b] += 1;
            w[b][a] += 1;
        }
    }
    w
}

/// Placement cost of `v2p` (restricted to the first `w.len()` virtuals).
pub fn placement_cost(gates: &[Gate], dist: &DistanceMatrix, v2p: &[usize]) -> usize {
    gates
        .iter()
        .filter_map(|g| match g.operands[..] {
            [a, b] => Some(dist.get(v2p[a], v2p[b]) - 1),
            _ => None,
        })
        .sum()
}

fn greedy_placement(w: &[Vec<usize>], dist: &DistanceMatrix, topology: &Topology) -> Vec<usize> {
    let nv = w.len();
    let np = dist.len();
    let mut order: Vec<usize> = (0..nv).collect();
    let total = |v: usize| w[v].iter().sum::<usize>();
    order.sort_by(|&a, &b| total(b).cmp(&total(a)).then(a.cmp(&b)));
    let mut v2p = vec![usize::MAX; nv];
    let mut used = vec![false; np];
    for &v in &order {
        let placed: Vec<usize> = (0..nv)
            .filter(|&u| v2p[u] != usize::MAX && w[v][u] > 0)
            .collect();
        let best = (0..np)
            .filter(|&p| !used[p])
            .min_by_key(|&p| {
                let cost: usize = placed.iter().map(|&u| w[v][u] * dist.get(p, v2p[u])).sum();
                (cost, std::cmp::Reverse(topology.degree(p)), p)
            })
            .expect("enough physical qubits");
        v2p[v] = best;
        used[best] = true;
    }
    v2p
}

struct Search<'a> {
    w: &'a [Vec<usize>],
    dist: &'a DistanceMatrix,
    order: Vec<usize>,
    v2p: Vec<usize>,
    used: Vec<bool>,
    best: Vec<usize>,
    best_cost: usize,
    nodes: u64,
    max_nodes: u64,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, cost: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return false;
        }
        if depth == self.order.len() {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = self.v2p.clone();
            }
            return true;
        }
        let v = self.order[depth];
        for p in 0..self.dist.len() {
            if self.used[p] {
                continue;
            }
            let added: usize = self.order[..depth]
                .iter()
                .map(|&u| self.w[v][u] * (self.dist.get(p, self.v2p[u]) - 1))
                .sum();
            if cost + added >= self.best_cost {
                continue;
            }
            self.v2p[v] = p;
            self.used[p] = true;
            let complete = self.run(depth + 1, cost + added);
            self.used[p] = false;
            self.v2p[v] = usize::MAX;
            if !complete {
                return false;
            }
            if self.best_cost == 0 {
                return true;
            }
        }
        true
    }
}

/// Chooses a virtual-to-physical assignment minimizing the summed excess
/// distance of two-qubit gates. Small circuits are searched exhaustively
/// (branch and bound); larger ones are placed greedily by interaction weight.
pub fn initial_placement(
    gates: &[Gate],
    topology: &Topology,
    budget: PlacementBudget,
) -> Result<Placement, MapError> {
    let dist = distance_matrix(topology)?;
    let np = topology.qubit_count;
    let nv = virtual_count(gates);
    if nv > np {
        return Err(MapError::TooManyVirtualQubits {
            virtuals: nv,
            physicals: np,
        });
    }
    let w = interactions(gates, nv);
    let greedy = greedy_placement(&w, &dist, topology);
    let greedy_cost = placement_cost(gates, &dist, &greedy);
    let (v2p, exact) = if nv <= budget.max_exact_virtuals && greedy_cost > 0 {
        let total = |v: usize| w[v].iter().sum::<usize>();
        let mut order: Vec<usize> = (0..nv).collect();
        order.sort_by(|&a, &b| total(b).cmp(&total(a)).then(a.cmp(&b)));
        let mut search = Search {
            w: &w,
            dist: &dist,
            order,
            v2p: vec![usize::MAX; nv],
            used: vec![false; np],
            best: greedy.clone(),
            best_cost: greedy_cost,
            nodes: 0,
            max_nodes: budget.max_nodes,
        };
        let complete = search.run(0, 0);
        (search.best, complete)
    } else {
        (greedy, greedy_cost == 0)
    };
    let cost = placement_cost(gates, &dist, &v2p);
    Ok(Placement {
        mapping: pad_mapping(&v2p, np),
        cost,
        exact,
    })
}

/// Extends a partial assignment with fresh virtual ids on the unused
/// physical qubits, in ascending physical order.
fn pad_mapping(v2p: &[usize], np: usize) -> Mapping {
    let mut full = v2p.to_vec();
    let mut used = vec![false; np];
    for &p in v2p {
        used[p] = true;
    }
    full.extend((0..np).filter(|&p| !used[p]));
    Mapping::from_v2p(full).expect("padding completes a bijection")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingResult {
    /// Gates on physical qubits.
    pub gates: Vec<Gate>,
    pub initial: Mapping,
    pub final_mapping: Mapping,
    pub swaps_added: usize,
    pub depth_before: u32,
    pub depth_after: u32,
}

impl RoutingResult {
    /// `perm[p]` is where the state initially on physical `p` ends up.
    pub fn permutation(&self) -> Vec<usize> {
        routing_permutation(&self.initial, &self.final_mapping)
    }
}

/// `perm[initial(v)] = final(v)` for every virtual qubit `v`.
pub fn routing_permutation(initial: &Mapping, final_mapping: &Mapping) -> Vec<usize> {
    let mut perm = vec![0; initial.len()];
    for v in 0..initial.len() {
        perm[initial.physical(v)] = final_mapping.physical(v);
    }
    perm
}

/// Rewrites virtual operands to physical ones.
pub fn relabel(gates: &[Gate], mapping: &Mapping) -> Vec<Gate> {
    gates
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.operands = g.operands.iter().map(|&v| mapping.physical(v)).collect();
            g
        })
        .collect()
}

/// Shortest paths from `a` to `b`, lexicographic order, at most `limit`.
fn shortest_paths(
    a: usize,
    b: usize,
    topology: &Topology,
    dist: &DistanceMatrix,
    limit: usize,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![a];
    fn walk(
        path: &mut Vec<usize>,
        b: usize,
        topology: &Topology,
        dist: &DistanceMatrix,
        limit: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= limit {
            return;
        }
        let cur = *path.last().unwrap();
        if cur == b {
            out.push(path.clone());
            return;
        }
        for n in topology.neighbors(cur) {
            if dist.get(n, b) + 1 == dist.get(cur, b) {
                path.push(n);
                walk(path, b, topology, dist, limit, out);
                path.pop();
            }
        }
    }
    walk(&mut path, b, topology, dist, limit, &mut out);
    out
}

const PATH_LIMIT: usize = 256;

/// Routes `gates` (virtual operands) so every two-qubit gate acts on
/// adjacent physical qubits.
///
/// Gates are taken in ASAP order. For a distant pair, every shortest path
/// and every point on it where the two qubits can meet is tried; the
/// candidate giving the smallest depth so far wins, then the one with fewer
/// SWAPs, then the lexicographically smallest path.
pub fn route(
    gates: &[Gate],
    topology: &Topology,
    initial: &Mapping,
    platform: Option<&Platform>,
) -> Result<RoutingResult, MapError> {
    let dist = distance_matrix(topology)?;
    let np = topology.qubit_count;
    if initial.len() != np {
        return Err(MapError::NotBijective(np));
    }
    let nv = virtual_count(gates);
    if nv > np {
        return Err(MapError::TooManyVirtualQubits {
            virtuals: nv,
            physicals: np,
        });
    }
    if let Some(g) = gates.iter().find(|g| g.operands.len() > 2) {
        return Err(MapError::GateTooWide(g.to_string()));
    }
    let swap_native = platform.is_none_or(|p| {
        let probe = Gate::simple("swap", &[0, 1]);
        p.lookup_instruction(&probe).is_ok() || p.has_rule_for(&probe)
    });
    let swap_cost: u32 = if swap_native { 1 } else { 3 };

    let asap = schedule_asap(gates, None);
    let mut order: Vec<usize> = (0..gates.len()).collect();
    order.sort_by_key(|&i| (asap.entries[i].start, i));

    let mut mapping = initial.clone();
    let mut ready = vec![0u32; np];
    let mut out = Vec::with_capacity(gates.len());
    let mut swaps_added = 0;
    for &i in &order {
        let g = &gates[i];
        if let [va, vb] = g.operands[..] {
            let (pa, pb) = (mapping.physical(va), mapping.physical(vb));
            if dist.get(pa, pb) > 1 {
                let swaps = best_swaps(pa, pb, topology, &dist, &ready, swap_cost);
                for (x, y) in swaps {
                    emit_swap(&mut out, x, y, swap_native);
                    let t = ready[x].max(ready[y]) + swap_cost;
                    ready[x] = t;
                    ready[y] = t;
                    mapping.swap_physical(x, y);
                    swaps_added += 1;
                }
            }
        }
        let mut pg = g.clone();
        pg.operands = g.operands.iter().map(|&v| mapping.physical(v)).collect();
        let t = pg.operands.iter().map(|&p| ready[p]).max().unwrap_or(0) + 1;
        for &p in &pg.operands {
            ready[p] = t;
        }
        out.push(pg);
    }
    let depth_after = circuit_depth(&out);
    Ok(RoutingResult {
        gates: out,
        initial: initial.clone(),
        final_mapping: mapping,
        swaps_added,
        depth_before: circuit_depth(gates),
        depth_after,
    })
}

fn emit_swap(out: &mut Vec<Gate>, a: usize, b: usize, native: bool) {
    if native {
        let mut g = Gate::simple("swap", &[a, b]);
        g.kind = GateKind::SwapLike;
        out.push(g);
    } else {
        out.push(Gate::cnot(a, b));
        out.push(Gate::cnot(b, a));
        out.push(Gate::cnot(a, b));
    }
}

/// Depth, gate finish, SWAP count, path, normalized SWAP pairs.
type SwapKey = (u32, u32, usize, Vec<usize>, Vec<(usize, usize)>);

/// SWAP sequence bringing `pa` and `pb` next to each other.
fn best_swaps(
    pa: usize,
    pb: usize,
    topology: &Topology,
    dist: &DistanceMatrix,
    ready: &[u32],
    swap_cost: u32,
) -> Vec<(usize, usize)> {
    let mut best: Option<(SwapKey, Vec<(usize, usize)>)> = None;
    for path in shortest_paths(pa, pb, topology, dist, PATH_LIMIT) {
        let hops = path.len() - 1;
        for k in 0..hops {
            let mut swaps = Vec::with_capacity(hops - 1);
            for j in 0..k {
                swaps.push((path[j], path[j + 1]));
            }
            for j in ((k + 2)..=hops).rev() {
                swaps.push((path[j], path[j - 1]));
            }
            let mut r = ready.to_vec();
            for &(x, y) in &swaps {
                let t = r[x].max(r[y]) + swap_cost;
                r[x] = t;
                r[y] = t;
            }
            let finish = r[path[k]].max(r[path[k + 1]]) + 1;
            r[path[k]] = finish;
            r[path[k + 1]] = finish;
            let depth = r.iter().copied().max().unwrap_or(0);
            let pairs: Vec<(usize, usize)> =
                swaps.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
            let key = (depth, finish, swaps.len(), path.clone(), pairs);
            if best.as_ref().is_none_or(|(k0, _)| key < *k0) {
                best = Some((key, swaps));
            }
        }
    }
    best.map(|(_, s)| s).unwrap_or_default()
}

/// Placement followed by routing.
pub fn map_circuit(
    gates: &[Gate],
    topology: &Topology,
    platform: Option<&Platform>,
    budget: PlacementBudget,
) -> Result<(Placement, RoutingResult), MapError> {
    let placement = initial_placement(gates, topology, budget)?;
    let routed = route(gates, topology, &placement.mapping, platform)?;
    Ok((placement, routed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::equivalent_up_to_permutation;

    fn cx(a: usize, b: usize) -> Gate {
        Gate::cnot(a, b)
    }

    fn brute_force_cost(gates: &[Gate], dist: &DistanceMatrix, nv: usize, np: usize) -> usize {
        fn rec(
            gates: &[Gate],
            dist: &DistanceMatrix,
            nv: usize,
            np: usize,
            cur: &mut Vec<usize>,
            best: &mut usize,
        ) {
            if cur.len() == nv {
                *best = (*best).min(placement_cost(gates, dist, cur));
                return;
            }
            for p in 0..np {
                if !cur.contains(&p) {
                    cur.push(p);
                    rec(gates, dist, nv, np, cur, best);
                    cur.pop();
                }
            }
        }
        let mut best = usize::MAX;
        rec(gates, dist, nv, np, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn distances() {
        let d = distance_matrix(&Topology::line(3)).unwrap();
        assert_eq!(d.get(0, 2), 2);
        let d = distance_matrix(&Topology::complete(4)).unwrap();
        assert!((0..4).all(|p| (0..4).all(|q| d.get(p, q) == usize::from(p != q))));
        let split = Topology::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            distance_matrix(&split),
            Err(MapError::DisconnectedTopology { .. })
        ));
    }

    #[test]
    fn placement_examples() {
        let line = Topology::line(3);
        let p =
            initial_placement(&[cx(0, 1), cx(1, 2)], &line, PlacementBudget::default()).unwrap();
        assert_eq!(p.cost, 0);
        assert_eq!(p.mapping.physical(1), 1);

        let ring = Topology::ring(5);
        let p = initial_placement(&[cx(3, 1)], &ring, PlacementBudget::default()).unwrap();
        assert_eq!(p.cost, 0);

        let line4 = Topology::line(4);
        let all: Vec<Gate> = (0..4)
            .flat_map(|a| ((a + 1)..4).map(move |b| cx(a, b)))
            .collect();
        let p = initial_placement(&all, &line4, PlacementBudget::default()).unwrap();
        let dist = distance_matrix(&line4).unwrap();
        assert!(p.exact);
        assert!(p.cost > 0);
        assert_eq!(p.cost, brute_force_cost(&all, &dist, 4, 4));

        assert!(matches!(
            initial_placement(&[cx(0, 3)], &line, PlacementBudget::default()),
            Err(MapError::TooManyVirtualQubits {
                virtuals: 4,
                physicals: 3
            })
        ));
    }

    #[test]
    fn route_inserts_one_swap_on_line() {
        let line = Topology::line(3);
        let r = route(&[cx(0, 2)], &line, &Mapping::identity(3), None).unwrap();
        assert_eq!(r.swaps_added, 1);
        assert_eq!(r.gates[0], Gate::simple("swap", &[0, 1]));
        assert_eq!(r.gates[1], cx(1, 2));
        let original = [cx(0, 2)];
        assert!(
            equivalent_up_to_permutation(&original, &r.gates, 3, &r.permutation(), 1e-9).unwrap()
        );
    }

    #[test]
    fn route_keeps_adjacent_circuits() {
        let line = Topology::line(3);
        let c = vec![cx(0, 1), Gate::simple("h", &[2]), cx(1, 2)];
        let r = route(&c, &line, &Mapping::identity(3), None).unwrap();
        assert_eq!(r.gates, c);
        assert_eq!(r.final_mapping, Mapping::identity(3));
        assert_eq!(r.swaps_added, 0);
    }

    #[test]
    fn route_long_distance_tries_splits() {
        let line = Topology::line(4);
        let r = route(&[cx(0, 3)], &line, &Mapping::identity(4), None).unwrap();
        assert_eq!(r.swaps_added, 2);
        // Meeting in the middle keeps the swaps parallel.
        assert_eq!(r.gates[0], Gate::simple("swap", &[0, 1]));
        assert_eq!(r.gates[1], Gate::simple("swap", &[3, 2]));
        assert_eq!(r.gates[2], cx(1, 2));
        assert_eq!(r.depth_after, 2);
        assert!(
            equivalent_up_to_permutation(&[cx(0, 3)], &r.gates, 4, &r.permutation(), 1e-9).unwrap()
        );
    }

    #[test]
    fn swap_expands_without_platform_support() {
        let doc = crate::platform::EXAMPLE_CONFIG;
        let p = Platform::load("p", doc).unwrap();
        let line = Topology::line(3);
        let r = route(&[cx(0, 2)], &line, &Mapping::identity(3), Some(&p)).unwrap();
        assert_eq!(r.gates.iter().filter(|g| g.name == "cnot").count(), 4);
    }

    #[test]
    fn mapping_swaps_stay_bijective() {
        let mut m = Mapping::identity(4);
        m.swap_physical(0, 3);
        m.swap_physical(1, 3);
        for v in 0..4 {
            assert_eq!(m.virtual_at(m.physical(v)), v);
        }
        assert!(Mapping::from_v2p(vec![0, 0]).is_err());
    }
}

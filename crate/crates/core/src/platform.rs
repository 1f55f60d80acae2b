// SPDX-License-Identifier: Apache-2.0

//! Hardware configuration documents.
//!
//! A platform is loaded from a JSON document with the sections
//! `eqasm_compiler`, `hardware_settings`, `instructions` and, optionally,
//! `gate_decomposition`, `resources` and `topology`:
//!
//! ```json
//! {
//!   "eqasm_compiler": "qumis_compiler",
//!   "hardware_settings": { "qubit_number": 2, "cycle_time": 5, "mw_mw_buffer": 0 },
//!   "instructions": {
//!     "rx180 q1": { "duration": 40, "latency": 20, "qubits": ["q1"], "type": "mw",
//!                   "uses": [{ "resource": "awg", "units": 1 }] }
//!   },
//!   "gate_decomposition": { "cnot q0,q1": ["ry90 q1", "cz q0,q1", "ry90 q1"] },
//!   "resources": { "awg": { "count": 1, "types": ["mw"] } },
//!   "topology": { "qubit_count": 2, "edges": [[0, 1]] }
//! }
//! ```
//!
//! Instruction keys are either generic (`"rx180"`) or specialized to
//! literal qubits (`"rx180 q0"`); specialized entries shadow generic ones.
//! Unrecognized instruction fields (`qumis_instr`, `qumis_instr_kw`, ...)
//! are carried through untouched.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ir::{self, Gate, IrError, UnitaryMatrix};

/// Config matrices are typically written with a handful of digits.
const CONFIG_MATRIX_TOL: f64 = 1e-6;

const DECOMPOSITION_DEPTH_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlatformError {
    #[error("cannot read config `{path}`: {message}")]
    ConfigNotFound { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("no instruction definition for `{0}`")]
    UnknownInstruction(String),
    #[error("gate decomposition cycle through `{0}`")]
    DecompositionCycle(String),
    #[error("decomposition rule `{rule}` uses unbound operand `{operand}`")]
    UnboundOperand { rule: String, operand: String },
    #[error(transparent)]
    Ir(#[from] IrError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> PlatformError {
    PlatformError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> PlatformError {
    PlatformError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

/// Control channel class of an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InstructionType {
    Mw,
    Flux,
    Readout,
    None,
}

impl InstructionType {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mw => "mw",
            Self::Flux => "flux",
            Self::Readout => "readout",
            Self::None => "none",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mw" => Self::Mw,
            "flux" => Self::Flux,
            "readout" => Self::Readout,
            "none" => Self::None,
            _ => return None,
        })
    }
}

impl fmt::Display for InstructionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceClaim {
    pub resource: String,
    pub units: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstructionDef {
    pub duration_ns: u64,
    pub latency_ns: i64,
    pub qubits: Vec<String>,
    pub matrix: Option<Arc<UnitaryMatrix>>,
    pub disable_optimization: bool,
    pub kind: InstructionType,
    /// Explicit resource claims (`uses`).
    pub uses: Vec<ResourceClaim>,
    /// Backend-specific fields, preserved verbatim.
    pub backend_opaque: Map<String, Value>,
}

impl InstructionDef {
    /// `ceil(duration_ns / cycle_time_ns)`, at least one cycle.
    pub fn duration_cycles(&self, cycle_time_ns: u64) -> u32 {
        (self.duration_ns.div_ceil(cycle_time_ns)).max(1) as u32
    }
}

/// Parsed `"name qA,qB"` key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GatePattern {
    pub name: String,
    pub operands: Vec<String>,
}

impl GatePattern {
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        let (name, rest) = match text.split_once(char::is_whitespace) {
            Some((n, r)) => (n, r),
            None => (text, ""),
        };
        if name.is_empty() {
            return None;
        }
        let operands: Vec<String> = rest
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        Some(Self {
            name: ir::canonical_name(name),
            operands,
        })
    }

    /// Literal qubit indices when every operand reads `qN` or `q[N]`.
    pub fn literal_qubits(&self) -> Option<Vec<usize>> {
        self.operands
            .iter()
            .map(|op| parse_qubit_label(op))
            .collect()
    }
}

impl fmt::Display for GatePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.operands.is_empty() {
            f.write_str(&self.name)
        } else {
            write!(f, "{} {}", self.name, self.operands.join(","))
        }
    }
}

fn parse_qubit_label(label: &str) -> Option<usize> {
    let rest = label.strip_prefix('q')?;
    let rest = rest
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .unwrap_or(rest);
    rest.parse().ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionRule {
    pub key: String,
    pub pattern: GatePattern,
    pub body: Vec<GatePattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub count: u32,
    /// Instruction types that claim one unit by default.
    pub types: Vec<InstructionType>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResourceModel {
    pub resources: BTreeMap<String, Resource>,
}

impl ResourceModel {
    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn capacity(&self, name: &str) -> u32 {
        self.resources.get(name).map_or(0, |r| r.count)
    }
}

/// Physical qubit connectivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub qubit_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    /// Edges are normalized to `(min, max)`, deduplicated and sorted.
    pub fn new(qubit_count: usize, edges: &[(usize, usize)]) -> Result<Self, PlatformError> {
        let mut norm = Vec::with_capacity(edges.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            let path = format!("topology.edges[{i}]");
            if a == b {
                return Err(invalid(path, format!("self-edge on qubit {a}")));
            }
            if a >= qubit_count || b >= qubit_count {
                return Err(invalid(
                    path,
                    format!("edge ({a},{b}) outside {qubit_count} qubits"),
                ));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(Self {
            qubit_count,
            edges: norm,
        })
    }

    pub fn line(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges).expect("line edges are valid")
    }

    pub fn ring(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((0, n - 1));
        }
        Self::new(n, &edges).expect("ring edges are valid")
    }

    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for col in 0..cols {
                let q = r * cols + col;
                if col + 1 < cols {
                    edges.push((q, q + 1));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols));
                }
            }
        }
        Self::new(rows * cols, &edges).expect("grid edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Self::new(n, &edges).expect("complete graph edges are valid")
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, q: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == q || b == q)
            .count()
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }
}

/// A resolved instruction lookup.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedInstruction<'a> {
    pub key: &'a str,
    pub def: &'a InstructionDef,
    pub duration_cycles: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    pub name: String,
    pub eqasm_compiler: String,
    pub qubit_number: usize,
    pub cycle_time_ns: u64,
    /// `*_buffer` entries from `hardware_settings`, in ns.
    pub buffers: BTreeMap<String, u64>,
    /// Other `hardware_settings` entries, preserved.
    pub hardware_extra: Map<String, Value>,
    instructions: Vec<(String, InstructionDef)>,
    patterns: Vec<GatePattern>,
    pub decompositions: Vec<DecompositionRule>,
    pub resources: ResourceModel,
    pub topology: Option<Topology>,
}

impl Platform {
    /// Reads and loads a config file; the platform is named after the file stem.
    pub fn from_file(path: &std::path::Path) -> Result<Self, PlatformError> {
        let text = std::fs::read_to_string(path).map_err(|e| PlatformError::ConfigNotFound {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("platform");
        Self::load(name, &text)
    }

    /// Parses and validates a configuration document.
    pub fn load(name: &str, document: &str) -> Result<Self, PlatformError> {
        let root: Value = serde_json::from_str(document).map_err(|e| PlatformError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let root = root
            .as_object()
            .ok_or_else(|| schema("$", "document must be a JSON object"))?;

        let eqasm_compiler = root
            .get("eqasm_compiler")
            .ok_or_else(|| schema("eqasm_compiler", "missing required field"))?
            .as_str()
            .ok_or_else(|| schema("eqasm_compiler", "expected a string"))?
            .to_string();

        let hw = root
            .get("hardware_settings")
            .ok_or_else(|| schema("hardware_settings", "missing required section"))?
            .as_object()
            .ok_or_else(|| schema("hardware_settings", "expected an object"))?;
        let qubit_number = positive_int(hw, "hardware_settings", "qubit_number")? as usize;
        let cycle_time_ns = positive_int(hw, "hardware_settings", "cycle_time")?;
        let mut buffers = BTreeMap::new();
        let mut hardware_extra = Map::new();
        for (k, v) in hw {
            if k == "qubit_number" || k == "cycle_time" {
                continue;
            }
            if k.ends_with("_buffer") {
                let ns = v.as_u64().ok_or_else(|| {
                    schema(
                        format!("hardware_settings.{k}"),
                        "expected a non-negative integer",
                    )
                })?;
                buffers.insert(k.clone(), ns);
            } else {
                hardware_extra.insert(k.clone(), v.clone());
            }
        }

        let instr_obj = root
            .get("instructions")
            .ok_or_else(|| schema("instructions", "missing required section"))?
            .as_object()
            .ok_or_else(|| schema("instructions", "expected an object"))?;
        let mut instructions = Vec::with_capacity(instr_obj.len());
        let mut patterns = Vec::with_capacity(instr_obj.len());
        for (key, v) in instr_obj {
            let path = format!("instructions.{key}");
            let pattern =
                GatePattern::parse(key).ok_or_else(|| schema(&path, "empty instruction name"))?;
            let def = parse_instruction(&path, v)?;
            if let Some(m) = &def.matrix {
                let arity = pattern.operands.len().max(def.qubits.len());
                if arity > 0 && m.dim() != 1 << arity {
                    return Err(invalid(
                        format!("{path}.matrix"),
                        format!(
                            "{}x{} matrix for a {arity}-qubit instruction",
                            m.dim(),
                            m.dim()
                        ),
                    ));
                }
            }
            instructions.push((key.clone(), def));
            patterns.push(pattern);
        }

        let mut decompositions = Vec::new();
        if let Some(v) = root.get("gate_decomposition") {
            let obj = v
                .as_object()
                .ok_or_else(|| schema("gate_decomposition", "expected an object"))?;
            for (key, body) in obj {
                let path = format!("gate_decomposition.{key}");
                let pattern =
                    GatePattern::parse(key).ok_or_else(|| schema(&path, "empty rule name"))?;
                let items = body
                    .as_array()
                    .ok_or_else(|| schema(&path, "expected a list of gate strings"))?;
                let mut seq = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    let s = item
                        .as_str()
                        .ok_or_else(|| schema(format!("{path}[{i}]"), "expected a string"))?;
                    seq.push(
                        GatePattern::parse(s)
                            .ok_or_else(|| schema(format!("{path}[{i}]"), "empty gate"))?,
                    );
                }
                decompositions.push(DecompositionRule {
                    key: key.clone(),
                    pattern,
                    body: seq,
                });
            }
        }

        let resources = match root.get("resources") {
            Some(v) => parse_resources(v)?,
            None => ResourceModel::default(),
        };
        let topology = match root.get("topology") {
            Some(v) => parse_topology(v)?,
            None => None,
        };

        let platform = Self {
            name: name.to_string(),
            eqasm_compiler,
            qubit_number,
            cycle_time_ns,
            buffers,
            hardware_extra,
            instructions,
            patterns,
            decompositions,
            resources,
            topology,
        };
        platform.validate()?;
        Ok(platform)
    }

    fn validate(&self) -> Result<(), PlatformError> {
        for (key, def) in &self.instructions {
            for claim in &def.uses {
                if !self.resources.resources.contains_key(&claim.resource) {
                    return Err(invalid(
                        format!("instructions.{key}.uses"),
                        format!("undefined resource `{}`", claim.resource),
                    ));
                }
            }
        }
        for rule in &self.decompositions {
            for (i, g) in rule.body.iter().enumerate() {
                let path = format!("gate_decomposition.{}[{i}]", rule.key);
                if !self.defines(&g.name) {
                    return Err(invalid(path, format!("undefined gate `{}`", g.name)));
                }
                if let Some(info) = ir::standard_gate(&g.name) {
                    if info.parameterized {
                        return Err(invalid(path, format!("`{}` needs an angle", g.name)));
                    }
                    if info.arity != g.operands.len() {
                        return Err(invalid(
                            path,
                            format!("`{}` takes {} operand(s)", g.name, info.arity),
                        ));
                    }
                }
            }
        }
        if let Some(t) = &self.topology {
            if t.qubit_count > self.qubit_number.max(t.qubit_count) {
                return Err(invalid("topology.qubit_count", "exceeds qubit_number"));
            }
        }
        Ok(())
    }

    /// True if `name` is a standard gate, an instruction, or a decomposition rule.
    pub fn defines(&self, name: &str) -> bool {
        ir::standard_gate(name).is_some()
            || self.patterns.iter().any(|p| p.name == name)
            || self.decompositions.iter().any(|r| r.pattern.name == name)
    }

    pub fn instructions(&self) -> impl Iterator<Item = (&str, &InstructionDef)> {
        self.instructions.iter().map(|(k, d)| (k.as_str(), d))
    }

    pub fn instruction(&self, key: &str) -> Option<&InstructionDef> {
        self.instructions
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, d)| d)
    }

    /// Resolves `gate` to its instruction: a specialized `"name qA,qB"`
    /// entry matching the operands first, then the generic `"name"`.
    pub fn lookup_instruction(
        &self,
        gate: &Gate,
    ) -> Result<ResolvedInstruction<'_>, PlatformError> {
        let specialized = self.patterns.iter().position(|p| {
            p.name == gate.name
                && !p.operands.is_empty()
                && p.literal_qubits().as_deref() == Some(gate.operands.as_slice())
        });
        let idx = specialized
            .or_else(|| {
                self.patterns
                    .iter()
                    .position(|p| p.name == gate.name && p.operands.is_empty())
            })
            .ok_or_else(|| {
                PlatformError::UnknownInstruction(
                    GatePattern {
                        name: gate.name.clone(),
                        operands: gate.operands.iter().map(|q| format!("q{q}")).collect(),
                    }
                    .to_string(),
                )
            })?;
        let (key, def) = &self.instructions[idx];
        Ok(ResolvedInstruction {
            key,
            def,
            duration_cycles: def.duration_cycles(self.cycle_time_ns),
        })
    }

    /// Builds a gate for a platform-defined name, attaching the matrix and
    /// optimization flag of the matching instruction.
    pub fn custom_gate(&self, name: &str, operands: &[usize]) -> Result<Gate, IrError> {
        let probe = Gate::custom(name, operands, None)?;
        match self.lookup_instruction(&probe) {
            Ok(found) => {
                let mut g = Gate::custom(name, operands, found.def.matrix.clone())?;
                g.disable_optimization = found.def.disable_optimization;
                Ok(g)
            }
            Err(_) => Ok(probe),
        }
    }

    /// Resolves a gate name from a decomposition body or program text.
    pub fn make_gate(&self, name: &str, operands: &[usize]) -> Result<Gate, IrError> {
        if ir::standard_gate(name).is_some() {
            let mut g = Gate::new(name, operands, None)?;
            self.annotate(&mut g);
            Ok(g)
        } else if self.defines(name) {
            self.custom_gate(name, operands)
        } else {
            Err(IrError::UnknownGate(name.to_string()))
        }
    }

    /// Copies `disable_optimization` from the matching instruction, if any.
    /// Standard gates keep their built-in semantics; config matrices are
    /// only used for custom gates.
    pub fn annotate(&self, gate: &mut Gate) {
        if let Ok(found) = self.lookup_instruction(gate) {
            gate.disable_optimization |= found.def.disable_optimization;
        }
    }

    fn find_rule(&self, gate: &Gate) -> Option<&DecompositionRule> {
        let arity_match = |r: &&DecompositionRule| {
            r.pattern.name == gate.name && r.pattern.operands.len() == gate.operands.len()
        };
        self.decompositions
            .iter()
            .filter(arity_match)
            .find(|r| r.pattern.literal_qubits().as_deref() == Some(gate.operands.as_slice()))
            .or_else(|| self.decompositions.iter().find(arity_match))
    }

    pub fn has_rule_for(&self, gate: &Gate) -> bool {
        self.find_rule(gate).is_some()
    }

    /// Expands `gate` through `gate_decomposition` until no rule applies.
    ///
    /// Rule operands are placeholders bound positionally to the gate's
    /// operands. A rule whose literal qubits equal the gate's operands is
    /// preferred over one that merely matches name and arity. Gates without a
    /// matching rule are returned unchanged.
    pub fn apply_custom_decomposition(&self, gate: &Gate) -> Result<Vec<Gate>, PlatformError> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.expand(gate, &mut stack, &mut out)?;
        Ok(out)
    }

    fn expand(
        &self,
        gate: &Gate,
        stack: &mut Vec<String>,
        out: &mut Vec<Gate>,
    ) -> Result<(), PlatformError> {
        let Some(rule) = self.find_rule(gate) else {
            out.push(gate.clone());
            return Ok(());
        };
        if stack.contains(&rule.key) || stack.len() >= DECOMPOSITION_DEPTH_LIMIT {
            return Err(PlatformError::DecompositionCycle(rule.key.clone()));
        }
        stack.push(rule.key.clone());
        for item in &rule.body {
            let mut ops = Vec::with_capacity(item.operands.len());
            for label in &item.operands {
                let pos = rule
                    .pattern
                    .operands
                    .iter()
                    .position(|p| p == label)
                    .ok_or_else(|| PlatformError::UnboundOperand {
                        rule: rule.key.clone(),
                        operand: label.clone(),
                    })?;
                ops.push(gate.operands[pos]);
            }
            let g = self.make_gate(&item.name, &ops)?;
            self.expand(&g, stack, out)?;
        }
        stack.pop();
        Ok(())
    }

    /// Resource claims of `gate`: explicit `uses` of its instruction, plus one
    /// unit of every resource whose `types` list includes the instruction type.
    pub fn resource_claims(&self, gate: &Gate) -> Vec<ResourceClaim> {
        let Ok(found) = self.lookup_instruction(gate) else {
            return Vec::new();
        };
        let mut claims = found.def.uses.clone();
        for (name, res) in &self.resources.resources {
            if res.types.contains(&found.def.kind) && !claims.iter().any(|c| &c.resource == name) {
                claims.push(ResourceClaim {
                    resource: name.clone(),
                    units: 1,
                });
            }
        }
        claims
    }

    /// Instruction type of `gate`, `None` when undefined.
    pub fn gate_type(&self, gate: &Gate) -> InstructionType {
        self.lookup_instruction(gate)
            .map_or(InstructionType::None, |f| f.def.kind)
    }

    /// Buffer between a gate of type `prev` and a following gate of type
    /// `next` on the same qubit, in ns. `"<prev>_<next>_buffer"` is used when
    /// present, otherwise the mirrored key.
    pub fn buffer_ns(&self, prev: InstructionType, next: InstructionType) -> u64 {
        let key = format!("{prev}_{next}_buffer");
        let mirrored = format!("{next}_{prev}_buffer");
        self.buffers
            .get(&key)
            .or_else(|| self.buffers.get(&mirrored))
            .copied()
            .unwrap_or(0)
    }

    pub fn buffer_cycles(&self, prev: InstructionType, next: InstructionType) -> u32 {
        self.buffer_ns(prev, next).div_ceil(self.cycle_time_ns) as u32
    }

    /// Re-serializes every recognized field plus the preserved opaque ones.
    pub fn to_json(&self) -> Value {
        let mut hw = Map::new();
        hw.insert("qubit_number".into(), json!(self.qubit_number));
        hw.insert("cycle_time".into(), json!(self.cycle_time_ns));
        for (k, v) in &self.buffers {
            hw.insert(k.clone(), json!(v));
        }
        for (k, v) in &self.hardware_extra {
            hw.insert(k.clone(), v.clone());
        }
        let mut instructions = Map::new();
        for (key, def) in &self.instructions {
            let mut o = Map::new();
            o.insert("duration".into(), json!(def.duration_ns));
            o.insert("latency".into(), json!(def.latency_ns));
            o.insert("qubits".into(), json!(def.qubits));
            if let Some(m) = &def.matrix {
                let flat: Vec<Value> = m
                    .as_matrix()
                    .transpose()
                    .iter()
                    .map(|z| json!([z.re, z.im]))
                    .collect();
                o.insert("matrix".into(), Value::Array(flat));
            }
            o.insert(
                "disable_optimization".into(),
                json!(def.disable_optimization),
            );
            o.insert("type".into(), json!(def.kind.as_str()));
            if !def.uses.is_empty() {
                let uses: Vec<Value> = def
                    .uses
                    .iter()
                    .map(|c| json!({"resource": c.resource, "units": c.units}))
                    .collect();
                o.insert("uses".into(), Value::Array(uses));
            }
            for (k, v) in &def.backend_opaque {
                o.insert(k.clone(), v.clone());
            }
            instructions.insert(key.clone(), Value::Object(o));
        }
        let mut decomp = Map::new();
        for rule in &self.decompositions {
            let body: Vec<Value> = rule.body.iter().map(|g| json!(g.to_string())).collect();
            decomp.insert(rule.key.clone(), Value::Array(body));
        }
        let mut resources = Map::new();
        for (name, r) in &self.resources.resources {
            let mut o = Map::new();
            o.insert("count".into(), json!(r.count));
            if !r.types.is_empty() {
                let types: Vec<&str> = r.types.iter().map(|t| t.as_str()).collect();
                o.insert("types".into(), json!(types));
            }
            resources.insert(name.clone(), Value::Object(o));
        }
        let topology = match &self.topology {
            Some(t) => {
                let edges: Vec<Value> = t.edges().iter().map(|&(a, b)| json!([a, b])).collect();
                json!({"qubit_count": t.qubit_count, "edges": edges})
            }
            None => json!({}),
        };
        json!({
            "eqasm_compiler": self.eqasm_compiler,
            "hardware_settings": hw,
            "instructions": instructions,
            "gate_decomposition": decomp,
            "resources": resources,
            "topology": topology,
        })
    }
}

fn positive_int(obj: &Map<String, Value>, section: &str, key: &str) -> Result<u64, PlatformError> {
    let path = format!("{section}.{key}");
    let v = obj
        .get(key)
        .ok_or_else(|| schema(&path, "missing required field"))?
        .as_u64()
        .ok_or_else(|| schema(&path, "expected a positive integer"))?;
    if v == 0 {
        return Err(schema(&path, "must be positive"));
    }
    Ok(v)
}

fn parse_instruction(path: &str, v: &Value) -> Result<InstructionDef, PlatformError> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema(path, "expected an object"))?;
    let duration_ns = positive_int(obj, path, "duration")?;
    let latency_ns = match obj.get("latency") {
        Some(l) => l
            .as_i64()
            .ok_or_else(|| schema(format!("{path}.latency"), "expected an integer"))?,
        None => 0,
    };
    let qubits = match obj.get("qubits") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|q| {
                q.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| schema(format!("{path}.qubits"), "expected strings"))
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema(format!("{path}.qubits"), "expected a list")),
        None => Vec::new(),
    };
    let matrix = match obj.get("matrix") {
        Some(m) => Some(Arc::new(parse_matrix(&format!("{path}.matrix"), m)?)),
        None => None,
    };
    let disable_optimization = match obj.get("disable_optimization") {
        Some(b) => b
            .as_bool()
            .ok_or_else(|| schema(format!("{path}.disable_optimization"), "expected a boolean"))?,
        None => false,
    };
    let kind = match obj.get("type") {
        Some(t) => {
            let s = t
                .as_str()
                .ok_or_else(|| schema(format!("{path}.type"), "expected a string"))?;
            InstructionType::parse(s).ok_or_else(|| {
                schema(
                    format!("{path}.type"),
                    format!("`{s}` is not one of mw, flux, readout, none"),
                )
            })?
        }
        None => InstructionType::None,
    };
    let uses = match obj.get("uses") {
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, u)| parse_claim(&format!("{path}.uses[{i}]"), u))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema(format!("{path}.uses"), "expected a list")),
        None => Vec::new(),
    };
    let known: HashSet<&str> = [
        "duration",
        "latency",
        "qubits",
        "matrix",
        "disable_optimization",
        "type",
        "uses",
    ]
    .into_iter()
    .collect();
    let backend_opaque = obj
        .iter()
        .filter(|(k, _)| !known.contains(k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(InstructionDef {
        duration_ns,
        latency_ns,
        qubits,
        matrix,
        disable_optimization,
        kind,
        uses,
        backend_opaque,
    })
}

fn parse_claim(path: &str, v: &Value) -> Result<ResourceClaim, PlatformError> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema(path, "expected an object"))?;
    let resource = obj
        .get("resource")
        .and_then(Value::as_str)
        .ok_or_else(|| schema(format!("{path}.resource"), "expected a string"))?
        .to_string();
    let units = match obj.get("units") {
        Some(u) => u
            .as_u64()
            .ok_or_else(|| schema(format!("{path}.units"), "expected a non-negative integer"))?
            as u32,
        None => 1,
    };
    Ok(ResourceClaim { resource, units })
}

/// Flat row-major list of `[re, im]` pairs.
fn parse_matrix(path: &str, v: &Value) -> Result<UnitaryMatrix, PlatformError> {
    let items = v
        .as_array()
        .ok_or_else(|| schema(path, "expected a list of [re, im] pairs"))?;
    let mut entries = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let pair = item.as_array().filter(|p| p.len() == 2);
        let (re, im) = match pair.map(|p| (p[0].as_f64(), p[1].as_f64())) {
            Some((Some(re), Some(im))) => (re, im),
            _ => return Err(schema(format!("{path}[{i}]"), "expected [re, im]")),
        };
        entries.push(Complex64::new(re, im));
    }
    let dim = (entries.len() as f64).sqrt().round() as usize;
    if dim * dim != entries.len() || !dim.is_power_of_two() || dim < 2 {
        return Err(invalid(
            path,
            format!("{} entries do not form a 2^k x 2^k matrix", entries.len()),
        ));
    }
    let m = DMatrix::from_row_slice(dim, dim, &entries);
    UnitaryMatrix::with_tolerance(m, CONFIG_MATRIX_TOL).map_err(|e| invalid(path, e.to_string()))
}

fn parse_resources(v: &Value) -> Result<ResourceModel, PlatformError> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema("resources", "expected an object"))?;
    let mut model = ResourceModel::default();
    for (name, r) in obj {
        let path = format!("resources.{name}");
        let ro = r
            .as_object()
            .ok_or_else(|| schema(&path, "expected an object"))?;
        let count = positive_int(ro, &path, "count")?;
        let types = match ro.get("types") {
            Some(Value::Array(items)) => items
                .iter()
                .map(|t| {
                    t.as_str().and_then(InstructionType::parse).ok_or_else(|| {
                        schema(format!("{path}.types"), "expected instruction type names")
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            Some(_) => return Err(schema(format!("{path}.types"), "expected a list")),
            None => Vec::new(),
        };
        model.resources.insert(
            name.clone(),
            Resource {
                count: count as u32,
                types,
            },
        );
    }
    Ok(model)
}

fn parse_topology(v: &Value) -> Result<Option<Topology>, PlatformError> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema("topology", "expected an object"))?;
    if obj.is_empty() {
        return Ok(None);
    }
    let qubit_count = positive_int(obj, "topology", "qubit_count")? as usize;
    let items = obj
        .get("edges")
        .ok_or_else(|| schema("topology.edges", "missing required field"))?
        .as_array()
        .ok_or_else(|| schema("topology.edges", "expected a list"))?;
    let mut edges = Vec::with_capacity(items.len());
    for (i, e) in items.iter().enumerate() {
        let pair = e
            .as_array()
            .filter(|p| p.len() == 2)
            .and_then(|p| Some((p[0].as_u64()? as usize, p[1].as_u64()? as usize)))
            .ok_or_else(|| schema(format!("topology.edges[{i}]"), "expected [a, b]"))?;
        edges.push(pair);
    }
    Topology::new(qubit_count, &edges).map(Some)
}

/// The configuration listing shipped with the crate (two transmon qubits).
pub const EXAMPLE_CONFIG: &str = include_str!("../data/hardware_config.json");

pub fn example_platform() -> Platform {
    Platform::load("transmon", EXAMPLE_CONFIG).expect("bundled config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"eqasm_compiler": "none",
                "hardware_settings": {{"qubit_number": 3, "cycle_time": 10}},
                "instructions": {{"a": {{"duration": 20}}}}{extra}}}"#
        )
    }

    #[test]
    fn loads_bundled_listing() {
        let p = example_platform();
        assert_eq!(p.eqasm_compiler, "qumis_compiler");
        assert_eq!(p.qubit_number, 2);
        assert_eq!(p.cycle_time_ns, 5);
        let rx = p.instruction("rx180 q1").unwrap();
        assert_eq!(rx.duration_ns, 40);
        assert_eq!(rx.latency_ns, 20);
        assert_eq!(rx.kind, InstructionType::Mw);
        assert_eq!(rx.backend_opaque["qumis_instr"], json!("pulse"));
        assert!(p.instruction("prepz q0").unwrap().disable_optimization);
    }

    #[test]
    fn missing_hardware_settings() {
        let doc = r#"{"eqasm_compiler": "x", "instructions": {}}"#;
        assert!(matches!(
            Platform::load("p", doc),
            Err(PlatformError::Schema { path, .. }) if path == "hardware_settings"
        ));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Platform::load("p", "{\n  \"eqasm_compiler\": ,\n}").unwrap_err();
        assert!(
            matches!(err, PlatformError::Parse { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn wrong_type_is_schema_error() {
        let doc = r#"{"eqasm_compiler": "x", "hardware_settings": {"qubit_number": "two", "cycle_time": 5}, "instructions": {}}"#;
        assert!(matches!(
            Platform::load("p", doc),
            Err(PlatformError::Schema { .. })
        ));
        let doc = minimal("").replace("\"duration\": 20", "\"duration\": 20, \"type\": \"laser\"");
        assert!(matches!(
            Platform::load("p", &doc),
            Err(PlatformError::Schema { .. })
        ));
    }

    #[test]
    fn decomposition_must_reference_defined_gates() {
        let doc = minimal(r#", "gate_decomposition": {"h q0": ["nope q0"]}"#);
        assert!(matches!(
            Platform::load("p", &doc),
            Err(PlatformError::Validation { .. })
        ));
    }

    #[test]
    fn topology_edge_out_of_range() {
        let doc = minimal(r#", "topology": {"qubit_count": 3, "edges": [[0, 3]]}"#);
        assert!(matches!(
            Platform::load("p", &doc),
            Err(PlatformError::Validation { .. })
        ));
        let doc = minimal(r#", "topology": {"qubit_count": 3, "edges": [[1, 1]]}"#);
        assert!(Platform::load("p", &doc).is_err());
    }

    #[test]
    fn lookup_specialized_then_generic() {
        let p = example_platform();
        let g0 = Gate::simple("rx180", &[0]);
        let found = p.lookup_instruction(&g0).unwrap();
        assert_eq!(found.key, "rx180 q0");
        assert_eq!(
            found.def.backend_opaque["qumis_instr"],
            json!("codeword_trigger")
        );
        let found = p.lookup_instruction(&Gate::simple("rx180", &[1])).unwrap();
        assert_eq!(found.key, "rx180 q1");
        assert_eq!(found.def.latency_ns, 20);
        assert_eq!(found.duration_cycles, 8);

        let doc = minimal("");
        let p = Platform::load("p", &doc).unwrap();
        let g = p.custom_gate("a", &[2]).unwrap();
        let found = p.lookup_instruction(&g).unwrap();
        assert_eq!(found.key, "a");
        assert_eq!(found.duration_cycles, 2);
    }

    #[test]
    fn lookup_unknown() {
        let p = example_platform();
        let g = Gate::custom("foo", &[0], None).unwrap();
        assert!(matches!(
            p.lookup_instruction(&g),
            Err(PlatformError::UnknownInstruction(k)) if k == "foo q0"
        ));
    }

    #[test]
    fn duration_rounds_up() {
        let def = |ns| InstructionDef {
            duration_ns: ns,
            latency_ns: 0,
            qubits: vec![],
            matrix: None,
            disable_optimization: false,
            kind: InstructionType::None,
            uses: vec![],
            backend_opaque: Map::new(),
        };
        assert_eq!(def(40).duration_cycles(5), 8);
        assert_eq!(def(41).duration_cycles(5), 9);
        assert_eq!(def(1).duration_cycles(20), 1);
    }

    #[test]
    fn decomposition_rules_from_listing() {
        let p = example_platform();
        let out = p.apply_custom_decomposition(&Gate::cnot(0, 1)).unwrap();
        let text: Vec<String> = out.iter().map(|g| g.to_string()).collect();
        assert_eq!(text, ["ry90 q[1]", "cz q[0],q[1]", "ry90 q[1]"]);
        let out = p
            .apply_custom_decomposition(&Gate::simple("z", &[0]))
            .unwrap();
        let text: Vec<String> = out.iter().map(|g| g.to_string()).collect();
        assert_eq!(text, ["ry180 q[0]", "rx180 q[0]"]);
        let out = p
            .apply_custom_decomposition(&Gate::simple("h", &[0]))
            .unwrap();
        assert_eq!(out[0].name, "ry90");
    }

    #[test]
    fn decomposition_binds_operands_positionally() {
        let p = example_platform();
        let out = p.apply_custom_decomposition(&Gate::cnot(1, 0)).unwrap();
        let text: Vec<String> = out.iter().map(|g| g.to_string()).collect();
        assert_eq!(text, ["ry90 q[0]", "cz q[1],q[0]", "ry90 q[0]"]);
    }

    #[test]
    fn decomposition_cycle_detected() {
        let doc = minimal(r#", "gate_decomposition": {"a q0": ["a q0"]}"#);
        let p = Platform::load("p", &doc).unwrap();
        let g = p.make_gate("a", &[0]).unwrap();
        assert!(matches!(
            p.apply_custom_decomposition(&g),
            Err(PlatformError::DecompositionCycle(_))
        ));
        let doc = minimal(r#", "gate_decomposition": {"b q0": ["c q0"], "c q0": ["b q0"]}"#);
        let p = Platform::load("p", &doc).unwrap();
        let g = p.make_gate("b", &[1]).unwrap();
        assert!(matches!(
            p.apply_custom_decomposition(&g),
            Err(PlatformError::DecompositionCycle(_))
        ));
    }

    #[test]
    fn decomposition_unbound_operand() {
        let doc = minimal(r#", "gate_decomposition": {"b q0": ["x q1"]}"#);
        let p = Platform::load("p", &doc).unwrap();
        let g = p.make_gate("b", &[0]).unwrap();
        assert!(matches!(
            p.apply_custom_decomposition(&g),
            Err(PlatformError::UnboundOperand { .. })
        ));
    }

    #[test]
    fn nested_rules_expand_to_fixpoint() {
        let doc = minimal(
            r#", "gate_decomposition": {"b q0,q1": ["c q1", "cz q0,q1"], "c q0": ["x q0", "a q0"]}"#,
        );
        let p = Platform::load("p", &doc).unwrap();
        let g = p.make_gate("b", &[2, 0]).unwrap();
        let out = p.apply_custom_decomposition(&g).unwrap();
        let text: Vec<String> = out.iter().map(|g| g.to_string()).collect();
        assert_eq!(text, ["x q[0]", "a q[0]", "cz q[2],q[0]"]);
    }

    #[test]
    fn resources_and_claims() {
        let doc = r#"{"eqasm_compiler": "x",
            "hardware_settings": {"qubit_number": 2, "cycle_time": 10, "mw_flux_buffer": 15},
            "instructions": {
                "x": {"duration": 20, "type": "mw"},
                "cz": {"duration": 40, "type": "flux", "uses": [{"resource": "flux", "units": 2}]}
            },
            "resources": {"awg": {"count": 1, "types": ["mw"]}, "flux": {"count": 2}}}"#;
        let p = Platform::load("p", doc).unwrap();
        let claims = p.resource_claims(&Gate::simple("x", &[0]));
        assert_eq!(
            claims,
            vec![ResourceClaim {
                resource: "awg".into(),
                units: 1
            }]
        );
        let claims = p.resource_claims(&Gate::simple("cz", &[0, 1]));
        assert_eq!(
            claims,
            vec![ResourceClaim {
                resource: "flux".into(),
                units: 2
            }]
        );
        assert_eq!(
            p.buffer_cycles(InstructionType::Mw, InstructionType::Flux),
            2
        );
        assert_eq!(
            p.buffer_cycles(InstructionType::Flux, InstructionType::Mw),
            2
        );
        assert_eq!(p.buffer_cycles(InstructionType::Mw, InstructionType::Mw), 0);

        let bad = doc.replace("\"resource\": \"flux\"", "\"resource\": \"nope\"");
        assert!(matches!(
            Platform::load("p", &bad),
            Err(PlatformError::Validation { .. })
        ));
    }

    #[test]
    fn round_trip_is_lossless() {
        let p = example_platform();
        let text = serde_json::to_string_pretty(&p.to_json()).unwrap();
        let q = Platform::load("transmon", &text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn negative_latency_accepted() {
        let doc = minimal("").replace("\"duration\": 20", "\"duration\": 20, \"latency\": -15");
        let p = Platform::load("p", &doc).unwrap();
        assert_eq!(p.instruction("a").unwrap().latency_ns, -15);
    }
}

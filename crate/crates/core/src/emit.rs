// SPDX-License-Identifier: Apache-2.0

//! cQASM text emission and parsing, and latency-compensated timing traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};
use thiserror::Error;

use crate::ir::{canonical_name, standard_gate, Gate, IrError, Kernel, Program};
use crate::platform::{InstructionType, Platform};
use crate::schedule::Schedule;

const INDENT: &str = "    ";

/// Renders `program`. With `schedules` (one per kernel), gates are grouped
/// into bundles by start cycle; otherwise runs of the same one-qubit gate on
/// consecutive qubits collapse into range form.
pub fn emit_cqasm(program: &Program, schedules: Option<&[Schedule]>) -> String {
    let mut out = String::new();
    out.push_str("version 1.0\n");
    let _ = writeln!(out, "qubits {}", program.qubit_count);
    for (k, kernel) in program.kernels().iter().enumerate() {
        out.push('\n');
        match kernel.iterations {
            Some(n) => {
                let _ = writeln!(out, ".{}({n})", kernel.name);
            }
            None => {
                let _ = writeln!(out, ".{}", kernel.name);
            }
        }
        match schedules.and_then(|s| s.get(k)) {
            Some(schedule) => emit_bundles(&mut out, schedule),
            None => emit_ranges(&mut out, kernel.gates()),
        }
        if kernel.display {
            let _ = writeln!(out, "{INDENT}display");
        }
    }
    out
}

fn emit_bundles(out: &mut String, schedule: &Schedule) {
    for members in schedule.bundles().values() {
        let texts: Vec<String> = members
            .iter()
            .map(|&i| schedule.entries[i].gate.to_string())
            .collect();
        if texts.len() == 1 {
            let _ = writeln!(out, "{INDENT}{}", texts[0]);
        } else {
            let _ = writeln!(out, "{INDENT}{{ {} }}", texts.join(" | "));
        }
    }
}

fn rangeable(g: &Gate) -> bool {
    g.operands.len() == 1 && g.angle.is_none()
}

fn emit_ranges(out: &mut String, gates: &[Gate]) {
    let mut i = 0;
    while i < gates.len() {
        let g = &gates[i];
        let mut j = i + 1;
        if rangeable(g) {
            while j < gates.len()
                && rangeable(&gates[j])
                && gates[j].name == g.name
                && gates[j].operands[0] == g.operands[0] + (j - i)
            {
                j += 1;
            }
        }
        if j - i >= 2 {
            let _ = writeln!(
                out,
                "{INDENT}{} q[{}:{}]",
                g.name,
                g.operands[0],
                g.operands[0] + (j - i - 1)
            );
        } else {
            let _ = writeln!(out, "{INDENT}{g}");
        }
        i = j;
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Reads the cQASM subset written by [`emit_cqasm`]. Bundles are flattened
/// in textual order, ranges are expanded, and gates before the first
/// section go into a kernel named `main`. Names outside the standard set
/// are accepted when `platform` defines them.
pub fn parse_cqasm(
    text: &str,
    name: &str,
    platform: Option<&Platform>,
) -> Result<Program, ParseError> {
    let mut qubits: Option<usize> = None;
    let mut kernels: Vec<Kernel> = Vec::new();
    let mut saw_version = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("version") {
            if saw_version || qubits.is_some() {
                return Err(ParseError::new(line_no, "unexpected version line"));
            }
            if rest.trim().is_empty() {
                return Err(ParseError::new(line_no, "missing version number"));
            }
            saw_version = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("qubits") {
            if qubits.is_some() {
                return Err(ParseError::new(line_no, "qubit count declared twice"));
            }
            let n = rest.trim().parse::<usize>().map_err(|_| {
                ParseError::new(line_no, format!("bad qubit count `{}`", rest.trim()))
            })?;
            qubits = Some(n);
            continue;
        }
        let n = qubits.ok_or_else(|| ParseError::new(line_no, "statement before `qubits`"))?;
        if let Some(header) = line.strip_prefix('.') {
            kernels.push(parse_section(header, n, line_no)?);
            continue;
        }
        if kernels.is_empty() {
            kernels.push(Kernel::new("main", n));
        }
        let kernel = kernels.last_mut().expect("at least one kernel");
        if line == "display" {
            kernel.display = true;
            continue;
        }
        if kernel.display {
            return Err(ParseError::new(line_no, "gate after `display`"));
        }
        let statements: Vec<&str> = match line.strip_prefix('{') {
            Some(body) => body
                .strip_suffix('}')
                .ok_or_else(|| ParseError::new(line_no, "unterminated bundle"))?
                .split('|')
                .map(str::trim)
                .collect(),
            None => vec![line],
        };
        for stmt in statements {
            for gate in parse_gate(stmt, platform, line_no)? {
                kernel
                    .push(gate)
                    .map_err(|e| ParseError::new(line_no, e.to_string()))?;
            }
        }
    }
    let n = qubits.ok_or_else(|| ParseError::new(0, "missing `qubits` declaration"))?;
    let mut program = Program::new(name, n, None);
    for k in kernels {
        program
            .add_kernel(k)
            .map_err(|e| ParseError::new(0, e.to_string()))?;
    }
    Ok(program)
}

fn parse_section(header: &str, n: usize, line_no: usize) -> Result<Kernel, ParseError> {
    let (name, iterations) = match header.split_once('(') {
        Some((name, rest)) => {
            let count = rest
                .strip_suffix(')')
                .and_then(|c| c.trim().parse::<u32>().ok())
                .ok_or_else(|| {
                    ParseError::new(line_no, format!("bad iteration count in `.{header}`"))
                })?;
            (name.trim(), Some(count))
        }
        None => (header.trim(), None),
    };
    let valid = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if !valid {
        return Err(ParseError::new(
            line_no,
            format!("bad section name `{name}`"),
        ));
    }
    let mut k = Kernel::new(name, n);
    k.iterations = iterations;
    Ok(k)
}

fn parse_qubit(token: &str, line_no: usize) -> Result<(usize, usize), ParseError> {
    let inner = token
        .trim()
        .strip_prefix("q[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| ParseError::new(line_no, format!("bad operand `{}`", token.trim())))?;
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| ParseError::new(line_no, format!("bad qubit index `{s}`")))
    };
    match inner.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if b < a {
                return Err(ParseError::new(line_no, format!("empty range q[{a}:{b}]")));
            }
            Ok((a, b))
        }
        None => {
            let q = num(inner)?;
            Ok((q, q))
        }
    }
}

fn parse_gate(
    stmt: &str,
    platform: Option<&Platform>,
    line_no: usize,
) -> Result<Vec<Gate>, ParseError> {
    let (name, rest) = stmt
        .split_once(char::is_whitespace)
        .ok_or_else(|| ParseError::new(line_no, format!("gate `{stmt}` has no operands")))?;
    let name = canonical_name(name);
    let mut operands = Vec::new();
    let mut angle = None;
    let mut ranged = None;
    for (i, tok) in rest.split(',').enumerate() {
        let tok = tok.trim();
        if tok.starts_with("q[") {
            if angle.is_some() {
                return Err(ParseError::new(line_no, "operand after angle"));
            }
            let (a, b) = parse_qubit(tok, line_no)?;
            if a != b {
                if i != 0 || ranged.is_some() {
                    return Err(ParseError::new(
                        line_no,
                        "ranges only apply to one-operand gates",
                    ));
                }
                ranged = Some((a, b));
            }
            operands.push(a);
        } else {
            let value = tok
                .parse::<f64>()
                .map_err(|_| ParseError::new(line_no, format!("bad angle `{tok}`")))?;
            if angle.replace(value).is_some() {
                return Err(ParseError::new(line_no, "more than one angle"));
            }
        }
    }
    if ranged.is_some() && operands.len() != 1 {
        return Err(ParseError::new(
            line_no,
            "ranges only apply to one-operand gates",
        ));
    }
    let build = |ops: &[usize]| -> Result<Gate, ParseError> {
        let r: Result<Gate, IrError> = if standard_gate(&name).is_some() {
            Gate::new(&name, ops, angle).map(|mut g| {
                if let Some(p) = platform {
                    p.annotate(&mut g);
                }
                g
            })
        } else {
            match platform {
                Some(p) if p.defines(&name) && angle.is_none() => p.custom_gate(&name, ops),
                _ => Err(IrError::UnknownGate(name.clone())),
            }
        };
        r.map_err(|e| ParseError::new(line_no, e.to_string()))
    };
    match ranged {
        Some((a, b)) => (a..=b).map(|q| build(&[q])).collect(),
        None => Ok(vec![build(&operands)?]),
    }
}

/// One executed instruction in a timing trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub kernel: String,
    pub kernel_index: usize,
    pub gate_index: usize,
    pub instruction: String,
    pub operands: Vec<usize>,
    pub kind: InstructionType,
    pub start_cycle: u64,
    pub nominal_ns: i64,
    pub compensated_ns: i64,
    pub duration_ns: u64,
    pub latency_ns: i64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimingTrace {
    /// Sorted by compensated start, then by record creation order.
    pub records: Vec<TimingRecord>,
    /// Amount added to every compensated start to keep them non-negative.
    pub shift_ns: i64,
    /// Same-qubit pairs whose order latency compensation reversed.
    pub anomalies: Vec<String>,
}

/// Timing trace of a single scheduled kernel.
pub fn emit_timing_trace(schedule: &Schedule, platform: &Platform) -> TimingTrace {
    timing_trace_for_kernels(&[("main", schedule)], platform)
}

/// Timing trace of consecutive kernels; each kernel starts where the
/// previous one's makespan ends.
pub fn timing_trace_for_kernels(kernels: &[(&str, &Schedule)], platform: &Platform) -> TimingTrace {
    let cycle = platform.cycle_time_ns;
    let mut records = Vec::new();
    let mut offset = 0u64;
    for (k, (name, schedule)) in kernels.iter().enumerate() {
        for (i, e) in schedule.entries.iter().enumerate() {
            let found = platform.lookup_instruction(&e.gate).ok();
            let latency_ns = found.as_ref().map_or(0, |f| f.def.latency_ns);
            let duration_ns = found
                .as_ref()
                .map_or(u64::from(e.duration) * cycle, |f| f.def.duration_ns);
            let kind = found.map_or(InstructionType::None, |f| f.def.kind);
            let start_cycle = offset + u64::from(e.start);
            let nominal_ns = (start_cycle * cycle) as i64;
            records.push(TimingRecord {
                kernel: name.to_string(),
                kernel_index: k,
                gate_index: i,
                instruction: e.gate.to_string(),
                operands: e.gate.operands.clone(),
                kind,
                start_cycle,
                nominal_ns,
                compensated_ns: nominal_ns - latency_ns,
                duration_ns,
                latency_ns,
            });
        }
        offset += u64::from(schedule.makespan);
    }
    let min = records.iter().map(|r| r.compensated_ns).min().unwrap_or(0);
    let shift_ns = (-min).max(0);
    for r in &mut records {
        r.compensated_ns += shift_ns;
    }
    let anomalies = reorder_anomalies(&records);
    records.sort_by_key(|r| r.compensated_ns);
    TimingTrace {
        records,
        shift_ns,
        anomalies,
    }
}

/// Records are in program order here; per qubit, a later operation must
/// not start before an earlier one after compensation.
fn reorder_anomalies(records: &[TimingRecord]) -> Vec<String> {
    let mut last: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| (records[i].nominal_ns, i));
    for i in order {
        let r = &records[i];
        for &q in &r.operands {
            if let Some(&p) = last.get(&q) {
                let prev = &records[p];
                if r.compensated_ns < prev.compensated_ns {
                    out.push(format!(
                        "q[{q}]: `{}` ({} ns) now starts before `{}` ({} ns)",
                        r.instruction, r.compensated_ns, prev.instruction, prev.compensated_ns
                    ));
                }
            }
            last.insert(q, i);
        }
    }
    out
}

impl TimingTrace {
    pub const TSV_HEADER: &'static str =
        "kernel\tgate\tinstruction\ttype\tcycle\tnominal_ns\tcompensated_ns\tduration_ns\tlatency_ns";

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(Self::TSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.kernel,
                r.gate_index,
                r.instruction,
                r.kind,
                r.start_cycle,
                r.nominal_ns,
                r.compensated_ns,
                r.duration_ns,
                r.latency_ns
            );
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let records: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                json!({
                    "kernel": r.kernel,
                    "kernel_index": r.kernel_index,
                    "gate_index": r.gate_index,
                    "instruction": r.instruction,
                    "qubits": r.operands,
                    "type": r.kind.as_str(),
                    "cycle": r.start_cycle,
                    "nominal_ns": r.nominal_ns,
                    "compensated_ns": r.compensated_ns,
                    "duration_ns": r.duration_ns,
                    "latency_ns": r.latency_ns,
                })
            })
            .collect();
        json!({
            "shift_ns": self.shift_ns,
            "records": records,
            "anomalies": self.anomalies,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::example_platform;
    use crate::schedule::{schedule_alap, ScheduledGate};

    fn bell() -> Program {
        let mut p = Program::new("bell_pair", 2, None);
        let mut k1 = Kernel::new("init", 2);
        k1.prepz(0).unwrap().prepz(1).unwrap();
        let mut k2 = Kernel::new("epr", 2);
        k2.hadamard(0).unwrap().cnot(0, 1).unwrap();
        let mut k3 = Kernel::new("measure", 2);
        k3.measure(0).unwrap().measure(1).unwrap();
        p.add_kernel(k1)
            .unwrap()
            .add_kernel(k2)
            .unwrap()
            .add_kernel(k3)
            .unwrap();
        p
    }

    #[test]
    fn bell_text() {
        let text = emit_cqasm(&bell(), None);
        assert_eq!(
            text,
            "version 1.0\nqubits 2\n\n.init\n    prepz q[0:1]\n\n.epr\n    h q[0]\n    cnot q[0],q[1]\n\n.measure\n    measure q[0:1]\n"
        );
    }

    #[test]
    fn bundles_and_ranges() {
        let mut p = Program::new("p", 5, None);
        let mut k = Kernel::new("init", 5);
        for q in 0..4 {
            k.hadamard(q).unwrap();
        }
        p.add_kernel(k.clone()).unwrap();
        let s = schedule_alap(k.gates(), None);
        let text = emit_cqasm(&p, Some(&[s]));
        assert!(text.contains("    { h q[0] | h q[1] | h q[2] | h q[3] }\n"));
        let text = emit_cqasm(&p, None);
        assert!(text.contains("    h q[0:3]\n"));
    }

    #[test]
    fn ranges_need_contiguity() {
        let gates = vec![
            Gate::simple("h", &[0]),
            Gate::simple("h", &[2]),
            Gate::simple("x", &[3]),
            Gate::simple("x", &[4]),
            Gate::rotation(crate::ir::Axis::Z, 0, 0.5),
        ];
        let mut out = String::new();
        emit_ranges(&mut out, &gates);
        assert_eq!(
            out,
            "    h q[0]\n    h q[2]\n    x q[3:4]\n    rz q[0], 0.5\n"
        );
    }

    #[test]
    fn round_trip() {
        let mut p = bell();
        p.kernels_mut()[1].iterations = Some(3);
        p.kernels_mut()[2].display = true;
        let text = emit_cqasm(&p, None);
        let back = parse_cqasm(&text, "bell_pair", None).unwrap();
        assert_eq!(back.kernels(), p.kernels());
        assert_eq!(emit_cqasm(&back, None), text);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_cqasm("version 1.0\nh q[0]\n", "p", None).is_err());
        let e = parse_cqasm("qubits 2\n.k\nfoo q[0]\n", "p", None).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(parse_cqasm("qubits 2\n.k\nh q[2]\n", "p", None).is_err());
        assert!(parse_cqasm("qubits 2\n.k\n{ h q[0] | h q[1]\n", "p", None).is_err());
        assert!(parse_cqasm("qubits 2\n.k(x)\n", "p", None).is_err());
        assert!(parse_cqasm("qubits 2\n.k\nrz q[0]\n", "p", None).is_err());
    }

    #[test]
    fn parses_grover_fragment() {
        let text = "version 1.0\n# comment\nqubits 9\n.init\n  x q[4]    # oracle qubit\n  h q[0:4]\n.grover(3)\n  { h q[0] | h q[1] }\n  toffoli q[0],q[1],q[5]\n  display\n";
        let p = parse_cqasm(text, "grover", None).unwrap();
        assert_eq!(p.kernels()[0].gates().len(), 6);
        assert_eq!(p.kernels()[1].iterations, Some(3));
        assert!(p.kernels()[1].display);
    }

    #[test]
    fn timing_single_gate() {
        let platform = example_platform();
        let gate = platform.custom_gate("rx180", &[1]).unwrap();
        let schedule = Schedule {
            entries: vec![ScheduledGate {
                gate,
                start: 4,
                duration: 8,
            }],
            makespan: 12,
        };
        let trace = emit_timing_trace(&schedule, &platform);
        let r = &trace.records[0];
        assert_eq!((r.nominal_ns, r.compensated_ns, r.latency_ns), (20, 0, 20));
        assert_eq!(r.kind, InstructionType::Mw);
        assert!(trace.to_tsv().starts_with(TimingTrace::TSV_HEADER));
    }

    #[test]
    fn timing_shift_and_anomaly() {
        let platform = example_platform();
        let a = platform.custom_gate("rx180", &[0]).unwrap();
        let b = platform.custom_gate("rx180", &[1]).unwrap();
        let schedule = Schedule {
            entries: vec![
                ScheduledGate {
                    gate: a,
                    start: 0,
                    duration: 8,
                },
                ScheduledGate {
                    gate: b,
                    start: 0,
                    duration: 8,
                },
            ],
            makespan: 8,
        };
        let trace = emit_timing_trace(&schedule, &platform);
        assert_eq!(trace.shift_ns, 20);
        let starts: Vec<i64> = trace.records.iter().map(|r| r.compensated_ns).collect();
        assert_eq!(starts, vec![0, 10]);
        assert_eq!(trace.records[0].instruction, "rx180 q[1]");
        assert!(trace.anomalies.is_empty());

        // prepz (latency 0) followed by rx180 q0 (latency 10) one cycle later
        let pz = platform.make_gate("prepz", &[0]).unwrap();
        let rx = platform.custom_gate("rx180", &[0]).unwrap();
        let schedule = Schedule {
            entries: vec![
                ScheduledGate {
                    gate: pz,
                    start: 0,
                    duration: 1,
                },
                ScheduledGate {
                    gate: rx,
                    start: 1,
                    duration: 8,
                },
            ],
            makespan: 9,
        };
        let trace = emit_timing_trace(&schedule, &platform);
        assert_eq!(trace.anomalies.len(), 1);
    }
}

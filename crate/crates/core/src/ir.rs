// SPDX-License-Identifier: Apache-2.0

//! Circuit intermediate representation: gates, kernels and programs.
//!
//! Qubit ordering conventions used throughout the crate:
//!
//! * Inside a gate matrix the first operand is the most significant bit of
//!   the local basis index, so `cnot q[a],q[b]` has the familiar
//!   `[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]` matrix with `a` as control.
//! * In a full `n`-qubit state or circuit unitary, qubit `q` is bit `q` of the
//!   basis index (qubit 0 is the least significant bit).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::platform::Platform;

/// Largest register accepted by [`circuit_unitary`].
pub const MAX_UNITARY_QUBITS: usize = 12;

const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IrError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("operand q[{operand}] out of range for {qubit_count} qubits")]
    OperandRange { operand: usize, qubit_count: usize },
    #[error("gate `{name}` repeats operand q[{operand}]")]
    DuplicateOperand { name: String, operand: usize },
    #[error("gate `{0}` requires an angle")]
    MissingAngle(String),
    #[error("gate `{0}` does not take an angle")]
    UnexpectedAngle(String),
    #[error("gate `{name}` expects {expected} operand(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("no unitary matrix available for gate `{0}`")]
    NoMatrixAvailable(String),
    #[error("{0} qubits exceeds the dense-unitary limit of {MAX_UNITARY_QUBITS}")]
    TooManyQubits(usize),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

/// Dense complex matrix of dimension `2^k`, unitary within `1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(DMatrix<Complex64>);

impl UnitaryMatrix {
    /// Wraps `m` after checking that it is square, power-of-two sized and unitary.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self, IrError> {
        Self::with_tolerance(m, UNITARITY_TOL)
    }

    pub fn with_tolerance(m: DMatrix<Complex64>, tol: f64) -> Result<Self, IrError> {
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() {
            return Err(IrError::NotPowerOfTwo(dim.max(m.ncols())));
        }
        let dev = unitarity_deviation(&m);
        if dev > tol {
            return Err(IrError::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    /// Skips the unitarity check; for matrices unitary by construction.
    pub(crate) fn from_trusted(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self, IrError> {
        let dim = rows.len();
        let m = DMatrix::from_fn(dim, dim, |r, c| rows[r].get(c).copied().unwrap_or_default());
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn deviation_from_unitary(&self) -> f64 {
        unitarity_deviation(&self.0)
    }
}

/// Max elementwise |U†U − I|.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let p = m.adjoint() * m;
    let mut dev = 0.0f64;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            let expect = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((p[(r, c)] - Complex64::new(expect, 0.0)).norm());
        }
    }
    dev
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> UnitaryMatrix {
    UnitaryMatrix::from_trusted(DMatrix::from_row_slice(2, 2, &[a, b, cc, d]))
}

pub fn rx_matrix(theta: f64) -> UnitaryMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
}

/// `[[cos θ/2, sin θ/2], [−sin θ/2, cos θ/2]]`; note the sign placement.
pub fn ry_matrix(theta: f64) -> UnitaryMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0))
}

pub fn rz_matrix(theta: f64) -> UnitaryMatrix {
    mat2(
        Complex64::from_polar(1.0, -theta / 2.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        Complex64::from_polar(1.0, theta / 2.0),
    )
}

fn phase_matrix(phi: f64) -> UnitaryMatrix {
    mat2(
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        Complex64::from_polar(1.0, phi),
    )
}

/// Embeds a 2×2 matrix as the target block of a singly controlled gate
/// (control is operand 0).
fn controlled(u: &UnitaryMatrix) -> UnitaryMatrix {
    let mut m = DMatrix::identity(4, 4);
    for r in 0..2 {
        for col in 0..2 {
            m[(2 + r, 2 + col)] = u.get(r, col);
        }
    }
    UnitaryMatrix::from_trusted(m)
}

fn permutation_matrix(dim: usize, map: impl Fn(usize) -> usize) -> UnitaryMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        m[(map(col), col)] = c(1.0, 0.0);
    }
    UnitaryMatrix::from_trusted(m)
}

/// Axis of a rotation gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn gate_name(self) -> &'static str {
        match self {
            Axis::X => "rx",
            Axis::Y => "ry",
            Axis::Z => "rz",
        }
    }

    pub fn matrix(self, theta: f64) -> UnitaryMatrix {
        match self {
            Axis::X => rx_matrix(theta),
            Axis::Y => ry_matrix(theta),
            Axis::Z => rz_matrix(theta),
        }
    }
}

/// Parses fixed-angle rotation names such as `rx180`, `ry90` or `mry90`
/// (angle in degrees, `m` prefix negates).
pub fn named_rotation(name: &str) -> Option<(Axis, f64)> {
    let (neg, rest) = match name.strip_prefix('m') {
        Some(r) => (true, r),
        None => (false, name),
    };
    let rest = rest.strip_prefix('r')?;
    let mut chars = rest.chars();
    let axis = match chars.next()? {
        'x' => Axis::X,
        'y' => Axis::Y,
        'z' => Axis::Z,
        _ => return None,
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let deg: f64 = digits.parse().ok()?;
    let rad = deg.to_radians();
    Some((axis, if neg { -rad } else { rad }))
}

/// Static description of a standard gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandardGate {
    pub arity: usize,
    pub parameterized: bool,
    pub has_matrix: bool,
}

/// Names of the built-in gate set (fixed-angle rotations like `rx180` are
/// accepted in addition to these).
pub const STANDARD_GATES: &[&str] = &[
    "i", "h", "x", "y", "z", "rx", "ry", "rz", "x90", "y90", "mx90", "my90", "s", "sdag", "t",
    "tdag", "cnot", "toffoli", "cz", "swap", "crz", "measure", "prepz",
];

/// Maps API spellings onto canonical gate names.
pub fn canonical_name(name: &str) -> String {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "identity" => "i".into(),
        "hadamard" => "h".into(),
        "cx" => "cnot".into(),
        "ccx" => "toffoli".into(),
        "cphase" => "cz".into(),
        _ => lower,
    }
}

pub fn standard_gate(name: &str) -> Option<StandardGate> {
    let g = |arity, parameterized, has_matrix| {
        Some(StandardGate {
            arity,
            parameterized,
            has_matrix,
        })
    };
    match name {
        "i" | "h" | "x" | "y" | "z" | "x90" | "y90" | "mx90" | "my90" | "s" | "sdag" | "t"
        | "tdag" => g(1, false, true),
        "rx" | "ry" | "rz" => g(1, true, true),
        "cnot" | "cz" | "swap" => g(2, false, true),
        "crz" => g(2, true, true),
        "toffoli" => g(3, false, true),
        "measure" | "prepz" => g(1, false, false),
        _ if named_rotation(name).is_some() => g(1, false, true),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Standard,
    Custom,
    SwapLike,
}

/// One gate instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub operands: Vec<usize>,
    pub angle: Option<f64>,
    /// Filled in from the platform by the scheduler.
    pub duration_cycles: Option<u32>,
    pub kind: GateKind,
    /// Matrix supplied by a platform instruction definition (custom gates).
    pub matrix: Option<Arc<UnitaryMatrix>>,
    /// Set from the platform's `disable_optimization` flag.
    pub disable_optimization: bool,
}

impl Gate {
    /// Builds a standard gate, checking arity, angle presence and operand distinctness.
    pub fn new(name: &str, operands: &[usize], angle: Option<f64>) -> Result<Self, IrError> {
        let name = canonical_name(name);
        let info = standard_gate(&name).ok_or_else(|| IrError::UnknownGate(name.clone()))?;
        if operands.len() != info.arity {
            return Err(IrError::Arity {
                name,
                expected: info.arity,
                got: operands.len(),
            });
        }
        match (info.parameterized, angle) {
            (true, None) => return Err(IrError::MissingAngle(name)),
            (false, Some(_)) => return Err(IrError::UnexpectedAngle(name)),
            _ => {}
        }
        check_distinct(&name, operands)?;
        let kind = if name == "swap" {
            GateKind::SwapLike
        } else {
            GateKind::Standard
        };
        Ok(Self {
            name,
            operands: operands.to_vec(),
            angle,
            duration_cycles: None,
            kind,
            matrix: None,
            disable_optimization: false,
        })
    }

    /// A platform-defined gate. `matrix`, when given, must match the arity.
    pub fn custom(
        name: &str,
        operands: &[usize],
        matrix: Option<Arc<UnitaryMatrix>>,
    ) -> Result<Self, IrError> {
        let name = canonical_name(name);
        check_distinct(&name, operands)?;
        if let Some(m) = &matrix {
            if m.dim() != 1 << operands.len() {
                return Err(IrError::Arity {
                    name,
                    expected: m.qubits(),
                    got: operands.len(),
                });
            }
        }
        Ok(Self {
            name,
            operands: operands.to_vec(),
            angle: None,
            duration_cycles: None,
            kind: GateKind::Custom,
            matrix,
            disable_optimization: false,
        })
    }

    /// Infallible constructor for internally generated single-axis rotations.
    pub fn rotation(axis: Axis, qubit: usize, theta: f64) -> Self {
        Self::new(axis.gate_name(), &[qubit], Some(theta)).expect("rotation is a standard gate")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new("cnot", &[control, target], None).expect("distinct cnot operands")
    }

    pub fn simple(name: &str, operands: &[usize]) -> Self {
        Self::new(name, operands, None).expect("valid standard gate")
    }

    /// True when the gate has a unitary (built-in or from the platform).
    pub fn has_matrix(&self) -> bool {
        self.matrix.is_some() || standard_gate(&self.name).is_some_and(|g| g.has_matrix)
    }

    pub fn max_operand(&self) -> Option<usize> {
        self.operands.iter().copied().max()
    }

    /// Gate with the same operands that undoes this one, if one exists.
    pub fn inverse(&self) -> Option<Gate> {
        let flipped = |name: &str| Gate::new(name, &self.operands, None).ok();
        match self.name.as_str() {
            "i" | "h" | "x" | "y" | "z" | "cnot" | "cz" | "swap" | "toffoli" => Some(self.clone()),
            "s" => flipped("sdag"),
            "sdag" => flipped("s"),
            "t" => flipped("tdag"),
            "tdag" => flipped("t"),
            "x90" => flipped("mx90"),
            "mx90" => flipped("x90"),
            "y90" => flipped("my90"),
            "my90" => flipped("y90"),
            "rx" | "ry" | "rz" | "crz" => {
                Gate::new(&self.name, &self.operands, self.angle.map(|a| -a)).ok()
            }
            "measure" | "prepz" => None,
            name => {
                if let Some((axis, theta)) = named_rotation(name) {
                    return Some(Gate::rotation(axis, self.operands[0], -theta));
                }
                let m = self.matrix.as_ref()?;
                let mut g = self.clone();
                g.name = format!("{}_dag", self.name);
                g.matrix = Some(Arc::new(m.adjoint()));
                Some(g)
            }
        }
    }
}

impl fmt::Display for Gate {
    /// cQASM form, e.g. `cnot q[0],q[1]` or `rz q[2], 0.5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (i, q) in self.operands.iter().enumerate() {
            let sep = if i == 0 { " " } else { "," };
            write!(f, "{sep}q[{q}]")?;
        }
        if let Some(a) = self.angle {
            write!(f, ", {a:?}")?;
        }
        Ok(())
    }
}

fn check_distinct(name: &str, operands: &[usize]) -> Result<(), IrError> {
    for (i, &q) in operands.iter().enumerate() {
        if operands[..i].contains(&q) {
            return Err(IrError::DuplicateOperand {
                name: name.to_string(),
                operand: q,
            });
        }
    }
    Ok(())
}

/// Unitary of a single gate in its local operand space.
pub fn gate_unitary(gate: &Gate) -> Result<UnitaryMatrix, IrError> {
    if let Some(m) = &gate.matrix {
        return Ok((**m).clone());
    }
    let angle = || {
        gate.angle
            .ok_or_else(|| IrError::MissingAngle(gate.name.clone()))
    };
    let s = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    Ok(match gate.name.as_str() {
        "i" => UnitaryMatrix::identity(2),
        "h" => mat2(c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)),
        "x" => mat2(z, one, one, z),
        "y" => mat2(z, c(0.0, -1.0), c(0.0, 1.0), z),
        "z" => mat2(one, z, z, c(-1.0, 0.0)),
        "rx" => rx_matrix(angle()?),
        "ry" => ry_matrix(angle()?),
        "rz" => rz_matrix(angle()?),
        "x90" => rx_matrix(FRAC_PI_2),
        "mx90" => rx_matrix(-FRAC_PI_2),
        "y90" => ry_matrix(FRAC_PI_2),
        "my90" => ry_matrix(-FRAC_PI_2),
        "s" => phase_matrix(FRAC_PI_2),
        "sdag" => phase_matrix(-FRAC_PI_2),
        "t" => phase_matrix(FRAC_PI_4),
        "tdag" => phase_matrix(-FRAC_PI_4),
        "cnot" => permutation_matrix(4, |i| if i >= 2 { i ^ 1 } else { i }),
        "cz" => controlled(&mat2(one, z, z, c(-1.0, 0.0))),
        "swap" => permutation_matrix(4, |i| ((i & 1) << 1) | (i >> 1)),
        "crz" => controlled(&rz_matrix(angle()?)),
        "toffoli" => permutation_matrix(8, |i| if i >= 6 { i ^ 1 } else { i }),
        name => match named_rotation(name) {
            Some((axis, theta)) => axis.matrix(theta),
            None => return Err(IrError::NoMatrixAvailable(name.to_string())),
        },
    })
}

/// Full `2^n` unitary of an ordered gate list (later gates multiply on the left).
///
/// Each gate is expanded into its embedding in the register by index
/// arithmetic and multiplied into the accumulator; this path shares no code
/// with the stride kernels in `sim`.
pub fn circuit_unitary(gates: &[Gate], n: usize) -> Result<UnitaryMatrix, IrError> {
    if n > MAX_UNITARY_QUBITS {
        return Err(IrError::TooManyQubits(n));
    }
    let dim = 1usize << n;
    let mut acc = DMatrix::<Complex64>::identity(dim, dim);
    for gate in gates {
        for &q in &gate.operands {
            if q >= n {
                return Err(IrError::OperandRange {
                    operand: q,
                    qubit_count: n,
                });
            }
        }
        let local = gate_unitary(gate)?;
        let k = gate.operands.len();
        let local_index = |global: usize| -> usize {
            gate.operands
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &q)| acc | (((global >> q) & 1) << (k - 1 - i)))
        };
        let mask: usize = gate.operands.iter().map(|&q| 1usize << q).sum();
        let spread = |local: usize, base: usize| -> usize {
            gate.operands.iter().enumerate().fold(base, |acc, (i, &q)| {
                acc | (((local >> (k - 1 - i)) & 1) << q)
            })
        };
        // (E · acc)[r][col] = Σ_l G[loc(r)][l] · acc[spread(l, r & !mask)][col]
        let mut next = DMatrix::<Complex64>::zeros(dim, dim);
        for r in 0..dim {
            let lr = local_index(r);
            let base = r & !mask;
            for l in 0..(1usize << k) {
                let g = local.get(lr, l);
                if g == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = spread(l, base);
                for col in 0..dim {
                    next[(r, col)] += g * acc[(src, col)];
                }
            }
        }
        acc = next;
    }
    Ok(UnitaryMatrix::from_trusted(acc))
}

/// Named ordered gate block.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub name: String,
    pub qubit_count: usize,
    gates: Vec<Gate>,
    /// Repeat count, emitted as `.name(k)`.
    pub iterations: Option<u32>,
    /// Emit a trailing `display` statement.
    pub display: bool,
}

impl Kernel {
    pub fn new(name: &str, qubit_count: usize) -> Self {
        Self {
            name: name.to_string(),
            qubit_count,
            gates: Vec::new(),
            iterations: None,
            display: false,
        }
    }

    pub fn with_gates(name: &str, qubit_count: usize, gates: Vec<Gate>) -> Result<Self, IrError> {
        let mut k = Self::new(name, qubit_count);
        for g in gates {
            k.push(g)?;
        }
        Ok(k)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    /// Replaces the gate list wholesale (pass output).
    pub fn set_gates(&mut self, gates: Vec<Gate>) -> Result<(), IrError> {
        for g in &gates {
            self.check_range(g)?;
        }
        self.gates = gates;
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, IrError> {
        self.check_range(&gate)?;
        self.gates.push(gate);
        Ok(self)
    }

    fn check_range(&self, gate: &Gate) -> Result<(), IrError> {
        match gate.operands.iter().find(|&&q| q >= self.qubit_count) {
            Some(&q) => Err(IrError::OperandRange {
                operand: q,
                qubit_count: self.qubit_count,
            }),
            None => Ok(()),
        }
    }

    /// Appends a standard gate.
    pub fn add_gate(
        &mut self,
        name: &str,
        operands: &[usize],
        angle: Option<f64>,
    ) -> Result<&mut Self, IrError> {
        self.add_gate_on(None, name, operands, angle)
    }

    /// Appends a gate, accepting names defined by `platform` as well.
    pub fn add_gate_on(
        &mut self,
        platform: Option<&Platform>,
        name: &str,
        operands: &[usize],
        angle: Option<f64>,
    ) -> Result<&mut Self, IrError> {
        let canon = canonical_name(name);
        let gate = if standard_gate(&canon).is_some() {
            Gate::new(&canon, operands, angle)?
        } else {
            match platform {
                Some(p) if p.defines(&canon) => {
                    if angle.is_some() {
                        return Err(IrError::UnexpectedAngle(canon));
                    }
                    p.custom_gate(&canon, operands)?
                }
                _ => return Err(IrError::UnknownGate(canon)),
            }
        };
        self.push(gate)
    }

    pub fn identity(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("i", &[q], None)
    }
    pub fn hadamard(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("h", &[q], None)
    }
    pub fn x(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("x", &[q], None)
    }
    pub fn y(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("y", &[q], None)
    }
    pub fn z(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("z", &[q], None)
    }
    pub fn rx(&mut self, q: usize, theta: f64) -> Result<&mut Self, IrError> {
        self.add_gate("rx", &[q], Some(theta))
    }
    pub fn ry(&mut self, q: usize, theta: f64) -> Result<&mut Self, IrError> {
        self.add_gate("ry", &[q], Some(theta))
    }
    pub fn rz(&mut self, q: usize, theta: f64) -> Result<&mut Self, IrError> {
        self.add_gate("rz", &[q], Some(theta))
    }
    pub fn s(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("s", &[q], None)
    }
    pub fn sdag(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("sdag", &[q], None)
    }
    pub fn t(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("t", &[q], None)
    }
    pub fn tdag(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("tdag", &[q], None)
    }
    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self, IrError> {
        self.add_gate("cnot", &[control, target], None)
    }
    pub fn cz(&mut self, a: usize, b: usize) -> Result<&mut Self, IrError> {
        self.add_gate("cz", &[a, b], None)
    }
    pub fn swap(&mut self, a: usize, b: usize) -> Result<&mut Self, IrError> {
        self.add_gate("swap", &[a, b], None)
    }
    pub fn toffoli(&mut self, a: usize, b: usize, target: usize) -> Result<&mut Self, IrError> {
        self.add_gate("toffoli", &[a, b, target], None)
    }
    pub fn measure(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("measure", &[q], None)
    }
    pub fn prepz(&mut self, q: usize) -> Result<&mut Self, IrError> {
        self.add_gate("prepz", &[q], None)
    }
}

/// Ordered kernel list bound to an optional platform.
#[derive(Debug, Clone)]
pub struct Program {
    pub name: String,
    pub qubit_count: usize,
    kernels: Vec<Kernel>,
    pub platform: Option<Arc<Platform>>,
}

impl Program {
    pub fn new(name: &str, qubit_count: usize, platform: Option<Arc<Platform>>) -> Self {
        Self {
            name: name.to_string(),
            qubit_count,
            kernels: Vec::new(),
            platform,
        }
    }

    pub fn add_kernel(&mut self, kernel: Kernel) -> Result<&mut Self, IrError> {
        if kernel.qubit_count > self.qubit_count {
            return Err(IrError::OperandRange {
                operand: kernel.qubit_count - 1,
                qubit_count: self.qubit_count,
            });
        }
        self.kernels.push(kernel);
        Ok(self)
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn kernels_mut(&mut self) -> &mut [Kernel] {
        &mut self.kernels
    }

    pub fn gate_count(&self) -> usize {
        self.kernels.iter().map(|k| k.gates().len()).sum()
    }
}

/// All gate names with a built-in matrix, for exhaustive property tests.
pub fn matrix_gate_samples(theta: f64) -> Vec<Gate> {
    let mut out = Vec::new();
    for &name in STANDARD_GATES {
        let info = standard_gate(name).unwrap();
        if !info.has_matrix {
            continue;
        }
        let ops: Vec<usize> = (0..info.arity).collect();
        let angle = info.parameterized.then_some(theta);
        out.push(Gate::new(name, &ops, angle).unwrap());
    }
    out.push(Gate::simple("rx180", &[0]));
    out.push(Gate::simple("ry90", &[0]));
    out.push(Gate::simple("mry90", &[0]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &UnitaryMatrix, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a.as_matrix() - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn add_gate_examples() {
        let mut k = Kernel::new("k", 8);
        k.add_gate("cnot", &[3, 5], None).unwrap();
        k.add_gate("toffoli", &[3, 5, 7], None).unwrap();
        assert_eq!(k.gates()[0].name, "cnot");
        assert_eq!(k.gates()[0].operands, vec![3, 5]);
        assert_eq!(k.gates()[1].operands, vec![3, 5, 7]);
        assert!(matches!(
            k.add_gate("cnot", &[3, 3], None),
            Err(IrError::DuplicateOperand { operand: 3, .. })
        ));
    }

    #[test]
    fn add_gate_errors() {
        let mut k = Kernel::new("k", 2);
        assert!(matches!(
            k.add_gate("foo", &[0], None),
            Err(IrError::UnknownGate(_))
        ));
        assert!(matches!(
            k.add_gate("x", &[2], None),
            Err(IrError::OperandRange { operand: 2, .. })
        ));
        assert!(matches!(
            k.add_gate("rx", &[0], None),
            Err(IrError::MissingAngle(_))
        ));
        assert!(matches!(
            k.add_gate("x", &[0], Some(1.0)),
            Err(IrError::UnexpectedAngle(_))
        ));
        assert!(k.gates().is_empty());
    }

    #[test]
    fn api_aliases() {
        let mut k = Kernel::new("k", 2);
        k.hadamard(0).unwrap().identity(1).unwrap();
        assert_eq!(k.gates()[0].name, "h");
        assert_eq!(k.gates()[1].name, "i");
    }

    #[test]
    fn x_matrix() {
        let x = gate_unitary(&Gate::simple("x", &[0])).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert!(close(&x, &expect, 0.0));
    }

    #[test]
    fn rz_zero_is_identity() {
        let m = gate_unitary(&Gate::rotation(Axis::Z, 0, 0.0)).unwrap();
        assert!(close(&m, &DMatrix::identity(2, 2), 1e-15));
    }

    #[test]
    fn ry_pi_sign_convention() {
        let m = gate_unitary(&Gate::rotation(Axis::Y, 0, PI)).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)]);
        assert!(close(&m, &expect, 1e-12));
    }

    #[test]
    fn named_rotations_parse() {
        assert_eq!(named_rotation("rx180"), Some((Axis::X, PI)));
        assert_eq!(named_rotation("mry90"), Some((Axis::Y, -FRAC_PI_2)));
        assert_eq!(named_rotation("rx"), None);
        assert_eq!(named_rotation("rxy"), None);
        assert_eq!(named_rotation("measure"), None);
    }

    #[test]
    fn custom_gate_without_matrix() {
        let g = Gate::custom("foo", &[0], None).unwrap();
        assert!(matches!(
            gate_unitary(&g),
            Err(IrError::NoMatrixAvailable(_))
        ));
        assert!(matches!(
            gate_unitary(&Gate::simple("measure", &[0])),
            Err(IrError::NoMatrixAvailable(_))
        ));
    }

    #[test]
    fn circuit_unitary_empty_and_hh() {
        let u = circuit_unitary(&[], 2).unwrap();
        assert!(close(&u, &DMatrix::identity(4, 4), 0.0));
        let hh = [Gate::simple("h", &[0]), Gate::simple("h", &[0])];
        let u = circuit_unitary(&hh, 1).unwrap();
        assert!(close(&u, &DMatrix::identity(2, 2), 1e-12));
    }

    #[test]
    fn circuit_unitary_bell_matches_kronecker_product() {
        // Independent construction: CNOT(q0 -> q1) · (I ⊗ H) with qubit 0 as LSB.
        let s = FRAC_1_SQRT_2;
        let h = DMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        let id = DMatrix::<Complex64>::identity(2, 2);
        let h_on_q0 = id.kronecker(&h);
        // basis index b = q1*2 + q0; CNOT with control q0 flips q1 when q0 = 1
        let mut cx = DMatrix::<Complex64>::zeros(4, 4);
        for b in 0..4usize {
            let out = if b & 1 == 1 { b ^ 2 } else { b };
            cx[(out, b)] = c(1., 0.);
        }
        let expect = &cx * &h_on_q0;
        let gates = [Gate::simple("h", &[0]), Gate::cnot(0, 1)];
        let u = circuit_unitary(&gates, 2).unwrap();
        assert!(close(&u, &expect, 1e-12));
        // first column is the Bell state (|00> + |11>)/sqrt2
        assert!((u.get(0, 0).re - s).abs() < 1e-12 && (u.get(3, 0).re - s).abs() < 1e-12);
    }

    #[test]
    fn circuit_unitary_guards() {
        assert!(matches!(
            circuit_unitary(&[], 13),
            Err(IrError::TooManyQubits(13))
        ));
        assert!(matches!(
            circuit_unitary(&[Gate::simple("x", &[3])], 2),
            Err(IrError::OperandRange { .. })
        ));
    }

    #[test]
    fn kernel_order_is_stable() {
        let mut k = Kernel::new("k", 3);
        for q in [2, 0, 1, 0] {
            k.x(q).unwrap();
        }
        let ops: Vec<usize> = k.gates().iter().map(|g| g.operands[0]).collect();
        assert_eq!(ops, vec![2, 0, 1, 0]);
    }

    #[test]
    fn program_rejects_wider_kernel() {
        let mut p = Program::new("p", 2, None);
        assert!(p.add_kernel(Kernel::new("k", 3)).is_err());
        p.add_kernel(Kernel::new("k", 2)).unwrap();
        assert_eq!(p.kernels().len(), 1);
    }

    #[test]
    fn display_format() {
        assert_eq!(Gate::cnot(0, 1).to_string(), "cnot q[0],q[1]");
        assert_eq!(Gate::rotation(Axis::Z, 2, 0.5).to_string(), "rz q[2], 0.5");
    }
}

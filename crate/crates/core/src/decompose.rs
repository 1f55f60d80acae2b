// SPDX-License-Identifier: Apache-2.0

//! Gate lowering: Toffoli networks, multi-controlled gates, controlled
//! kernels, ZYZ angles, uniformly controlled rotations and the Quantum
//! Shannon Decomposition of arbitrary unitaries into `{ry, rz, cnot}`.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use thiserror::Error;

use crate::ir::{self, gate_unitary, Axis, Gate, IrError, Kernel, UnitaryMatrix};

/// Largest unitary `qsd_decompose` accepts, in qubits.
pub const MAX_QSD_QUBITS: usize = 8;

const UNITARY_TOL: f64 = 1e-10;
const QSD_UNITARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error("gate `{name}` has {got} operand(s), expected {expected}")]
    WrongArity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("{controls} controls need at least {needed} ancilla(s), got {got}")]
    InsufficientAncillas {
        controls: usize,
        needed: usize,
        got: usize,
    },
    #[error("qubit q[{0}] is used in more than one role")]
    QubitClash(usize),
    #[error("no controlled construction for gate `{0}`")]
    UnsupportedGate(String),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{0}-qubit unitary exceeds the decomposition limit of {MAX_QSD_QUBITS}")]
    TooLarge(usize),
    #[error("{got} angles for {controls} control(s); expected 2^{controls}")]
    BadAngleCount { controls: usize, got: usize },
    #[error("{qubits} target qubits for a {dim}x{dim} unitary")]
    QubitCountMismatch { qubits: usize, dim: usize },
    #[error(transparent)]
    Ir(#[from] IrError),
}

/// `U = e^{iα} · Rz(β) · Ry(γ) · Rz(δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ZyzAngles {
    /// Gates in program order: `rz(δ)`, `ry(γ)`, `rz(β)`.
    pub fn gates(&self, qubit: usize) -> Vec<Gate> {
        vec![
            Gate::rotation(Axis::Z, qubit, self.delta),
            Gate::rotation(Axis::Y, qubit, self.gamma),
            Gate::rotation(Axis::Z, qubit, self.beta),
        ]
    }

    pub fn matrix(&self) -> UnitaryMatrix {
        let m = ir::rz_matrix(self.beta)
            .mul(&ir::ry_matrix(self.gamma))
            .mul(&ir::rz_matrix(self.delta))
            .into_matrix()
            * Complex64::from_polar(1.0, self.alpha);
        UnitaryMatrix::from_trusted(m)
    }
}

/// Euler angles of a 2×2 unitary, with `γ ∈ [0, π]`.
///
/// When `γ = 0` the split between `β` and `δ` is degenerate; `δ` is then 0.
pub fn zyz_decompose(u: &UnitaryMatrix) -> Result<ZyzAngles, DecomposeError> {
    if u.dim() != 2 {
        return Err(DecomposeError::NotPowerOfTwo(u.dim()));
    }
    let dev = u.deviation_from_unitary();
    if dev > UNITARY_TOL {
        return Err(DecomposeError::NotUnitary(dev));
    }
    Ok(zyz_unchecked(u.as_matrix()))
}

fn zyz_unchecked(u: &DMatrix<Complex64>) -> ZyzAngles {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let alpha = det.arg() / 2.0;
    let inv_phase = Complex64::from_polar(1.0, -alpha);
    let v01 = u[(0, 1)] * inv_phase;
    let v00 = u[(0, 0)] * inv_phase;
    let v11 = u[(1, 1)] * inv_phase;
    // V = [[c e^{-i(β+δ)/2}, s e^{-i(β-δ)/2}], [-s e^{i(β-δ)/2}, c e^{i(β+δ)/2}]]
    let gamma = 2.0 * v01.norm().atan2(v00.norm());
    const DEGENERATE: f64 = 1e-14;
    let (beta, delta) = if v01.norm() < DEGENERATE {
        (2.0 * v11.arg(), 0.0)
    } else if v00.norm() < DEGENERATE {
        (-2.0 * v01.arg(), 0.0)
    } else {
        (v11.arg() - v01.arg(), v11.arg() + v01.arg())
    };
    ZyzAngles {
        alpha,
        beta,
        gamma,
        delta,
    }
}

/// Toffoli as the 15-gate `{h, t, tdag, cnot}` network with six CNOTs.
pub fn decompose_toffoli(gate: &Gate) -> Result<Vec<Gate>, DecomposeError> {
    if gate.operands.len() != 3 {
        return Err(DecomposeError::WrongArity {
            name: gate.name.clone(),
            expected: 3,
            got: gate.operands.len(),
        });
    }
    let (a, b, c) = (gate.operands[0], gate.operands[1], gate.operands[2]);
    let g = Gate::simple;
    Ok(vec![
        g("h", &[c]),
        Gate::cnot(b, c),
        g("tdag", &[c]),
        Gate::cnot(a, c),
        g("t", &[c]),
        Gate::cnot(b, c),
        g("tdag", &[c]),
        Gate::cnot(a, c),
        g("t", &[b]),
        g("t", &[c]),
        g("h", &[c]),
        Gate::cnot(a, b),
        g("t", &[a]),
        g("tdag", &[b]),
        Gate::cnot(a, b),
    ])
}

fn rotation_unless_zero(out: &mut Vec<Gate>, axis: Axis, q: usize, theta: f64) {
    if theta.abs() > 1e-14 {
        out.push(Gate::rotation(axis, q, theta));
    }
}

/// Singly controlled version of a one-qubit gate, exact up to global phase.
fn controlled_single(control: usize, gate: &Gate) -> Result<Vec<Gate>, DecomposeError> {
    let target = gate.operands[0];
    match gate.name.as_str() {
        "x" => return Ok(vec![Gate::cnot(control, target)]),
        "z" => return Ok(vec![Gate::simple("cz", &[control, target])]),
        "i" => return Ok(vec![]),
        _ => {}
    }
    let u = gate_unitary(gate).map_err(|_| DecomposeError::UnsupportedGate(gate.name.clone()))?;
    let z = zyz_unchecked(u.as_matrix());
    // U = e^{iα} A·X·B·X·C with A = Rz(β)Ry(γ/2), B = Ry(−γ/2)Rz(−(δ+β)/2), C = Rz((δ−β)/2)
    let mut out = Vec::new();
    rotation_unless_zero(&mut out, Axis::Z, target, (z.delta - z.beta) / 2.0);
    out.push(Gate::cnot(control, target));
    rotation_unless_zero(&mut out, Axis::Z, target, -(z.delta + z.beta) / 2.0);
    rotation_unless_zero(&mut out, Axis::Y, target, -z.gamma / 2.0);
    out.push(Gate::cnot(control, target));
    rotation_unless_zero(&mut out, Axis::Y, target, z.gamma / 2.0);
    rotation_unless_zero(&mut out, Axis::Z, target, z.beta);
    rotation_unless_zero(&mut out, Axis::Z, control, z.alpha);
    Ok(out)
}

fn check_roles(groups: &[&[usize]]) -> Result<(), DecomposeError> {
    let mut seen = Vec::new();
    for q in groups.iter().flat_map(|g| g.iter().copied()) {
        if seen.contains(&q) {
            return Err(DecomposeError::QubitClash(q));
        }
        seen.push(q);
    }
    Ok(())
}

/// Applies the one-qubit `target_gate` controlled on all of `controls`.
///
/// Two controls on an X target give a plain Toffoli. Otherwise the AND of
/// the controls is computed into the last of `controls.len() − 1` ancillas
/// with a Toffoli ladder, the singly controlled gate is applied from that
/// ancilla, and the ladder is undone. Ancillas must start in `|0⟩` and are
/// returned to it.
pub fn decompose_multi_controlled(
    target_gate: &Gate,
    controls: &[usize],
    ancillas: &[usize],
) -> Result<Vec<Gate>, DecomposeError> {
    if target_gate.operands.len() != 1 {
        return Err(DecomposeError::WrongArity {
            name: target_gate.name.clone(),
            expected: 1,
            got: target_gate.operands.len(),
        });
    }
    let target = target_gate.operands[0];
    check_roles(&[controls, ancillas, &[target]])?;
    let m = controls.len();
    match m {
        0 => return Ok(vec![target_gate.clone()]),
        1 => return controlled_single(controls[0], target_gate),
        2 if target_gate.name == "x" => {
            return Ok(vec![Gate::simple(
                "toffoli",
                &[controls[0], controls[1], target],
            )])
        }
        _ => {}
    }
    if ancillas.len() < m - 1 {
        return Err(DecomposeError::InsufficientAncillas {
            controls: m,
            needed: m - 1,
            got: ancillas.len(),
        });
    }
    let mut ladder = vec![Gate::simple(
        "toffoli",
        &[controls[0], controls[1], ancillas[0]],
    )];
    for i in 2..m {
        ladder.push(Gate::simple(
            "toffoli",
            &[controls[i], ancillas[i - 2], ancillas[i - 1]],
        ));
    }
    let mut out = ladder.clone();
    out.extend(controlled_single(ancillas[m - 2], target_gate)?);
    out.extend(ladder.into_iter().rev());
    Ok(out)
}

/// Controlled version of every gate in `kernel`.
pub fn controlled_kernel(
    kernel: &Kernel,
    controls: &[usize],
    ancillas: &[usize],
) -> Result<Kernel, DecomposeError> {
    let used: Vec<usize> = {
        let mut v: Vec<usize> = kernel
            .gates()
            .iter()
            .flat_map(|g| g.operands.iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    check_roles(&[controls, ancillas])?;
    if let Some(&q) = controls.iter().chain(ancillas).find(|q| used.contains(q)) {
        return Err(DecomposeError::QubitClash(q));
    }
    let width = controls
        .iter()
        .chain(ancillas)
        .map(|&q| q + 1)
        .max()
        .unwrap_or(0)
        .max(kernel.qubit_count);
    let mut out = Vec::new();
    for gate in kernel.gates() {
        let ops = &gate.operands;
        let with =
            |inner: &[usize]| -> Vec<usize> { controls.iter().chain(inner).copied().collect() };
        match gate.name.as_str() {
            "cnot" => out.extend(decompose_multi_controlled(
                &Gate::simple("x", &[ops[1]]),
                &with(&ops[..1]),
                ancillas,
            )?),
            "toffoli" => out.extend(decompose_multi_controlled(
                &Gate::simple("x", &[ops[2]]),
                &with(&ops[..2]),
                ancillas,
            )?),
            "cz" => out.extend(decompose_multi_controlled(
                &Gate::simple("z", &[ops[1]]),
                &with(&ops[..1]),
                ancillas,
            )?),
            "crz" => out.extend(decompose_multi_controlled(
                &Gate::rotation(Axis::Z, ops[1], gate.angle.unwrap_or_default()),
                &with(&ops[..1]),
                ancillas,
            )?),
            "swap" => {
                out.push(Gate::cnot(ops[1], ops[0]));
                out.extend(decompose_multi_controlled(
                    &Gate::simple("x", &[ops[1]]),
                    &with(&ops[..1]),
                    ancillas,
                )?);
                out.push(Gate::cnot(ops[1], ops[0]));
            }
            _ if ops.len() == 1 && gate.has_matrix() => {
                out.extend(decompose_multi_controlled(gate, controls, ancillas)?)
            }
            _ => return Err(DecomposeError::UnsupportedGate(gate.name.clone())),
        }
    }
    let mut k = Kernel::new(&format!("{}_ctrl", kernel.name), width);
    k.set_gates(out)?;
    Ok(k)
}

/// Rotation about `axis` on `target` whose angle is selected by the basis
/// state of `controls` (`controls[0]` is the most significant bit of the
/// angle index).
#[derive(Debug, Clone, PartialEq)]
pub struct UniformlyControlledRotation {
    pub axis: Axis,
    pub angles: Vec<f64>,
    pub controls: Vec<usize>,
    pub target: usize,
}

impl UniformlyControlledRotation {
    /// Block-diagonal matrix on `[controls..., target]` (target least significant).
    pub fn matrix(&self) -> UnitaryMatrix {
        let dim = 2 * self.angles.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (j, &theta) in self.angles.iter().enumerate() {
            let r = self.axis.matrix(theta);
            for a in 0..2 {
                for b in 0..2 {
                    m[(2 * j + a, 2 * j + b)] = r.get(a, b);
                }
            }
        }
        UnitaryMatrix::from_trusted(m)
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Lowers a multiplexed rotation to `2^k` rotations interleaved with `2^k`
/// CNOTs whose controls follow the reflected binary Gray code.
pub fn decompose_uniformly_controlled_rotation(
    ucr: &UniformlyControlledRotation,
) -> Result<Vec<Gate>, DecomposeError> {
    let k = ucr.controls.len();
    let count = 1usize << k;
    if ucr.angles.len() != count {
        return Err(DecomposeError::BadAngleCount {
            controls: k,
            got: ucr.angles.len(),
        });
    }
    check_roles(&[&ucr.controls, &[ucr.target]])?;
    if k == 0 {
        return Ok(vec![Gate::rotation(ucr.axis, ucr.target, ucr.angles[0])]);
    }
    // θ_j = Σ_i (−1)^{|j & g(i)|} θ'_i, inverted with the orthogonal Walsh matrix
    let scale = 1.0 / count as f64;
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let gi = gray(i);
        let theta: f64 = ucr
            .angles
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                if (j & gi).count_ones().is_multiple_of(2) {
                    a
                } else {
                    -a
                }
            })
            .sum::<f64>()
            * scale;
        out.push(Gate::rotation(ucr.axis, ucr.target, theta));
        let flipped = gi ^ gray((i + 1) % count);
        let bit = flipped.trailing_zeros() as usize;
        out.push(Gate::cnot(ucr.controls[k - 1 - bit], ucr.target));
    }
    Ok(out)
}

/// Options for [`qsd_decompose_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QsdOptions {
    /// Drop rotations with a negligible angle. Off by default so the gate
    /// counts follow the closed-form totals exactly.
    pub drop_trivial_rotations: bool,
}

/// Rotation count of an unsimplified `n`-qubit decomposition: `(3/2)4^n − (3/2)2^n`.
pub fn qsd_rotation_count(n: u32) -> usize {
    (3 * 4usize.pow(n) - 3 * 2usize.pow(n)) / 2
}

/// CNOT count of an unsimplified `n`-qubit decomposition: `(3/4)4^n − (3/2)2^n`.
pub fn qsd_cnot_count(n: u32) -> usize {
    (3 * 4usize.pow(n) - 6 * 2usize.pow(n)) / 4
}

/// Decomposes `u` acting on `qubits` (`qubits[0]` is the most significant
/// bit of the matrix index) into `ry`, `rz` and `cnot` gates.
pub fn qsd_decompose(u: &UnitaryMatrix, qubits: &[usize]) -> Result<Vec<Gate>, DecomposeError> {
    qsd_decompose_with(u, qubits, QsdOptions::default())
}

pub fn qsd_decompose_with(
    u: &UnitaryMatrix,
    qubits: &[usize],
    opts: QsdOptions,
) -> Result<Vec<Gate>, DecomposeError> {
    let dim = u.dim();
    if !dim.is_power_of_two() || dim < 2 || u.as_matrix().ncols() != dim {
        return Err(DecomposeError::NotPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QSD_QUBITS {
        return Err(DecomposeError::TooLarge(n));
    }
    if qubits.len() != n {
        return Err(DecomposeError::QubitCountMismatch {
            qubits: qubits.len(),
            dim,
        });
    }
    check_roles(&[qubits])?;
    let dev = u.deviation_from_unitary();
    if dev > QSD_UNITARY_TOL {
        return Err(DecomposeError::NotUnitary(dev));
    }
    let mut out = Vec::new();
    qsd_rec(u.as_matrix(), qubits, opts, &mut out)?;
    Ok(out)
}

fn qsd_rec(
    u: &DMatrix<Complex64>,
    qubits: &[usize],
    opts: QsdOptions,
    out: &mut Vec<Gate>,
) -> Result<(), DecomposeError> {
    if qubits.len() == 1 {
        let z = zyz_unchecked(u);
        for g in z.gates(qubits[0]) {
            if !opts.drop_trivial_rotations || g.angle.is_some_and(|a| a.abs() > 1e-12) {
                out.push(g);
            }
        }
        return Ok(());
    }
    let cs = cosine_sine(u);
    let (top, rest) = (qubits[0], &qubits[1..]);
    demultiplex(&cs.r0, &cs.r1, top, rest, opts, out)?;
    let ry: Vec<f64> = cs.theta.iter().map(|t| -2.0 * t).collect();
    emit_ucr(Axis::Y, ry, rest, top, opts, out)?;
    demultiplex(&cs.l0, &cs.l1, top, rest, opts, out)
}

fn emit_ucr(
    axis: Axis,
    angles: Vec<f64>,
    controls: &[usize],
    target: usize,
    opts: QsdOptions,
    out: &mut Vec<Gate>,
) -> Result<(), DecomposeError> {
    let ucr = UniformlyControlledRotation {
        axis,
        angles,
        controls: controls.to_vec(),
        target,
    };
    for g in decompose_uniformly_controlled_rotation(&ucr)? {
        let trivial = g.angle.is_some_and(|a| a.abs() <= 1e-12);
        if !(opts.drop_trivial_rotations && trivial) {
            out.push(g);
        }
    }
    Ok(())
}

/// `A1 ⊕ A2 = (I ⊗ V)(D ⊕ D†)(I ⊗ W)`, emitted as `W`, a multiplexed `Rz` on
/// `top`, then `V`.
fn demultiplex(
    a1: &DMatrix<Complex64>,
    a2: &DMatrix<Complex64>,
    top: usize,
    rest: &[usize],
    opts: QsdOptions,
    out: &mut Vec<Gate>,
) -> Result<(), DecomposeError> {
    let x = a1 * a2.adjoint();
    let (v, eig) = unitary_eigen(&x);
    let d: Vec<Complex64> = eig
        .iter()
        .map(|l| Complex64::from_polar(1.0, l.arg() / 2.0))
        .collect();
    let d_mat = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone()));
    let w = &d_mat * v.adjoint() * a2;
    qsd_rec(&w, rest, opts, out)?;
    let rz: Vec<f64> = d.iter().map(|z| -2.0 * z.arg()).collect();
    emit_ucr(Axis::Z, rz, rest, top, opts, out)?;
    qsd_rec(&v, rest, opts, out)
}

/// `U = (L0 ⊕ L1) · [[C, −S], [S, C]] · (R0 ⊕ R1)` with `C = diag(cos θ)`,
/// `S = diag(sin θ)`.
struct CosineSine {
    l0: DMatrix<Complex64>,
    l1: DMatrix<Complex64>,
    r0: DMatrix<Complex64>,
    r1: DMatrix<Complex64>,
    theta: Vec<f64>,
}

fn cosine_sine(u: &DMatrix<Complex64>) -> CosineSine {
    let m = u.nrows() / 2;
    let u00 = u.view((0, 0), (m, m)).into_owned();
    let u01 = u.view((0, m), (m, m)).into_owned();
    let u10 = u.view((m, 0), (m, m)).into_owned();
    let u11 = u.view((m, m), (m, m)).into_owned();

    let svd = SVD::new(u00, true, true);
    let l0 = svd.u.expect("requested u");
    let r0 = svd.v_t.expect("requested v_t");
    let y = &u10 * r0.adjoint();
    let s: Vec<f64> = (0..m).map(|i| y.column(i).norm()).collect();
    let c: Vec<f64> = svd.singular_values.iter().map(|&v| v.min(1.0)).collect();
    let theta: Vec<f64> = (0..m).map(|i| s[i].atan2(c[i])).collect();

    // Columns of Y are orthogonal with norms sin θ; normalize the well
    // determined ones first and complete the basis for the rest.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let mut l1 = DMatrix::<Complex64>::zeros(m, m);
    let mut filled: Vec<usize> = Vec::with_capacity(m);
    let mut pending = Vec::new();
    for &i in &order {
        if s[i] > 1e-9 {
            let mut v = y.column(i).into_owned();
            for &j in &filled {
                let p = l1.column(j).dotc(&v);
                v -= l1.column(j) * p;
            }
            let norm = v.norm();
            if norm > 1e-9 {
                l1.set_column(i, &(v / Complex64::new(norm, 0.0)));
                filled.push(i);
                continue;
            }
        }
        pending.push(i);
    }
    let mut basis = 0;
    for i in pending {
        loop {
            let mut v = nalgebra::DVector::<Complex64>::zeros(m);
            v[basis] = Complex64::new(1.0, 0.0);
            basis += 1;
            for &j in &filled {
                let p = l1.column(j).dotc(&v);
                v -= l1.column(j) * p;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                l1.set_column(i, &(v / Complex64::new(norm, 0.0)));
                filled.push(i);
                break;
            }
        }
    }

    // [−S; C] R1 = [L0† U01; L1† U11]  ⇒  R1 = −S·(L0† U01) + C·(L1† U11)
    let z = l0.adjoint() * &u01;
    let w = l1.adjoint() * &u11;
    let mut r1 = DMatrix::<Complex64>::zeros(m, m);
    for (i, t) in theta.iter().enumerate() {
        let (si, ci) = t.sin_cos();
        let row = z.row(i) * Complex64::new(-si, 0.0) + w.row(i) * Complex64::new(ci, 0.0);
        r1.set_row(i, &row);
    }
    CosineSine {
        l0,
        l1,
        r0,
        r1: nearest_unitary(&r1),
        theta,
    }
}

/// Polar factor of `m`: the closest unitary in Frobenius norm.
fn nearest_unitary(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = SVD::new(m.clone(), true, true);
    svd.u.expect("requested u") * svd.v_t.expect("requested v_t")
}

/// Eigendecomposition `X = V diag(λ) V†` of a unitary with unitary `V`.
///
/// The commuting Hermitian parts of `X` are combined with an irrational
/// weight and diagonalized together; a weight that merges distinct
/// eigenvalues is detected and replaced.
fn unitary_eigen(x: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let herm = (x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let anti = (x - x.adjoint()) * Complex64::new(0.0, -0.5);
    let weights = [
        0.577_215_664_901_532_9,
        1.324_717_957_244_746,
        std::f64::consts::E,
    ];
    let mut best: Option<(f64, DMatrix<Complex64>)> = None;
    for &r in &weights {
        let h = &herm + &anti * Complex64::new(r, 0.0);
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvectors;
        let d = v.adjoint() * x * &v;
        let off = off_diagonal_norm(&d);
        if best.as_ref().is_none_or(|(e, _)| off < *e) {
            best = Some((off, v));
        }
        if off < 1e-11 {
            break;
        }
    }
    let (_, v) = best.expect("at least one weight tried");
    let v = nearest_unitary(&v);
    let d = v.adjoint() * x * &v;
    let lambda = (0..d.nrows())
        .map(|i| {
            let z = d[(i, i)];
            z / z.norm()
        })
        .collect();
    (v, lambda)
}

fn off_diagonal_norm(d: &DMatrix<Complex64>) -> f64 {
    let mut acc = 0.0;
    for r in 0..d.nrows() {
        for c in 0..d.ncols() {
            if r != c {
                acc += d[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Haar-distributed random unitary (QR of a complex Gaussian matrix with
/// the phases of `R`'s diagonal folded into `Q`).
pub fn random_unitary<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = m.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let col = q.column(j) * ph;
        q.set_column(j, &col);
    }
    UnitaryMatrix::from_trusted(q)
}

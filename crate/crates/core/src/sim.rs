// SPDX-License-Identifier: Apache-2.0

//! Dense state-vector simulator used as the equivalence oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::ir::{gate_unitary, Gate, IrError, UnitaryMatrix};
use crate::optimize::unitary_distance;

pub const MAX_SIM_QUBITS: usize = 14;
/// Equivalence checks build full unitaries column by column.
pub const MAX_EQUIV_QUBITS: usize = 10;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{got} qubits exceeds the simulator limit of {limit}")]
    TooManyQubits { got: usize, limit: usize },
    #[error("gate `{0}` has no unitary and cannot be simulated")]
    NonUnitaryGate(String),
    #[error("operand q[{operand}] out of range for {qubit_count} qubits")]
    OperandRange { operand: usize, qubit_count: usize },
    #[error("state has {got} amplitudes, expected {expected}")]
    BadState { got: usize, expected: usize },
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("qubit permutation is not a bijection on {0} qubits")]
    BadPermutation(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self, SimError> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self, SimError> {
        check_size(n, MAX_SIM_QUBITS)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self, SimError> {
        check_size(n, MAX_SIM_QUBITS)?;
        if amps.len() != 1 << n {
            return Err(SimError::BadState {
                got: amps.len(),
                expected: 1 << n,
            });
        }
        let s = Self { n, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        for &q in &gate.operands {
            if q >= self.n {
                return Err(SimError::OperandRange {
                    operand: q,
                    qubit_count: self.n,
                });
            }
        }
        let m = gate_unitary(gate).map_err(|e| match e {
            IrError::NoMatrixAvailable(name) => SimError::NonUnitaryGate(name),
            _ => SimError::NonUnitaryGate(gate.name.clone()),
        })?;
        self.apply_matrix(&m, &gate.operands);
        Ok(())
    }

    /// `operands[0]` is the most significant bit of the matrix index.
    pub fn apply_matrix(&mut self, m: &UnitaryMatrix, operands: &[usize]) {
        match operands {
            [q] => self.apply_1q(m, *q),
            _ => self.apply_kq(m, operands),
        }
    }

    fn apply_1q(&mut self, m: &UnitaryMatrix, q: usize) {
        let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        let stride = 1usize << q;
        let dim = self.amps.len();
        let mut block = 0;
        while block < dim {
            for i in block..block + stride {
                let lo = self.amps[i];
                let hi = self.amps[i + stride];
                self.amps[i] = a * lo + b * hi;
                self.amps[i + stride] = c * lo + d * hi;
            }
            block += stride << 1;
        }
    }

    fn apply_kq(&mut self, m: &UnitaryMatrix, operands: &[usize]) {
        let k = operands.len();
        let size = 1usize << k;
        // offsets[l]: global bit pattern of local index l
        let offsets: Vec<usize> = (0..size)
            .map(|l| {
                operands
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| (l >> (k - 1 - i)) & 1 == 1)
                    .map(|(_, &q)| 1usize << q)
                    .sum()
            })
            .collect();
        let mask: usize = operands.iter().map(|&q| 1usize << q).sum();
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                buf[l] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (l, v) in buf.iter().enumerate() {
                    acc += m.get(r, l) * v;
                }
                self.amps[base | off] = acc;
            }
        }
    }

    /// Max amplitude difference after aligning global phase.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> f64 {
        let overlap: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap.conj() / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }
}

fn check_size(n: usize, limit: usize) -> Result<(), SimError> {
    if n > limit {
        Err(SimError::TooManyQubits { got: n, limit })
    } else {
        Ok(())
    }
}

/// Runs `gates` on `initial` (default `|0…0⟩`).
pub fn simulate(
    gates: &[Gate],
    n: usize,
    initial: Option<&StateVector>,
) -> Result<StateVector, SimError> {
    check_size(n, MAX_SIM_QUBITS)?;
    let mut state = match initial {
        Some(s) if s.n == n => s.clone(),
        Some(s) => {
            return Err(SimError::BadState {
                got: s.amps.len(),
                expected: 1 << n,
            })
        }
        None => StateVector::zero(n)?,
    };
    for g in gates {
        state.apply(g)?;
    }
    Ok(state)
}

/// Full unitary assembled from simulated basis-state columns.
pub fn simulated_unitary(gates: &[Gate], n: usize) -> Result<UnitaryMatrix, SimError> {
    check_size(n, MAX_EQUIV_QUBITS)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let s = simulate(gates, n, Some(&StateVector::basis(n, col)?))?;
        for (row, a) in s.amps.iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    Ok(UnitaryMatrix::from_trusted(m))
}

/// True iff the two circuits implement the same unitary up to global phase.
pub fn equivalent_up_to_phase(
    gates_a: &[Gate],
    gates_b: &[Gate],
    n: usize,
    eps: f64,
) -> Result<bool, SimError> {
    let ua = simulated_unitary(gates_a, n)?;
    let ub = simulated_unitary(gates_b, n)?;
    Ok(unitary_distance(&ua, &ub).expect("equal dimensions") <= eps)
}

/// True iff `gates_b` equals `gates_a` followed by the qubit permutation
/// `perm`, up to global phase: after running `gates_b`, qubit `perm[i]`
/// holds what qubit `i` holds after running `gates_a`.
pub fn equivalent_up_to_permutation(
    gates_a: &[Gate],
    gates_b: &[Gate],
    n: usize,
    perm: &[usize],
    eps: f64,
) -> Result<bool, SimError> {
    check_permutation(perm, n)?;
    let ua = simulated_unitary(gates_a, n)?;
    let ub = simulated_unitary(gates_b, n)?;
    let dim = 1usize << n;
    let moved = |x: usize| -> usize { (0..n).fold(0, |acc, i| acc | (((x >> i) & 1) << perm[i])) };
    let pulled = DMatrix::from_fn(dim, dim, |r, c| ub.get(moved(r), c));
    let pulled = UnitaryMatrix::from_trusted(pulled);
    Ok(unitary_distance(&ua, &pulled).expect("equal dimensions") <= eps)
}

fn check_permutation(perm: &[usize], n: usize) -> Result<(), SimError> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(SimError::BadPermutation(n));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(SimError::BadPermutation(n));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::circuit_unitary;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn amp(s: &StateVector, i: usize) -> Complex64 {
        s.amplitudes()[i]
    }

    #[test]
    fn hadamard_on_zero() {
        let s = simulate(&[Gate::simple("h", &[0])], 1, None).unwrap();
        assert!((amp(&s, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amp(&s, 1).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn bell_state() {
        let s = simulate(&[Gate::simple("h", &[0]), Gate::cnot(0, 1)], 2, None).unwrap();
        assert!((amp(&s, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(amp(&s, 1).norm() < 1e-15 && amp(&s, 2).norm() < 1e-15);
        assert!((amp(&s, 3).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn measure_rejected() {
        let err = simulate(&[Gate::simple("measure", &[0])], 1, None).unwrap_err();
        assert_eq!(err, SimError::NonUnitaryGate("measure".into()));
        assert!(matches!(
            simulate(&[], 15, None),
            Err(SimError::TooManyQubits { got: 15, .. })
        ));
    }

    #[test]
    fn matches_dense_unitary() {
        let gates = vec![
            Gate::simple("h", &[1]),
            Gate::cnot(1, 2),
            Gate::rotation(crate::ir::Axis::Y, 0, 0.3),
            Gate::simple("toffoli", &[2, 0, 1]),
            Gate::simple("t", &[2]),
        ];
        let u = circuit_unitary(&gates, 3).unwrap();
        let s = simulate(&gates, 3, None).unwrap();
        for r in 0..8 {
            assert!((u.get(r, 0) - amp(&s, r)).norm() < 1e-10);
        }
    }

    #[test]
    fn phase_equivalence_examples() {
        let x = [Gate::simple("x", &[0])];
        let rx = [Gate::new("rx", &[0], Some(PI)).unwrap()];
        let y = [Gate::simple("y", &[0])];
        assert!(equivalent_up_to_phase(&x, &x, 1, 1e-12).unwrap());
        assert!(equivalent_up_to_phase(&x, &rx, 1, 1e-9).unwrap());
        assert!(!equivalent_up_to_phase(&x, &y, 1, 1e-6).unwrap());
    }

    #[test]
    fn permutation_equivalence() {
        let a = [Gate::cnot(0, 1)];
        assert!(equivalent_up_to_permutation(&a, &a, 2, &[0, 1], 1e-12).unwrap());
        // routing-style: b leaves the qubits exchanged
        let b = [Gate::cnot(0, 1), Gate::simple("swap", &[0, 1])];
        assert!(equivalent_up_to_permutation(&a, &b, 2, &[1, 0], 1e-12).unwrap());
        assert!(!equivalent_up_to_permutation(&a, &b, 2, &[0, 1], 1e-6).unwrap());
        // output-only permutation: a relabelled cnot is not an output permutation of it
        let c = [Gate::cnot(1, 0)];
        assert!(!equivalent_up_to_permutation(&a, &c, 2, &[1, 0], 1e-6).unwrap());
        let x0 = [Gate::simple("x", &[0])];
        let x1 = [Gate::simple("x", &[1])];
        assert!(!equivalent_up_to_permutation(&x0, &x1, 2, &[0, 1], 1e-6).unwrap());
        assert!(matches!(
            equivalent_up_to_permutation(&a, &a, 2, &[0, 0], 1e-6),
            Err(SimError::BadPermutation(2))
        ));
    }

    #[test]
    fn gate_then_inverse_restores_state() {
        let mut s = simulate(&[Gate::simple("h", &[0]), Gate::simple("h", &[2])], 3, None).unwrap();
        let before = s.clone();
        for g in crate::ir::matrix_gate_samples(0.77) {
            let inv = g.inverse().unwrap();
            s.apply(&g).unwrap();
            s.apply(&inv).unwrap();
            let d: f64 = s
                .amplitudes()
                .iter()
                .zip(before.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(d < 1e-10, "{}", g.name);
        }
    }
}

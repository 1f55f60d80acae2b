// SPDX-License-Identifier: Apache-2.0

//! Built-in example programs.

use crate::ir::{Gate, Kernel, Program};

pub const BUILTIN_NAMES: &[&str] = &["bell", "grover-3q"];

pub fn builtin(name: &str) -> Option<Program> {
    match name {
        "bell" => Some(bell()),
        "grover-3q" => Some(grover_3q()),
        _ => None,
    }
}

/// Bell pair: `init` prepares both qubits, `epr` entangles, `measure` reads out.
pub fn bell() -> Program {
    let mut prog = Program::new("bell_pair", 2, None);
    let mut init = Kernel::new("init", 2);
    init.prepz(0).unwrap().prepz(1).unwrap();
    let mut epr = Kernel::new("epr", 2);
    epr.hadamard(0).unwrap().cnot(0, 1).unwrap();
    let mut measure = Kernel::new("measure", 2);
    measure.measure(0).unwrap().measure(1).unwrap();
    prog.add_kernel(init).unwrap();
    prog.add_kernel(epr).unwrap();
    prog.add_kernel(measure).unwrap();
    prog
}

/// Grover search for `|0100⟩` over qubits 0..3 with oracle qubit 4 and
/// ancillas 5..8, three iterations.
pub fn grover_3q() -> Program {
    const N: usize = 9;
    let mut prog = Program::new("grover", N, None);

    let mut init = Kernel::new("init", N);
    init.x(4).unwrap();
    for q in 0..=4 {
        init.hadamard(q).unwrap();
    }

    let mut grover = Kernel::new("grover", N);
    grover.iterations = Some(3);
    let ladder = [[0, 1, 5], [1, 5, 6], [2, 6, 7], [3, 7, 8]];
    grover.x(2).unwrap();
    for [a, b, c] in ladder {
        grover.toffoli(a, b, c).unwrap();
    }
    grover.cnot(8, 4).unwrap();
    for [a, b, c] in ladder.iter().rev() {
        grover.toffoli(*a, *b, *c).unwrap();
    }
    grover.x(2).unwrap();
    let layer = |k: &mut Kernel, name: &str| {
        for q in 0..4 {
            k.push(Gate::simple(name, &[q])).unwrap();
        }
    };
    layer(&mut grover, "h");
    layer(&mut grover, "x");
    grover.hadamard(3).unwrap();
    for [a, b, c] in &ladder[..3] {
        grover.toffoli(*a, *b, *c).unwrap();
    }
    grover.cnot(7, 3).unwrap();
    for [a, b, c] in ladder[..3].iter().rev() {
        grover.toffoli(*a, *b, *c).unwrap();
    }
    grover.hadamard(3).unwrap();
    layer(&mut grover, "x");
    layer(&mut grover, "h");
    grover.display = true;

    let mut measure = Kernel::new("measure", N);
    measure.hadamard(4).unwrap().measure(4).unwrap();
    measure.display = true;

    prog.add_kernel(init).unwrap();
    prog.add_kernel(grover).unwrap();
    prog.add_kernel(measure).unwrap();
    prog
}

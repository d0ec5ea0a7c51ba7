//! Decomposition of multi-controlled phases into one- and two-qubit gates.
//!
//! A doubly controlled phase costs five two-qubit gates:
//!
//!   CCU1(a, b, t; th) = CU1(b, t; th/2) CNOT(a, b) CU1(b, t; -th/2)
//!                       CNOT(a, b) CU1(a, t; th/2)
//!
//! A triply controlled phase uses two work ancillas and four Toffolis
//! around a central two-qubit phase; each Toffoli is five two-qubit gates
//! (controlled square roots of X around CNOTs), for 4 x 5 + 1 = 21 total.
//! The ancillas end where they started on every basis state.

use super::gate::Gate;
use super::Circuit;
use crate::error::{Error, Result};

/// Toffoli as five two-qubit gates: CV(c2,t) CNOT(c1,c2) CVdag(c2,t)
/// CNOT(c1,c2) CV(c1,t), with V the square root of X.
pub fn toffoli_gates(c1: usize, c2: usize, t: usize) -> [Gate; 5] {
    [
        Gate::Cv { control: c2, target: t },
        Gate::Cnot { control: c1, target: c2 },
        Gate::Cvdag { control: c2, target: t },
        Gate::Cnot { control: c1, target: c2 },
        Gate::Cv { control: c1, target: t },
    ]
}

/// Doubly controlled phase as five two-qubit gates.
pub fn ccphase_gates(a: usize, b: usize, t: usize, angle: f64) -> [Gate; 5] {
    [
        Gate::Phase { qubits: vec![b.min(t), b.max(t)], angle: angle / 2.0 },
        Gate::Cnot { control: a, target: b },
        Gate::Phase { qubits: vec![b.min(t), b.max(t)], angle: -angle / 2.0 },
        Gate::Cnot { control: a, target: b },
        Gate::Phase { qubits: vec![a.min(t), a.max(t)], angle: angle / 2.0 },
    ]
}

/// Triply controlled phase via two work ancillas: 21 gates.
pub fn cccphase_gates(qs: [usize; 4], work: [usize; 2], angle: f64) -> Vec<Gate> {
    let [a, b, c, t] = qs;
    let [z1, z2] = work;
    let mut out = Vec::with_capacity(21);
    out.extend(toffoli_gates(a, b, z1));
    out.extend(toffoli_gates(c, z1, z2));
    out.push(Gate::Phase { qubits: vec![z2.min(t), z2.max(t)], angle });
    out.extend(toffoli_gates(c, z1, z2));
    out.extend(toffoli_gates(a, b, z1));
    out
}

/// Rewrite every phase gate on three or four qubits into one- and two-qubit
/// gates, consuming the two work ancillas for the four-qubit case. Gates on
/// one or two qubits pass through unchanged. Errors if a work ancilla is
/// not available inside the circuit's qubit range or collides with a gate's
/// own qubits.
pub fn decompose_multicontrolled(c: &Circuit, work: [usize; 2]) -> Result<Circuit> {
    if work[0] == work[1] {
        return Err(Error::InvalidInput("work ancillas must be distinct".into()));
    }
    let mut out = Circuit::new(c.n_qubits);
    for gate in &c.gates {
        match gate {
            Gate::Phase { qubits, angle } => match qubits.len() {
                0 => {
                    return Err(Error::InvalidInput("phase gate with no qubits".into()));
                }
                1 | 2 => out.push(gate.clone()),
                3 => {
                    for g in ccphase_gates(qubits[0], qubits[1], qubits[2], *angle) {
                        out.push(g);
                    }
                }
                4 => {
                    if work.iter().any(|w| *w >= c.n_qubits) {
                        return Err(Error::InvalidInput(
                            "work ancillas are absent from the circuit".into(),
                        ));
                    }
                    if work.iter().any(|w| qubits.contains(w)) {
                        return Err(Error::InvalidInput(
                            "work ancilla collides with a phase gate qubit".into(),
                        ));
                    }
                    let qs = [qubits[0], qubits[1], qubits[2], qubits[3]];
                    for g in cccphase_gates(qs, work, *angle) {
                        out.push(g);
                    }
                }
                n => {
                    return Err(Error::InvalidInput(format!(
                        "phase gate on {n} qubits is outside the vocabulary"
                    )));
                }
            },
            other => out.push(other.clone()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::execute::execute;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn run_on_basis(c: &Circuit, idx: usize) -> Vec<Complex64> {
        let mut state = vec![Complex64::ZERO; 1 << c.n_qubits];
        state[idx] = Complex64::ONE;
        execute(c, &mut state).unwrap();
        state
    }

    #[test]
    fn toffoli_flips_target_only_on_both_controls() {
        let mut c = Circuit::new(3);
        for g in toffoli_gates(0, 1, 2) {
            c.push(g);
        }
        for idx in 0..8usize {
            let state = run_on_basis(&c, idx);
            let expect = if idx & 0b011 == 0b011 { idx ^ 0b100 } else { idx };
            assert_abs_diff_eq!((state[expect] - Complex64::ONE).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ccphase_decomposition_is_exact_and_counts_five() {
        let angle = 0.931;
        let mut reference = Circuit::new(3);
        reference.push(Gate::Phase { qubits: vec![0, 1, 2], angle });
        let decomposed = decompose_multicontrolled(&reference, [10, 11]).unwrap();
        assert_eq!(decomposed.len(), 5);
        for idx in 0..8usize {
            let a = run_on_basis(&reference, idx);
            let b = run_on_basis(&decomposed, idx);
            for (x, y) in a.iter().zip(b.iter()) {
                assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cccphase_decomposition_is_exact_counts_21_and_restores_ancillas() {
        let angle = -1.234;
        let mut reference = Circuit::new(6);
        reference.push(Gate::Phase { qubits: vec![0, 1, 2, 3], angle });
        let decomposed = decompose_multicontrolled(&reference, [4, 5]).unwrap();
        assert_eq!(decomposed.len(), 21);
        // Exhaustive over register basis states with ancillas zero.
        for idx in 0..16usize {
            let a = run_on_basis(&reference, idx);
            let b = run_on_basis(&decomposed, idx);
            for (x, y) in a.iter().zip(b.iter()) {
                assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
            }
            // No amplitude leaks outside the ancilla-zero block.
            for (j, amp) in b.iter().enumerate() {
                if j >= 16 {
                    assert_abs_diff_eq!(amp.norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn work_ancilla_collision_is_rejected() {
        let mut c = Circuit::new(6);
        c.push(Gate::Phase { qubits: vec![0, 1, 2, 3], angle: 0.5 });
        assert!(decompose_multicontrolled(&c, [3, 5]).is_err());
        assert!(decompose_multicontrolled(&c, [6, 7]).is_err());
        assert!(decompose_multicontrolled(&c, [4, 4]).is_err());
    }

    #[test]
    fn small_phases_pass_through() {
        let mut c = Circuit::new(3);
        c.push(Gate::Phase { qubits: vec![0], angle: 0.1 });
        c.push(Gate::Phase { qubits: vec![0, 2], angle: 0.2 });
        c.push(Gate::H(1));
        let d = decompose_multicontrolled(&c, [10, 11]).unwrap();
        assert_eq!(d.len(), 3);
    }
}

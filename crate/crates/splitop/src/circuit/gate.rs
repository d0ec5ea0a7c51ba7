//! Gate vocabulary for the emulated circuits.
//!
//! Conventions, fixed here and relied on by the execution tests:
//!
//! * Basis index bit b of the statevector is qubit b (qubit 0 is the least
//!   significant bit of the amplitude index).
//! * `Phase { qubits, angle }` multiplies amplitudes whose listed qubits are
//!   all 1 by exp(i angle); with one qubit it is the textbook U1, and with
//!   2, 3, 4 qubits the singly/doubly/triply controlled U1.
//! * `Rz` is diag(exp(+i angle/2), exp(-i angle/2)); the sign is chosen so
//!   the dipole wrapper H, W, phases, Rz(-pi/2), Wdag leaves the signal on
//!   the ancilla-0 branch.
//! * `W` is the fixed ancilla mixer (1/sqrt2) [[1, -i], [1, i]] mapping
//!   |0> to (|0> + |1>)/sqrt2 and |1> to (-i|0> + i|1>)/sqrt2.
//! * `Cv`/`Cvdag` apply the square root of X (V = ((1+i)/2) [[1, -i], [-i, 1]]
//!   -like form below) on the target when the control is 1; V^2 = X. They
//!   appear only in decomposed multi-controlled phases.

use num_complex::Complex64;

/// One gate application. Qubit indices refer to statevector bits.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    W(usize),
    Wdag(usize),
    /// exp(i angle) on the all-ones subspace of `qubits` (1 to 4 qubits,
    /// all distinct).
    Phase { qubits: Vec<usize>, angle: f64 },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
    Cv { control: usize, target: usize },
    Cvdag { control: usize, target: usize },
}

/// V = sqrt(X): V^2 = X, V = (1/2) [[1+i, 1-i], [1-i, 1+i]].
pub fn sqrt_x() -> [[Complex64; 2]; 2] {
    let a = Complex64::new(0.5, 0.5);
    let b = Complex64::new(0.5, -0.5);
    [[a, b], [b, a]]
}

/// V dagger.
pub fn sqrt_x_dag() -> [[Complex64; 2]; 2] {
    let a = Complex64::new(0.5, -0.5);
    let b = Complex64::new(0.5, 0.5);
    [[a, b], [b, a]]
}

/// W = (1/sqrt2) [[1, -i], [1, i]].
pub fn w_matrix() -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
    ]
}

/// W dagger = (1/sqrt2) [[1, 1], [i, -i]].
pub fn w_dag_matrix() -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(0.0, s), Complex64::new(0.0, -s)],
    ]
}

impl Gate {
    /// Every qubit the gate touches.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::W(q) | Gate::Wdag(q) => vec![*q],
            Gate::Ry { target, .. } | Gate::Rz { target, .. } => vec![*target],
            Gate::Phase { qubits, .. } => qubits.clone(),
            Gate::Cnot { control, target }
            | Gate::Cv { control, target }
            | Gate::Cvdag { control, target } => vec![*control, *target],
            Gate::Swap { a, b } => vec![*a, *b],
        }
    }

    /// Gate applications in the canonical counting: multi-controlled phases
    /// carry their two-qubit decomposition cost (CCU1 = 5, CCCU1 = 21),
    /// everything else counts 1.
    pub fn canonical_weight(&self) -> u64 {
        match self {
            Gate::Phase { qubits, .. } => match qubits.len() {
                1 | 2 => 1,
                3 => 5,
                4 => 21,
                n => panic!("phase gate on {n} qubits is outside the vocabulary"),
            },
            _ => 1,
        }
    }
}

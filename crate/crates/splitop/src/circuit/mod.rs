//! Exact gate-level construction and accounting of the propagation circuits.
//!
//! The emulator in the sibling modules advances the wavefunction with FFTs
//! and diagonal multiplications; this module builds the corresponding gate
//! sequences explicitly so that their action can be checked against the
//! emulator and their gate counts audited exactly.
//!
//! Qubit layout: with d modes of n qubits each, mode r occupies qubits
//! (d-1-r)*n .. (d-1-r)*n + n - 1, qubit q of a register being the bit of
//! weight 2^q of that mode's grid index. This makes the register block of a
//! basis-state index coincide with the flattened grid index used by
//! [`crate::grid::Wavefunction`] (mode 0 slowest). Ancillas sit above the
//! registers: one dipole ancilla, two work ancillas for decomposing triply
//! controlled phases, and one ancilla reserved for overlap readout.

pub mod decompose;
pub mod dipole_circuit;
pub mod execute;
pub mod gate;
pub mod phase_poly;
pub mod qft;
pub mod resources;
pub mod state_prep_circuit;
pub mod timestep;

pub use gate::Gate;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// A gate list on a fixed number of qubits.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) {
        debug_assert!(gate.qubits().iter().all(|&q| q < self.n_qubits));
        self.gates.push(gate);
    }

    pub fn extend(&mut self, other: &Circuit) {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Total gate applications under the canonical accounting: each gate
    /// counts [`Gate::canonical_weight`], i.e. multi-controlled phases count
    /// as their two-qubit decompositions while everything else counts 1.
    pub fn canonical_count(&self) -> u64 {
        self.gates.iter().map(Gate::canonical_weight).sum()
    }
}

/// Qubit index bookkeeping for a d-mode register file plus ancillas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    qubits_per_mode: usize,
    n_modes: usize,
}

pub const N_ANCILLAS: usize = 4;

impl Layout {
    pub fn new(qubits_per_mode: usize, n_modes: usize) -> Self {
        Layout { qubits_per_mode, n_modes }
    }

    pub fn for_grid(g: GridSpec) -> Self {
        Layout::new(g.n_qubits_per_mode(), g.n_modes())
    }

    pub fn qubits_per_mode(&self) -> usize {
        self.qubits_per_mode
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Register qubits only.
    pub fn n_register_qubits(&self) -> usize {
        self.qubits_per_mode * self.n_modes
    }

    /// Registers plus the four ancillas.
    pub fn n_qubits(&self) -> usize {
        self.n_register_qubits() + N_ANCILLAS
    }

    /// Statevector bit of qubit q (weight 2^q of the mode's grid index) of
    /// the given mode. Mode 0 occupies the most significant register bits so
    /// that the register part of a basis index equals the flattened grid
    /// index.
    pub fn mode_bit(&self, mode: usize, q: usize) -> usize {
        debug_assert!(mode < self.n_modes && q < self.qubits_per_mode);
        (self.n_modes - 1 - mode) * self.qubits_per_mode + q
    }

    /// Ancilla flagged by the dipole block encoding.
    pub fn dipole_ancilla(&self) -> usize {
        self.n_register_qubits()
    }

    /// Work ancillas consumed by triply controlled phase decompositions.
    pub fn work_ancillas(&self) -> [usize; 2] {
        let base = self.n_register_qubits();
        [base + 1, base + 2]
    }

    /// Ancilla reserved for the overlap readout protocol.
    pub fn readout_ancilla(&self) -> usize {
        self.n_register_qubits() + 3
    }
}

/// Prepend `control` to every gate of a diagonal-phase circuit, turning it
/// into the controlled version used by the dipole block. Only phase and X
/// gates can appear (X becomes CNOT, a k-qubit phase becomes k+1). Rejects
/// anything else and phases that already touch four qubits.
pub fn control_circuit(c: &Circuit, control: usize) -> Result<Circuit> {
    let mut out = Circuit::new(c.n_qubits.max(control + 1));
    for gate in &c.gates {
        match gate {
            Gate::Phase { qubits, angle } => {
                if qubits.len() >= 4 {
                    return Err(Error::InvalidInput(
                        "cannot control a phase gate that already has four qubits".into(),
                    ));
                }
                if qubits.contains(&control) {
                    return Err(Error::InvalidInput(
                        "control qubit already appears in phase gate".into(),
                    ));
                }
                let mut qs = vec![control];
                qs.extend_from_slice(qubits);
                qs.sort_unstable();
                out.push(Gate::Phase { qubits: qs, angle: *angle });
            }
            Gate::X(q) => out.push(Gate::Cnot { control, target: *q }),
            other => {
                return Err(Error::InvalidInput(format!(
                    "cannot control gate {other:?}; only diagonal-phase circuits are supported"
                )))
            }
        }
    }
    Ok(out)
}

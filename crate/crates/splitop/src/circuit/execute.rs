//! Exact statevector execution of gate lists.
//!
//! States are dense vectors of 2^n amplitudes indexed so that bit b of the
//! index is qubit b. With the register layout of [`super::Layout`], the
//! register bits of an index spell the flattened grid index, so a
//! wavefunction embeds by copying amplitudes into the ancilla-zero block.

use num_complex::Complex64;

use super::gate::{sqrt_x, sqrt_x_dag, w_dag_matrix, w_matrix, Gate};
use super::{Circuit, Layout};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Space, Wavefunction};

/// Apply a 2x2 unitary to one qubit of the state.
fn apply_single(state: &mut [Complex64], qubit: usize, m: &[[Complex64; 2]; 2]) {
    let mask = 1usize << qubit;
    for idx in 0..state.len() {
        if idx & mask == 0 {
            let j = idx | mask;
            let a = state[idx];
            let b = state[j];
            state[idx] = m[0][0] * a + m[0][1] * b;
            state[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Apply a 2x2 unitary to `target` on the subspace where `control` is 1.
fn apply_controlled(state: &mut [Complex64], control: usize, target: usize, m: &[[Complex64; 2]; 2]) {
    let cmask = 1usize << control;
    let tmask = 1usize << target;
    for idx in 0..state.len() {
        if idx & cmask != 0 && idx & tmask == 0 {
            let j = idx | tmask;
            let a = state[idx];
            let b = state[j];
            state[idx] = m[0][0] * a + m[0][1] * b;
            state[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Run the circuit on the state in place.
pub fn execute(c: &Circuit, state: &mut [Complex64]) -> Result<()> {
    if state.len() != 1usize << c.n_qubits {
        return Err(Error::InvalidInput(format!(
            "statevector has {} amplitudes but the circuit acts on {} qubits",
            state.len(),
            c.n_qubits
        )));
    }
    for gate in &c.gates {
        match gate {
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let h = [
                    [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
                ];
                apply_single(state, *q, &h);
            }
            Gate::X(q) => {
                let mask = 1usize << *q;
                for idx in 0..state.len() {
                    if idx & mask == 0 {
                        state.swap(idx, idx | mask);
                    }
                }
            }
            Gate::Ry { target, angle } => {
                let (s, c2) = (angle / 2.0).sin_cos();
                let m = [
                    [Complex64::new(c2, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c2, 0.0)],
                ];
                apply_single(state, *target, &m);
            }
            Gate::Rz { target, angle } => {
                let up = Complex64::from_polar(1.0, angle / 2.0);
                let dn = Complex64::from_polar(1.0, -angle / 2.0);
                let mask = 1usize << *target;
                for (idx, amp) in state.iter_mut().enumerate() {
                    *amp *= if idx & mask == 0 { up } else { dn };
                }
            }
            Gate::W(q) => apply_single(state, *q, &w_matrix()),
            Gate::Wdag(q) => apply_single(state, *q, &w_dag_matrix()),
            Gate::Phase { qubits, angle } => {
                let mut mask = 0usize;
                for &q in qubits {
                    mask |= 1 << q;
                }
                let ph = Complex64::from_polar(1.0, *angle);
                for (idx, amp) in state.iter_mut().enumerate() {
                    if idx & mask == mask {
                        *amp *= ph;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let cmask = 1usize << *control;
                let tmask = 1usize << *target;
                for idx in 0..state.len() {
                    if idx & cmask != 0 && idx & tmask == 0 {
                        state.swap(idx, idx | tmask);
                    }
                }
            }
            Gate::Swap { a, b } => {
                let amask = 1usize << *a;
                let bmask = 1usize << *b;
                for idx in 0..state.len() {
                    if idx & amask != 0 && idx & bmask == 0 {
                        state.swap(idx, (idx & !amask) | bmask);
                    }
                }
            }
            Gate::Cv { control, target } => apply_controlled(state, *control, *target, &sqrt_x()),
            Gate::Cvdag { control, target } => {
                apply_controlled(state, *control, *target, &sqrt_x_dag())
            }
        }
    }
    Ok(())
}

/// Embed a wavefunction into the ancilla-zero block of a statevector over
/// all layout qubits.
pub fn embed_wavefunction(psi: &Wavefunction, layout: Layout) -> Result<Vec<Complex64>> {
    let g = psi.grid;
    if g.n_qubits_per_mode() != layout.qubits_per_mode() || g.n_modes() != layout.n_modes() {
        return Err(Error::GridMismatch(
            "wavefunction grid does not match circuit layout".into(),
        ));
    }
    let mut state = vec![Complex64::ZERO; 1usize << layout.n_qubits()];
    state[..g.total_points()].copy_from_slice(&psi.amps);
    Ok(state)
}

/// Read back the register block of a statevector on the subspace where the
/// given ancilla is `bit`, all other ancillas 0. The slice is returned as a
/// wavefunction without normalization.
pub fn extract_ancilla_branch(
    state: &[Complex64],
    layout: Layout,
    g: GridSpec,
    space: Space,
    ancilla: usize,
    bit: bool,
) -> Result<Wavefunction> {
    if state.len() != 1usize << layout.n_qubits() {
        return Err(Error::InvalidInput("statevector size does not match layout".into()));
    }
    if g.total_points() != 1usize << layout.n_register_qubits() {
        return Err(Error::GridMismatch(
            "grid does not fill the layout's register block".into(),
        ));
    }
    let offset = if bit { 1usize << ancilla } else { 0 };
    let amps: Vec<Complex64> = (0..g.total_points()).map(|x| state[x + offset]).collect();
    Ok(Wavefunction { grid: g, amps, space })
}

/// Probability that the given qubit measures 1.
pub fn prob_one(state: &[Complex64], qubit: usize) -> f64 {
    let mask = 1usize << qubit;
    state
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn basis(n: usize, idx: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; 1 << n];
        v[idx] = Complex64::ONE;
        v
    }

    #[test]
    fn hadamard_and_phase_compose_to_expected_superposition() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0));
        c.push(Gate::Phase { qubits: vec![0], angle: std::f64::consts::FRAC_PI_2 });
        let mut state = basis(1, 0);
        execute(&c, &mut state).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(state[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(state[1].im, s, epsilon = 1e-15);
    }

    #[test]
    fn controlled_v_squares_to_controlled_x() {
        for idx in 0..4 {
            let mut state = basis(2, idx);
            let mut c = Circuit::new(2);
            c.push(Gate::Cv { control: 0, target: 1 });
            c.push(Gate::Cv { control: 0, target: 1 });
            execute(&c, &mut state).unwrap();
            let expect = if idx & 1 != 0 { idx ^ 2 } else { idx };
            assert_abs_diff_eq!(state[expect].re, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn v_then_vdag_is_identity() {
        let mut state: Vec<Complex64> = (0..4)
            .map(|k| Complex64::new(0.3 + k as f64, 0.1 * k as f64))
            .collect();
        let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in state.iter_mut() {
            *a /= norm;
        }
        let orig = state.clone();
        let mut c = Circuit::new(2);
        c.push(Gate::Cv { control: 0, target: 1 });
        c.push(Gate::Cvdag { control: 0, target: 1 });
        execute(&c, &mut state).unwrap();
        for (a, b) in state.iter().zip(orig.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn swap_exchanges_qubits() {
        let mut state = basis(3, 0b001);
        let mut c = Circuit::new(3);
        c.push(Gate::Swap { a: 0, b: 2 });
        execute(&c, &mut state).unwrap();
        assert_abs_diff_eq!(state[0b100].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn w_is_unitary_and_mixes_as_documented() {
        let mut state = basis(1, 0);
        let mut c = Circuit::new(1);
        c.push(Gate::W(0));
        execute(&c, &mut state).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(state[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(state[1].re, s, epsilon = 1e-15);
        let mut c2 = Circuit::new(1);
        c2.push(Gate::Wdag(0));
        execute(&c2, &mut state).unwrap();
        assert_abs_diff_eq!(state[0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(state[1].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn statevector_size_is_checked() {
        let c = Circuit::new(3);
        let mut state = basis(2, 0);
        assert!(execute(&c, &mut state).is_err());
    }
}

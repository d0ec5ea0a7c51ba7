//! Register preparation circuits for non-negative product states.
//!
//! Each mode register is driven from |0..0> to a target real amplitude
//! profile by a cascade of multiplexed Ry rotations, one level per qubit:
//! level j rotates qubit q_{n-1-j} by an angle selected by the pattern of
//! the j more significant qubits. Every multiplexer is compiled with the
//! Gray-code construction: 2^j rotations interleaved with 2^j CNOTs whose
//! controls follow the Gray transition bit, so level j costs 2^j + 2^j
//! gates (level 0 is a bare rotation), and a register totals 2^{n+1} - 3
//! gates.

use super::{Circuit, Gate, Layout};
use crate::error::{Error, Result};
use crate::state_prep::ucr_angles;

/// Gates per register: 2^{n+1} - 3.
pub fn state_prep_gate_count(n: u64) -> u64 {
    (1u64 << (n + 1)) - 3
}

/// Gray-code transform of multiplexer angles: the emitted rotation i
/// carries 2^{-j} sum_p (-1)^{popcount(p & gray(i))} theta_p.
fn gray_angles(theta: &[f64]) -> Vec<f64> {
    let len = theta.len();
    let scale = 1.0 / len as f64;
    (0..len)
        .map(|i| {
            let gray = i ^ (i >> 1);
            scale
                * theta
                    .iter()
                    .enumerate()
                    .map(|(p, t)| {
                        if (p & gray).count_ones() % 2 == 0 {
                            *t
                        } else {
                            -*t
                        }
                    })
                    .sum::<f64>()
        })
        .collect()
}

/// Multiplexed Ry on `target`, controlled by `controls` (index 0 holding
/// the least significant pattern bit), with one plain rotation when there
/// are no controls.
fn build_multiplexed_ry(target: usize, controls: &[usize], theta: &[f64]) -> Circuit {
    let j = controls.len();
    debug_assert_eq!(theta.len(), 1usize << j);
    let top = controls.iter().chain([&target]).max().copied().unwrap_or(target);
    let mut c = Circuit::new(top + 1);
    if j == 0 {
        c.push(Gate::Ry { target, angle: theta[0] });
        return c;
    }
    let phi = gray_angles(theta);
    let count = 1usize << j;
    for (i, angle) in phi.iter().enumerate() {
        c.push(Gate::Ry { target, angle: *angle });
        let k = if i + 1 < count {
            (i + 1).trailing_zeros() as usize
        } else {
            j - 1
        };
        c.push(Gate::Cnot { control: controls[k], target });
    }
    c
}

/// Prepare one mode register from |0..0> to the given non-negative,
/// normalized amplitude vector (length 2^n). Other registers untouched.
pub fn build_register_prep(layout: &Layout, mode: usize, amplitudes: &[f64]) -> Result<Circuit> {
    let n = layout.qubits_per_mode();
    if amplitudes.len() != 1usize << n {
        return Err(Error::InvalidInput(format!(
            "amplitude vector has {} entries for a {n}-qubit register",
            amplitudes.len()
        )));
    }
    let levels = ucr_angles(amplitudes)?;
    let mut c = Circuit::new(layout.n_qubits());
    for (j, theta) in levels.iter().enumerate() {
        let target = layout.mode_bit(mode, n - 1 - j);
        // Pattern bit k of a level-j multiplexer reads qubit q_{n-j+k}.
        let controls: Vec<usize> =
            (0..j).map(|k| layout.mode_bit(mode, n - j + k)).collect();
        let block = build_multiplexed_ry(target, &controls, theta);
        for g in block.gates {
            c.push(g);
        }
    }
    Ok(c)
}

/// Prepare every register of a product state, mode 0 first.
pub fn build_product_prep(layout: &Layout, per_mode: &[Vec<f64>]) -> Result<Circuit> {
    if per_mode.len() != layout.n_modes() {
        return Err(Error::InvalidInput(format!(
            "{} amplitude vectors for {} modes",
            per_mode.len(),
            layout.n_modes()
        )));
    }
    let mut c = Circuit::new(layout.n_qubits());
    for (m, amps) in per_mode.iter().enumerate() {
        c.extend(&build_register_prep(layout, m, amps)?);
    }
    Ok(c)
}

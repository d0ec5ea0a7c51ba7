//! Fourier transform circuits on single mode registers.
//!
//! The forward circuit maps |x> to (1/sqrt N) sum_y exp(+2 pi i x y / N) |y>
//! on one register, i.e. the adjoint of the batched FFT forward kernel used
//! by [`crate::fft::ModeTransform`]. Kinetic diagonals conjugated by either
//! orientation agree because they are even in the momentum index; the
//! wrapped-versus-centered momentum labeling is reconciled by a parity
//! twist on the register's least significant qubit (see the timestep
//! tests), which is a relabeling owned by the emulator, not a gate cost.
//!
//! Gate budget per register: n Hadamards, n(n-1)/2 controlled phases, and
//! floor(n/2) swaps.

use super::{Circuit, Gate, Layout};

/// Gates per register: n + n(n-1)/2 + floor(n/2).
pub fn qft_gate_count(n: u64) -> u64 {
    n + n * (n - 1) / 2 + n / 2
}

/// Fourier transform on one mode's register. `inverse` negates the kernel.
pub fn build_qft(layout: &Layout, mode: usize, inverse: bool) -> Circuit {
    let n = layout.qubits_per_mode();
    let mut gates: Vec<Gate> = Vec::new();
    for j in (0..n).rev() {
        gates.push(Gate::H(layout.mode_bit(mode, j)));
        for m in (0..j).rev() {
            let angle = std::f64::consts::PI / (1u64 << (j - m)) as f64;
            gates.push(Gate::Phase {
                qubits: {
                    let a = layout.mode_bit(mode, m);
                    let b = layout.mode_bit(mode, j);
                    vec![a.min(b), a.max(b)]
                },
                angle,
            });
        }
    }
    for i in 0..n / 2 {
        gates.push(Gate::Swap {
            a: layout.mode_bit(mode, i),
            b: layout.mode_bit(mode, n - 1 - i),
        });
    }
    if inverse {
        gates.reverse();
        for g in gates.iter_mut() {
            if let Gate::Phase { angle, .. } = g {
                *angle = -*angle;
            }
        }
    }
    let mut c = Circuit::new(layout.n_qubits());
    for g in gates {
        c.push(g);
    }
    c
}

/// Fourier transforms on every register, mode 0 first.
pub fn build_qft_all(layout: &Layout, inverse: bool) -> Circuit {
    let mut c = Circuit::new(layout.n_qubits());
    for m in 0..layout.n_modes() {
        c.extend(&build_qft(layout, m, inverse));
    }
    c
}

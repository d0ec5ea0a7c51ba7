//! Unitary multi-mode Fourier transforms between position and momentum
//! space.
//!
//! The forward (position to momentum) transform applies, along every mode
//! axis, the DFT with kernel exp(-2 pi i k x / N) and a 1/sqrt(N) weight, so
//! forward and inverse are exactly unitary and Parseval holds without volume
//! factors. Momentum indices come out in wrapped (FFT-native) order; see
//! `GridSpec::p_wrapped`.
//!
//! Axis transforms batch all lines of one axis into a single contiguous
//! buffer so the FFT backend runs them in one call per axis.

use crate::grid::{GridSpec, Space, Wavefunction};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Reusable transform plan for one grid shape.
pub struct ModeTransform {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

impl ModeTransform {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_points();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        ModeTransform {
            grid,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            lines: vec![Complex64::new(0.0, 0.0); grid.total_points()],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// In-place position -> momentum transform (wrapped momentum order).
    pub fn forward(&mut self, psi: &mut Wavefunction) {
        assert_eq!(psi.space, Space::Position, "forward expects position space");
        self.apply(psi, true);
        psi.space = Space::Momentum;
    }

    /// In-place momentum -> position transform.
    pub fn inverse(&mut self, psi: &mut Wavefunction) {
        assert_eq!(psi.space, Space::Momentum, "inverse expects momentum space");
        self.apply(psi, false);
        psi.space = Space::Position;
    }

    fn apply(&mut self, psi: &mut Wavefunction, fwd: bool) {
        let d = self.grid.n_modes();
        let n = self.grid.n_points();
        let total = self.grid.total_points();
        debug_assert_eq!(psi.amps.len(), total);
        for axis in 0..d {
            // Mode 0 is slowest, so axis m has stride N^(d-1-m).
            let stride = n.pow((d - 1 - axis) as u32);
            self.transform_axis(&mut psi.amps, n, stride, fwd);
        }
        // One global unitary weight for all d axes.
        let scale = 1.0 / (total as f64).sqrt();
        for a in &mut psi.amps {
            *a *= scale;
        }
    }

    /// Run the 1D transform over every line along one axis. Lines are
    /// gathered into a contiguous buffer (an axis-to-last transpose), run as
    /// one batched FFT call, and scattered back.
    fn transform_axis(&mut self, amps: &mut [Complex64], n: usize, stride: usize, fwd: bool) {
        let total = amps.len();
        if stride == 1 {
            // Already contiguous: every chunk of n is one line.
            let plan = if fwd { &self.forward } else { &self.inverse };
            plan.process_with_scratch(amps, &mut self.scratch);
            return;
        }
        let lines = &mut self.lines[..total];
        // A point decomposes as base = outer*(n*stride) + inner, element j of
        // the line at base is amps[base + j*stride].
        let n_blocks = total / (n * stride);
        let mut dst = 0;
        for outer in 0..n_blocks {
            let block = outer * n * stride;
            for inner in 0..stride {
                let base = block + inner;
                for j in 0..n {
                    lines[dst] = amps[base + j * stride];
                    dst += 1;
                }
            }
        }
        let plan = if fwd { &self.forward } else { &self.inverse };
        plan.process_with_scratch(lines, &mut self.scratch);
        let mut src = 0;
        for outer in 0..n_blocks {
            let block = outer * n * stride;
            for inner in 0..stride {
                let base = block + inner;
                for j in 0..n {
                    amps[base + j * stride] = lines[src];
                    src += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, make_grid};
    use approx::assert_relative_eq;

    fn random_state(grid: GridSpec, seed: u64) -> Wavefunction {
        // Small deterministic LCG; adequate for structural tests.
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut psi = Wavefunction::zero(grid, Space::Position);
        for a in &mut psi.amps {
            *a = Complex64::new(next(), next());
        }
        psi.normalize().unwrap();
        psi
    }

    #[test]
    fn forward_inverse_roundtrip() {
        let g = make_grid(3, 2, 10.0).unwrap();
        let mut t = ModeTransform::new(g);
        let psi0 = random_state(g, 7);
        let mut psi = psi0.clone();
        t.forward(&mut psi);
        t.inverse(&mut psi);
        for (a, b) in psi.amps.iter().zip(&psi0.amps) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_unitarity() {
        let g = make_grid(4, 3, 10.0).unwrap();
        let mut t = ModeTransform::new(g);
        let a0 = random_state(g, 1);
        let b0 = random_state(g, 2);
        let ip0 = inner_product(&a0, &b0).unwrap();
        let mut a = a0.clone();
        let mut b = b0.clone();
        t.forward(&mut a);
        t.forward(&mut b);
        assert_relative_eq!(a.norm_sq(), 1.0, epsilon = 1e-12);
        let ip1 = inner_product(&a, &b).unwrap();
        assert!((ip0 - ip1).norm() < 1e-12);
    }

    #[test]
    fn plane_wave_maps_to_single_momentum_point() {
        // exp(+i p_w(k0) Q(x)) has inner products concentrated on index k0 up
        // to the phase convention: forward kernel exp(-2 pi i k x / N) acting
        // on exp(+2 pi i k0 x / N) leaves delta_{k,k0} times a global phase
        // from the -L/2 offset when expressed through Q.
        let g = make_grid(4, 1, 10.0).unwrap();
        let mut t = ModeTransform::new(g);
        let k0 = 3usize;
        let mut psi = Wavefunction::zero(g, Space::Position);
        for x in 0..g.n_points() {
            // exp(2 pi i k0 x / N), written via the integer index.
            let ang = 2.0 * std::f64::consts::PI * (k0 * x) as f64 / g.n_points() as f64;
            psi.amps[x] = Complex64::from_polar(1.0 / (g.n_points() as f64).sqrt(), ang);
        }
        t.forward(&mut psi);
        for k in 0..g.n_points() {
            let mag = psi.amps[k].norm();
            if k == k0 {
                assert_relative_eq!(mag, 1.0, epsilon = 1e-12);
            } else {
                assert!(mag < 1e-12);
            }
        }
    }

    #[test]
    fn axis_transforms_commute_with_flattening() {
        // Transforming a product state transforms each factor independently.
        let g = make_grid(2, 2, 8.0).unwrap();
        let n = g.n_points();
        let f0: Vec<Complex64> = (0..n)
            .map(|x| Complex64::new(0.3 + x as f64, 0.1 * x as f64))
            .collect();
        let f1: Vec<Complex64> = (0..n)
            .map(|x| Complex64::new(1.0 - 0.2 * x as f64, 0.4))
            .collect();
        let mut psi = Wavefunction::zero(g, Space::Position);
        for x0 in 0..n {
            for x1 in 0..n {
                psi.amps[g.flat_index(&[x0, x1])] = f0[x0] * f1[x1];
            }
        }
        let mut t = ModeTransform::new(g);
        t.forward(&mut psi);

        // 1D reference DFTs with the same unitary kernel.
        let dft = |f: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|x| {
                            let ang = -2.0 * std::f64::consts::PI * (k * x) as f64 / n as f64;
                            f[x] * Complex64::from_polar(1.0, ang)
                        })
                        .sum::<Complex64>()
                        / (n as f64).sqrt()
                })
                .collect()
        };
        let g0 = dft(&f0);
        let g1 = dft(&f1);
        for k0 in 0..n {
            for k1 in 0..n {
                let want = g0[k0] * g1[k1];
                let got = psi.amps[g.flat_index(&[k0, k1])];
                assert!((want - got).norm() < 1e-12, "({k0},{k1})");
            }
        }
    }
}

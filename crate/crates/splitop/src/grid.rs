//! Discretized coordinate and momentum spaces, and the tensor-product
//! wavefunction container.
//!
//! Each of the d modes carries N = 2^n points on the half-open range
//! [-L/2, L/2), so Q(x) = -L/2 + x dQ with dQ = L/N. The conjugate momentum
//! grid has spacing dP = 2 pi / L. Two momentum labelings of the same N
//! values are used:
//!
//! * wrapped order p_w(k) = dP * (k for k < N/2, k - N for k >= N/2), the
//!   native order of an FFT output, used by the production propagator;
//! * centered order p_c(k) = dP * (k - N/2), monotone in k, used by the
//!   gate-level kinetic construction (the two are reconciled there).
//!
//! Flattening convention: mode 0 is slowest, so the flat index of the point
//! (x_0, ..., x_{d-1}) is ((x_0 N + x_1) N + ...) + x_{d-1}. Within a mode,
//! grid-bit b of x corresponds to register qubit q_b (q_{n-1} is the most
//! significant grid bit).
//!
//! Inner products are plain discrete l2 sums without a dQ volume weight; all
//! downstream quantities are either ratios or pass through the single
//! intensity calibration in `units`.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Space a wavefunction's amplitudes currently live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Position,
    Momentum,
}

/// Tensor-product grid description: d modes, 2^n points per mode, spatial
/// extent L in dimensionless normal-coordinate units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_qubits_per_mode: usize,
    n_modes: usize,
    length: f64,
}

/// Build a grid spec. `n` is qubits per mode (N = 2^n points), `d` the mode
/// count, `length` the spatial extent (default elsewhere: 10, i.e. [-5, 5)).
pub fn make_grid(n: usize, d: usize, length: f64) -> Result<GridSpec> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 qubits per mode, got {n}"
        )));
    }
    if d < 1 {
        return Err(Error::InvalidInput("need at least 1 mode".into()));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidInput(format!(
            "grid length must be positive, got {length}"
        )));
    }
    if n.saturating_mul(d) > 30 {
        return Err(Error::SizeCap {
            size: 1usize << (n * d).min(63),
            cap: 1 << 30,
        });
    }
    Ok(GridSpec {
        n_qubits_per_mode: n,
        n_modes: d,
        length,
    })
}

impl GridSpec {
    pub fn n_qubits_per_mode(&self) -> usize {
        self.n_qubits_per_mode
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Points per mode, N = 2^n.
    pub fn n_points(&self) -> usize {
        1 << self.n_qubits_per_mode
    }

    /// Total grid size N^d.
    pub fn total_points(&self) -> usize {
        self.n_points().pow(self.n_modes as u32)
    }

    /// Spatial step dQ = L/N.
    pub fn dq(&self) -> f64 {
        self.length / self.n_points() as f64
    }

    /// Coordinate of point index x: Q(x) = -L/2 + x dQ.
    pub fn q(&self, x: usize) -> f64 {
        -0.5 * self.length + x as f64 * self.dq()
    }

    /// Momentum step dP = 2 pi / L.
    pub fn dp(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// FFT-ordered (wrapped) momentum at frequency index k.
    pub fn p_wrapped(&self, k: usize) -> f64 {
        let n = self.n_points();
        let signed = if k < n / 2 {
            k as isize
        } else {
            k as isize - n as isize
        };
        signed as f64 * self.dp()
    }

    /// Centered momentum at index k: p = dP (k - N/2), monotone in k.
    pub fn p_centered(&self, k: usize) -> f64 {
        (k as isize - (self.n_points() / 2) as isize) as f64 * self.dp()
    }

    /// Flat index of a multi-mode point, mode 0 slowest.
    pub fn flat_index(&self, point: &[usize]) -> usize {
        debug_assert_eq!(point.len(), self.n_modes);
        let n = self.n_points();
        point.iter().fold(0, |acc, &x| {
            debug_assert!(x < n);
            acc * n + x
        })
    }

    /// Per-mode indices of a flat index, mode 0 slowest.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let n = self.n_points();
        let mut point = vec![0usize; self.n_modes];
        for m in (0..self.n_modes).rev() {
            point[m] = flat % n;
            flat /= n;
        }
        point
    }

    /// Iterate coordinates of a flat index directly (mode 0 slowest).
    pub fn coords_of(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).iter().map(|&x| self.q(x)).collect()
    }
}

/// Complex amplitudes over the full tensor-product grid.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    pub grid: GridSpec,
    pub amps: Vec<Complex64>,
    pub space: Space,
}

impl Wavefunction {
    /// All-zero amplitude vector in the given space.
    pub fn zero(grid: GridSpec, space: Space) -> Self {
        Wavefunction {
            grid,
            amps: vec![Complex64::new(0.0, 0.0); grid.total_points()],
            space,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Scale to unit l2 norm; errors on an (effectively) zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::Numerical(format!(
                "cannot normalize vector with norm {n}"
            )));
        }
        let inv = 1.0 / n;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Discrete l2 inner product <a|b> = sum conj(a_x) b_x (no dQ weight).
pub fn inner_product(a: &Wavefunction, b: &Wavefunction) -> Result<Complex64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(
            "inner product between different grids".into(),
        ));
    }
    if a.space != b.space {
        return Err(Error::GridMismatch(
            "inner product between position- and momentum-space states".into(),
        ));
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

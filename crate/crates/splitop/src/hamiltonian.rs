//! Potential, dipole, and kinetic terms as diagonal arrays over the grid.
//!
//! In dimensionless normal coordinates the Hamiltonian splits into a
//! momentum-diagonal kinetic part and a position-diagonal potential,
//!
//! ```text
//! K/hc = sum_i (omega_i/2) p_i^2        (diagonal in momentum space)
//! V/hc = sum_i (omega_i/2) Q_i^2 + cubic + quartic   (diagonal in position)
//! ```
//!
//! both in cm^-1. The kinetic term is a sum of per-mode functions, so it is
//! stored per mode and combined on demand; the potential and dipole surfaces
//! couple modes and are stored dense over the N^d grid.

use crate::error::{Error, Result};
use crate::fft::ModeTransform;
use crate::forcefield::{Axis, ForceField};
use crate::grid::{GridSpec, Space, Wavefunction};
use crate::units::phase_angle;
use num_complex::Complex64;

/// Dense real diagonal over the position grid (potential or dipole surface).
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Separable momentum-space kinetic diagonal: per-mode energies in wrapped
/// (FFT-native) momentum order.
#[derive(Debug, Clone)]
pub struct KineticDiagonal {
    pub grid: GridSpec,
    /// per_mode[m][k] = (omega_m/2) p_w(k)^2 in cm^-1.
    pub per_mode: Vec<Vec<f64>>,
}

impl KineticDiagonal {
    /// Dense combined diagonal K(k_0..k_{d-1}) = sum_m per_mode[m][k_m] over
    /// the flattened momentum grid (same flattening as position).
    pub fn combined(&self) -> Vec<f64> {
        let g = self.grid;
        let n = g.n_points();
        let mut out = vec![0.0f64; g.total_points()];
        // Build by repeated blocking: mode 0 slowest.
        for (flat, v) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut acc = 0.0;
            for m in (0..g.n_modes()).rev() {
                acc += self.per_mode[m][rem % n];
                rem /= n;
            }
            *v = acc;
        }
        out
    }
}

/// Evaluate one dipole-surface or potential monomial table at a point.
fn poly_terms(qs: &[f64], ff: &ForceField) -> f64 {
    let mut v = 0.0;
    for (m, w) in ff.omega.iter().enumerate() {
        v += 0.5 * w * qs[m] * qs[m];
    }
    for (k, c) in &ff.cubic {
        v += c * qs[k[0]] * qs[k[1]] * qs[k[2]];
    }
    for (k, c) in &ff.quartic {
        v += c * qs[k[0]] * qs[k[1]] * qs[k[2]] * qs[k[3]];
    }
    v
}

/// Potential V/hc in cm^-1 at every grid point. Each stored coefficient
/// contributes its monomial exactly once (canonical-key convention).
pub fn potential_on_grid(ff: &ForceField, g: GridSpec) -> Result<DiagonalOperator> {
    if ff.n_modes != g.n_modes() {
        return Err(Error::GridMismatch(format!(
            "force field has {} modes, grid has {}",
            ff.n_modes,
            g.n_modes()
        )));
    }
    let total = g.total_points();
    let mut values = vec![0.0f64; total];
    let mut qs = vec![0.0f64; g.n_modes()];
    let n = g.n_points();
    for (flat, slot) in values.iter_mut().enumerate() {
        let mut rem = flat;
        for m in (0..g.n_modes()).rev() {
            qs[m] = g.q(rem % n);
            rem /= n;
        }
        *slot = poly_terms(&qs, ff);
    }
    Ok(DiagonalOperator { grid: g, values })
}

/// Dipole surface mu^(axis) in debye at every grid point, truncated at the
/// requested polynomial order (1 = linear only, 2 = +quadratic,
/// 3 = +cubic). The constant term is always absent. An axis with no stored
/// coefficients yields an all-zero diagonal.
pub fn dipole_on_grid(
    ff: &ForceField,
    g: GridSpec,
    axis: Axis,
    truncation_order: usize,
) -> Result<DiagonalOperator> {
    if ff.n_modes != g.n_modes() {
        return Err(Error::GridMismatch(format!(
            "force field has {} modes, grid has {}",
            ff.n_modes,
            g.n_modes()
        )));
    }
    if !(1..=3).contains(&truncation_order) {
        return Err(Error::InvalidInput(format!(
            "dipole truncation order must be 1, 2, or 3, got {truncation_order}"
        )));
    }
    let total = g.total_points();
    let mut values = vec![0.0f64; total];
    let surface = match ff.dipole.get(&axis) {
        Some(s) => s,
        None => return Ok(DiagonalOperator { grid: g, values }),
    };
    let n = g.n_points();
    let mut qs = vec![0.0f64; g.n_modes()];
    for (flat, slot) in values.iter_mut().enumerate() {
        let mut rem = flat;
        for m in (0..g.n_modes()).rev() {
            qs[m] = g.q(rem % n);
            rem /= n;
        }
        let mut mu = 0.0;
        for (i, c) in &surface.linear {
            mu += c * qs[*i];
        }
        if truncation_order >= 2 {
            for (k, c) in &surface.quadratic {
                mu += c * qs[k[0]] * qs[k[1]];
            }
        }
        if truncation_order >= 3 {
            for (k, c) in &surface.cubic {
                mu += c * qs[k[0]] * qs[k[1]] * qs[k[2]];
            }
        }
        *slot = mu;
    }
    Ok(DiagonalOperator { grid: g, values })
}

/// Per-mode kinetic energies (omega_m/2) p^2 on the wrapped momentum grid.
pub fn kinetic_energy(g: GridSpec, omega: &[f64]) -> KineticDiagonal {
    let n = g.n_points();
    let per_mode = omega
        .iter()
        .map(|w| (0..n).map(|k| 0.5 * w * g.p_wrapped(k).powi(2)).collect())
        .collect();
    KineticDiagonal { grid: g, per_mode }
}

/// Per-mode evolution phases exp(-i 2 pi c K_m(p) dt_eff) with dt_eff = dt/2
/// when `half` is set. Multiplying the two half-step tables elementwise
/// reproduces the full-step table exactly (exponent additivity).
pub fn kinetic_phase(
    g: GridSpec,
    omega: &[f64],
    dt_fs: f64,
    half: bool,
) -> Vec<Vec<Complex64>> {
    let dt_eff = if half { 0.5 * dt_fs } else { dt_fs };
    kinetic_energy(g, omega)
        .per_mode
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| Complex64::from_polar(1.0, -phase_angle(*e, dt_eff)))
                .collect()
        })
        .collect()
}

/// <psi| (K + V)/hc |psi> in cm^-1 via one momentum-space pass for K and a
/// diagonal sum for V. Requires a normalized position-space state.
pub fn expectation_energy(psi: &Wavefunction, ff: &ForceField) -> Result<f64> {
    if psi.space != Space::Position {
        return Err(Error::GridMismatch(
            "expectation_energy expects a position-space state".into(),
        ));
    }
    let norm = psi.norm_sq();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "expectation_energy expects a normalized state, got |psi|^2 = {norm}"
        )));
    }
    let g = psi.grid;
    let v = potential_on_grid(ff, g)?;
    let mut e: f64 = psi
        .amps
        .iter()
        .zip(&v.values)
        .map(|(a, vx)| a.norm_sqr() * vx)
        .sum();
    let k = kinetic_energy(g, &ff.omega).combined();
    let mut phi = psi.clone();
    let mut t = ModeTransform::new(g);
    t.forward(&mut phi);
    e += phi
        .amps
        .iter()
        .zip(&k)
        .map(|(a, kx)| a.norm_sqr() * kx)
        .sum::<f64>();
    Ok(e)
}

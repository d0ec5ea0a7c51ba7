//! Dense exact-diagonalization reference for the grid emulator.
//!
//! The split-operator emulator approximates exp(-i H dt); this crate builds
//! the same grid Hamiltonian as an explicit real symmetric matrix and
//! diagonalizes it, providing exact eigenvalues, eigenstates, transition
//! stick spectra, and eigenbasis autocorrelations against which the
//! propagated results are judged.
//!
//! The kinetic block of one mode in the position basis is the inverse
//! Fourier image of the diagonal (omega/2) p^2 table,
//!
//!   K[x][x'] = (1/N) sum_k (omega/2) p_wrapped(k)^2 cos(2 pi k (x - x')/N),
//!
//! real and symmetric because the momentum table is even in k; it is
//! exactly the operator the FFT emulator applies, so the two paths share a
//! single discretization and differ only by the splitting error. The full
//! Hamiltonian adds one kinetic block per mode (identity on the others)
//! and the potential diagonal.

use ndarray::{Array1, Array2};
use ndarray_linalg::{EighInto, UPLO};
use num_complex::Complex64;
use splitop::forcefield::{Axis, ForceField};
use splitop::grid::{GridSpec, Space, Wavefunction};
use splitop::hamiltonian::{dipole_on_grid, potential_on_grid};
use splitop::units::{phase_angle, stick_intensity_km_mol};
use splitop::{Error, Result};

/// Largest grid the dense reference will diagonalize (matrix side).
pub const GRID_CAP: usize = 4096;

/// Default absolute floor (debye^2) below which sticks are dropped.
pub const DEFAULT_STICK_FLOOR: f64 = 1e-12;

/// Position-basis kinetic matrix of one mode, (omega/2) p^2 conjugated by
/// the discrete Fourier transform.
pub fn mode_kinetic_matrix(g: GridSpec, omega: f64) -> Array2<f64> {
    let n = g.n_points();
    // Row profile over the cyclic separation r = (x - x') mod N.
    let profile: Vec<f64> = (0..n)
        .map(|r| {
            (0..n)
                .map(|k| {
                    let e = 0.5 * omega * g.p_wrapped(k).powi(2);
                    let angle = 2.0 * std::f64::consts::PI * (k * r) as f64 / n as f64;
                    e * angle.cos()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect();
    Array2::from_shape_fn((n, n), |(x, y)| profile[(x + n - y) % n])
}

/// Eigendecomposition of the grid Hamiltonian: ascending energies in
/// wavenumbers and l2-orthonormal eigenvectors (one per column).
pub struct EigenSystem {
    grid: GridSpec,
    energies_cm: Array1<f64>,
    vectors: Array2<f64>,
}

/// Build and diagonalize the dense Hamiltonian. Refuses grids above
/// [`GRID_CAP`] points.
pub fn diagonalize(ff: &ForceField, g: GridSpec) -> Result<EigenSystem> {
    if ff.n_modes != g.n_modes() {
        return Err(Error::GridMismatch(format!(
            "force field has {} modes, grid has {}",
            ff.n_modes,
            g.n_modes()
        )));
    }
    let total = g.total_points();
    if total > GRID_CAP {
        return Err(Error::SizeCap { size: total, cap: GRID_CAP });
    }

    let n = g.n_points();
    let d = g.n_modes();
    let mut h = Array2::<f64>::zeros((total, total));

    // Kinetic blocks: mode m couples x to x-with-mode-m-replaced.
    for (m, w) in ff.omega.iter().enumerate() {
        let k1 = mode_kinetic_matrix(g, *w);
        let stride = n.pow((d - 1 - m) as u32);
        for x in 0..total {
            let xm = (x / stride) % n;
            let base = x - xm * stride;
            for ym in 0..n {
                h[[x, base + ym * stride]] += k1[[xm, ym]];
            }
        }
    }

    let v = potential_on_grid(ff, g)?;
    for (x, val) in v.values.iter().enumerate() {
        h[[x, x]] += val;
    }

    let (energies_cm, vectors) = h
        .eigh_into(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("dense diagonalization failed: {e}")))?;
    Ok(EigenSystem { grid: g, energies_cm, vectors })
}

impl EigenSystem {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.energies_cm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies_cm.is_empty()
    }

    pub fn energy_cm(&self, k: usize) -> f64 {
        self.energies_cm[k]
    }

    pub fn ground_energy_cm(&self) -> f64 {
        self.energies_cm[0]
    }

    /// Eigenstate k as a position-space wavefunction, sign-fixed so its
    /// largest-magnitude amplitude is positive.
    pub fn eigenstate(&self, k: usize) -> Wavefunction {
        let col = self.vectors.column(k);
        let mut sign = 1.0;
        let mut best = 0.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = if v >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        let amps: Vec<Complex64> = col.iter().map(|&v| Complex64::new(sign * v, 0.0)).collect();
        Wavefunction { grid: self.grid, amps, space: Space::Position }
    }

    /// Expansion coefficients <k|phi> of a position-space state.
    pub fn project(&self, phi: &Wavefunction) -> Result<Vec<Complex64>> {
        if phi.grid != self.grid || phi.space != Space::Position {
            return Err(Error::GridMismatch(
                "projection expects a position-space state on the oracle grid".into(),
            ));
        }
        Ok((0..self.len())
            .map(|k| {
                self.vectors
                    .column(k)
                    .iter()
                    .zip(&phi.amps)
                    .map(|(&v, a)| v * a)
                    .sum()
            })
            .collect())
    }

    /// Exact autocorrelation <phi| exp(-i H t) |phi> at the given times.
    pub fn autocorrelation(&self, phi: &Wavefunction, times_fs: &[f64]) -> Result<Vec<Complex64>> {
        let coeffs = self.project(phi)?;
        let weights: Vec<(f64, f64)> = coeffs
            .iter()
            .zip(self.energies_cm.iter())
            .map(|(c, &e)| (c.norm_sqr(), e))
            .filter(|(w, _)| *w > 1e-300)
            .collect();
        Ok(times_fs
            .iter()
            .map(|&t| {
                weights
                    .iter()
                    .map(|&(w, e)| Complex64::from_polar(w, -phase_angle(e, t)))
                    .sum()
            })
            .collect())
    }
}

/// One transition line out of the ground state.
#[derive(Debug, Clone)]
pub struct Stick {
    pub level: usize,
    pub frequency_cm: f64,
    pub strength_debye_sq: f64,
    pub intensity_km_mol: f64,
}

/// Transition sticks |<k| mu |0>|^2 for one dipole axis at the given
/// truncation order, keeping levels above the strength floor. Level 0 (the
/// permanent moment) is included when it clears the floor; spectral
/// comparisons filter by frequency.
pub fn stick_spectrum(
    es: &EigenSystem,
    ff: &ForceField,
    axis: Axis,
    truncation_order: usize,
    floor: f64,
) -> Result<Vec<Stick>> {
    let mu = dipole_on_grid(ff, es.grid, axis, truncation_order)?;
    let v0 = es.vectors.column(0);
    let e0 = es.ground_energy_cm();
    let mut sticks = Vec::new();
    for k in 0..es.len() {
        let amp: f64 = es
            .vectors
            .column(k)
            .iter()
            .zip(v0.iter())
            .zip(&mu.values)
            .map(|((&vk, &v0x), &m)| vk * m * v0x)
            .sum();
        let strength = amp * amp;
        if strength >= floor {
            sticks.push(Stick {
                level: k,
                frequency_cm: es.energy_cm(k) - e0,
                strength_debye_sq: strength,
                intensity_km_mol: stick_intensity_km_mol(es.energy_cm(k) - e0, strength),
            });
        }
    }
    Ok(sticks)
}

/// Sticks with strengths summed over the given axes (levels merged), for
/// matching against a spectrum that adds axis contributions.
pub fn combined_stick_spectrum(
    es: &EigenSystem,
    ff: &ForceField,
    axes: &[Axis],
    truncation_order: usize,
    floor: f64,
) -> Result<Vec<Stick>> {
    let mut per_level: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for &axis in axes {
        for s in stick_spectrum(es, ff, axis, truncation_order, 0.0)? {
            *per_level.entry(s.level).or_insert(0.0) += s.strength_debye_sq;
        }
    }
    let e0 = es.ground_energy_cm();
    Ok(per_level
        .into_iter()
        .filter(|(_, strength)| *strength >= floor)
        .map(|(level, strength)| {
            let freq = es.energy_cm(level) - e0;
            Stick {
                level,
                frequency_cm: freq,
                strength_debye_sq: strength,
                intensity_km_mol: stick_intensity_km_mol(freq, strength),
            }
        })
        .collect())
}

/// <0| mu^2 |0> for one axis: the completeness bound the stick strengths
/// must sum to.
pub fn ground_dipole_moment_sq(
    es: &EigenSystem,
    ff: &ForceField,
    axis: Axis,
    truncation_order: usize,
) -> Result<f64> {
    let mu = dipole_on_grid(ff, es.grid, axis, truncation_order)?;
    let v0 = es.vectors.column(0);
    Ok(v0
        .iter()
        .zip(&mu.values)
        .map(|(&v, &m)| v * v * m * m)
        .sum())
}

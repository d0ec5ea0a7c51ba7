//! Unit conventions and physical constants.
//!
//! Energies are carried as wavenumbers E/hc in cm^-1 and times in fs
//! everywhere. The only conversion needed by the dynamics is then the speed
//! of light in cm/fs: every evolution phase is
//!
//! ```text
//! phase = 2 pi c * (energy in cm^-1) * (time in fs)   [radians]
//! ```
//!
//! which keeps hbar out of the propagation code entirely. Dipole moments are
//! carried in debye; absolute intensity calibration happens in exactly one
//! place (the two functions at the bottom of this module), so the grid
//! pipeline and the stick-spectrum pipeline cannot drift apart.

use std::f64::consts::PI;

/// Speed of light in cm/fs. Multiplying by cm^-1 and fs gives a pure number.
pub const C_CM_PER_FS: f64 = 2.99792458e-5;

/// Speed of light in m/s (SI, exact).
pub const C_SI: f64 = 2.99792458e8;

/// Avogadro constant in 1/mol (SI, exact).
pub const N_A: f64 = 6.02214076e23;

/// Vacuum permittivity in F/m (CODATA 2018).
pub const EPSILON_0: f64 = 8.8541878128e-12;

/// Reduced Planck constant in J s (SI, exact).
pub const HBAR: f64 = 1.054571817e-34;

/// One debye in C m.
pub const DEBYE_CM: f64 = 3.335640952e-30;

/// Evolution phase angle in radians for an energy (cm^-1) acting over a time
/// (fs). Positive inputs give a positive angle; callers choose the sign.
#[inline]
pub fn phase_angle(energy_cm: f64, time_fs: f64) -> f64 {
    2.0 * PI * C_CM_PER_FS * energy_cm * time_fs
}

/// Prefactor P such that the absorption cross section on the energy grid is
///
/// ```text
/// sigma(E) = P * E * sum_axes Re{ F_axis(E) } * ||mu psi||^2_axis
/// ```
///
/// with E in cm^-1 and F(E) = integral_0^T exp(i 2 pi c (E + E0) t) A(t) dt
/// evaluated in cm^-1/fs units on the normalized autocorrelation (A(0) = 1),
/// so the debye^2 scale enters through ||mu psi||^2.
///
/// Derivation of the constant: for one transition of energy Ek and line
/// strength S = |<k|mu|0>|^2 (debye^2), Fermi's golden rule gives the
/// integrated molar napierian absorption
///
/// ```text
/// I = 0.1 * N_A * pi * DEBYE^2 / (3 eps0 hbar c_SI) * Ek * S   [km/mol]
/// ```
///
/// (the 0.1 converts m^2 cm^-1/molecule to km/mol). The half-range Fourier
/// transform of the same stick integrates to Re-area S / (2 c) over its band
/// (c in cm/fs), so requiring `intensity_from_sigma_integral` below to return
/// I fixes P = 200 pi DEBYE^2 c / (3 eps0 hbar c_SI). The two routes are
/// algebraically identical by construction; the acceptance suite checks the
/// residual numerical difference (windowing and quadrature only).
#[inline]
pub fn sigma_prefactor() -> f64 {
    200.0 * PI * DEBYE_CM * DEBYE_CM * C_CM_PER_FS / (3.0 * EPSILON_0 * HBAR * C_SI)
}

/// Integrated band intensity in km/mol from the trapezoid integral of
/// sigma(E) dE taken in the units produced by `sigma_prefactor`.
#[inline]
pub fn intensity_from_sigma_integral(sigma_de_integral: f64) -> f64 {
    1.0e-3 * N_A * sigma_de_integral
}

/// Stick-spectrum intensity in km/mol for a transition at `nu_cm` (cm^-1)
/// with line strength `strength_debye_sq` = |<k|mu|0>|^2 (debye^2).
#[inline]
pub fn stick_intensity_km_mol(nu_cm: f64, strength_debye_sq: f64) -> f64 {
    0.1 * N_A * PI * DEBYE_CM * DEBYE_CM / (3.0 * EPSILON_0 * HBAR * C_SI)
        * nu_cm
        * strength_debye_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phase_angle_matches_formula() {
        // 800 cm^-1 over 1 fs: 2 pi * 2.99792458e-5 * 800.
        assert_relative_eq!(
            phase_angle(800.0, 1.0),
            2.0 * PI * 2.99792458e-5 * 800.0,
            epsilon = 1e-15
        );
        assert_eq!(phase_angle(1234.5, 0.0), 0.0);
    }

    #[test]
    fn intensity_routes_are_algebraically_identical() {
        // A stick at Ek with strength S produces a sigma whose Re-area is
        // S/(2c); routing that area through the grid-side conversion must
        // reproduce the stick-side conversion exactly.
        let ek = 1650.0;
        let s = 0.0128;
        let grid_route = intensity_from_sigma_integral(
            sigma_prefactor() * ek * s / (2.0 * C_CM_PER_FS),
        );
        let stick_route = stick_intensity_km_mol(ek, s);
        assert_relative_eq!(grid_route, stick_route, max_relative = 1e-14);
    }

    #[test]
    fn stick_conversion_near_literature_value() {
        // The km/mol-per-(cm^-1 debye^2) constant is ~2.5066 in the
        // spectroscopy literature; our CODATA assembly must land there.
        let k = stick_intensity_km_mol(1.0, 1.0);
        assert!((k - 2.5066).abs() < 2e-3, "constant {k} drifted");
    }
}

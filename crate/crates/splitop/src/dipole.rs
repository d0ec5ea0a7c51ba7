//! Ancilla-assisted application of the (non-unitary) dipole operator.
//!
//! The dipole surface mu(Q) is scaled to mu~ = mu / beta with beta chosen so
//! |mu~| stays well inside [-1, 1], then embedded in a unitary on one extra
//! qubit: with the ancilla in |0>,
//!
//! ```text
//! H on ancilla, then the diagonal phase pair
//!     |0>|Q>  ->  exp(-i theta1(Q)) |0>|Q>
//!     |1>|Q>  ->  exp(+i theta1(Q)) |1>|Q>
//! then Wdag on the ancilla, with W = (1/sqrt2) [[1, -i], [1, i]],
//! ```
//!
//! which leaves the register in
//!
//! ```text
//! |0> cos(theta1(Q)) psi(Q)  +  |1> sin(theta1(Q)) psi(Q).
//! ```
//!
//! Measuring the ancilla in |1> projects onto sin(theta1) psi. The phase
//! profile theta1 fixes what that branch carries:
//!
//! * `Taylor`: theta1 = mu~, so the branch is sin(mu~) psi = mu~ psi up to
//!   O(mu~^3) corrections, suppressed by the scale margin.
//! * `ExactTheta`: theta1 = pi/4 - Theta with
//!   Theta = arccos[(mu~ + sqrt(1 - mu~^2)) / sqrt2], which makes the branch
//!   exactly mu~ psi (and the discarded branch exactly sqrt(1 - mu~^2) psi).
//!
//! Downstream overlap measurements are multiplied by `mu_norm_sq` =
//! beta^2 * p_success to restore absolute dipole units.

use crate::error::{Error, Result};
use crate::forcefield::{Axis, ForceField};
use crate::grid::{GridSpec, Space, Wavefunction};
use crate::hamiltonian::dipole_on_grid;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

/// How the diagonal phase profile encodes the scaled dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaMode {
    /// theta1 = mu~; branch carries sin(mu~) psi (small-angle approximation).
    Taylor,
    /// theta1 chosen so the branch carries mu~ psi exactly.
    ExactTheta,
}

impl ThetaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaMode::Taylor => "taylor",
            ThetaMode::ExactTheta => "exact-theta",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "taylor" => Ok(ThetaMode::Taylor),
            "exact-theta" | "exact_theta" | "exact" => Ok(ThetaMode::ExactTheta),
            other => Err(Error::InvalidInput(format!(
                "unknown theta mode '{other}' (expected taylor or exact-theta)"
            ))),
        }
    }
}

impl std::fmt::Display for ThetaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of projecting the ancilla onto the dipole branch.
#[derive(Debug, Clone)]
pub struct DipoleApplication {
    /// Normalized post-selection state, approximately (or exactly)
    /// mu psi / ||mu psi||.
    pub branch: Wavefunction,
    /// Probability of the ancilla reading 1, = ||sin(theta1) psi||^2.
    pub success_probability: f64,
    /// beta^2 * success_probability; multiplies measured overlaps to restore
    /// dipole units. For `ExactTheta` this equals ||mu psi||^2 exactly.
    pub mu_norm_sq: f64,
    pub beta: f64,
    pub theta_mode: ThetaMode,
}

/// One sampled run of the protocol: the ancilla outcome and the collapsed
/// register state (the discarded-branch state on failure).
#[derive(Debug, Clone)]
pub struct DipoleSample {
    pub success: bool,
    pub state: Wavefunction,
    pub success_probability: f64,
}

/// Scale factor beta = margin * max_Q |mu(Q)|. The margin keeps the phase
/// profile in the small-angle regime (and inside the exact-theta domain).
pub fn choose_beta(
    ff: &ForceField,
    g: GridSpec,
    axis: Axis,
    truncation_order: usize,
    margin: f64,
) -> Result<f64> {
    if !(margin >= 2.0) {
        return Err(Error::InvalidInput(format!(
            "scale margin must be at least 2, got {margin}"
        )));
    }
    let mu = dipole_on_grid(ff, g, axis, truncation_order)?;
    let peak = mu.max_abs();
    if peak == 0.0 {
        return Err(Error::InvalidInput(format!(
            "dipole surface for axis {axis} is identically zero on the grid"
        )));
    }
    Ok(margin * peak)
}

fn theta_profile(
    ff: &ForceField,
    g: GridSpec,
    axis: Axis,
    truncation_order: usize,
    beta: f64,
    mode: ThetaMode,
) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "scale beta must be positive, got {beta}"
        )));
    }
    let mu = dipole_on_grid(ff, g, axis, truncation_order)?;
    let peak_scaled = mu.max_abs() / beta;
    if mode == ThetaMode::ExactTheta && peak_scaled > FRAC_1_SQRT_2 {
        return Err(Error::InvalidInput(format!(
            "beta {beta} leaves max |mu|/beta = {peak_scaled} outside the \
             exact-theta domain (needs <= 1/sqrt2)"
        )));
    }
    Ok(mu
        .values
        .iter()
        .map(|m| {
            let mt = m / beta;
            match mode {
                ThetaMode::Taylor => mt,
                ThetaMode::ExactTheta => {
                    let arg = (mt + (1.0 - mt * mt).sqrt()) * FRAC_1_SQRT_2;
                    std::f64::consts::FRAC_PI_4 - arg.clamp(-1.0, 1.0).acos()
                }
            }
        })
        .collect())
}

/// Run the ancilla protocol and post-select the dipole branch.
pub fn apply_dipole(
    psi: &Wavefunction,
    ff: &ForceField,
    axis: Axis,
    truncation_order: usize,
    beta: f64,
    mode: ThetaMode,
) -> Result<DipoleApplication> {
    if psi.space != Space::Position {
        return Err(Error::GridMismatch(
            "dipole application expects a position-space state".into(),
        ));
    }
    let theta = theta_profile(ff, psi.grid, axis, truncation_order, beta, mode)?;

    // Two-branch register, ancilla amplitude pair per grid point.
    // After H: (psi/sqrt2, psi/sqrt2). After the phase pair and Wdag:
    //   b0' = (b0 + b1)/sqrt2,   b1' = i (b0 - b1)/sqrt2.
    let mut branch1 = Wavefunction::zero(psi.grid, Space::Position);
    let mut p1 = 0.0;
    for ((a, th), out) in psi.amps.iter().zip(&theta).zip(branch1.amps.iter_mut()) {
        let b0 = a * Complex64::from_polar(FRAC_1_SQRT_2, -th);
        let b1 = a * Complex64::from_polar(FRAC_1_SQRT_2, *th);
        let mixed = Complex64::i() * (b0 - b1) * FRAC_1_SQRT_2;
        p1 += mixed.norm_sqr();
        *out = mixed;
    }
    if p1 <= 0.0 {
        return Err(Error::Numerical(
            "dipole branch has zero weight; nothing to post-select".into(),
        ));
    }
    let scale = 1.0 / p1.sqrt();
    for a in branch1.amps.iter_mut() {
        *a *= scale;
    }
    Ok(DipoleApplication {
        branch: branch1,
        success_probability: p1,
        mu_norm_sq: beta * beta * p1,
        beta,
        theta_mode: mode,
    })
}

/// Classical reference: multiply by mu directly and normalize. Returns the
/// normalized state and ||mu psi||^2.
pub fn apply_dipole_direct(
    psi: &Wavefunction,
    ff: &ForceField,
    axis: Axis,
    truncation_order: usize,
) -> Result<(Wavefunction, f64)> {
    if psi.space != Space::Position {
        return Err(Error::GridMismatch(
            "dipole application expects a position-space state".into(),
        ));
    }
    let mu = dipole_on_grid(ff, psi.grid, axis, truncation_order)?;
    let mut out = psi.clone();
    for (a, m) in out.amps.iter_mut().zip(&mu.values) {
        *a *= m;
    }
    let n2 = out.norm_sq();
    if n2 <= 0.0 {
        return Err(Error::Numerical(
            "mu psi vanished on the grid; nothing to normalize".into(),
        ));
    }
    let scale = 1.0 / n2.sqrt();
    for a in out.amps.iter_mut() {
        *a *= scale;
    }
    Ok((out, n2))
}

/// Sample one ancilla measurement: success collapses onto the dipole branch,
/// failure onto the orthogonal branch.
pub fn apply_dipole_probabilistic<R: Rng + ?Sized>(
    psi: &Wavefunction,
    ff: &ForceField,
    axis: Axis,
    truncation_order: usize,
    beta: f64,
    mode: ThetaMode,
    rng: &mut R,
) -> Result<DipoleSample> {
    let app = apply_dipole(psi, ff, axis, truncation_order, beta, mode)?;
    let p1 = app.success_probability;
    if rng.random::<f64>() < p1 {
        return Ok(DipoleSample {
            success: true,
            state: app.branch,
            success_probability: p1,
        });
    }
    // Failure branch: cos(theta1) psi, renormalized.
    let theta = theta_profile(ff, psi.grid, axis, truncation_order, beta, mode)?;
    let mut state = psi.clone();
    for (a, th) in state.amps.iter_mut().zip(&theta) {
        *a *= th.cos();
    }
    state.normalize()?;
    Ok(DipoleSample {
        success: false,
        state,
        success_probability: p1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefield::parse_forcefield;
    use crate::grid::{inner_product, make_grid};
    use crate::state_prep::harmonic_ground_state;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn field() -> ForceField {
        parse_forcefield(include_str!("../../../data/synthetic_h2o_like.ff")).unwrap()
    }

    #[test]
    fn exact_theta_branch_equals_direct_multiplication() {
        let ff = field();
        let g = make_grid(3, 3, 10.0).unwrap();
        let psi = harmonic_ground_state(g);
        for axis in [Axis::X, Axis::Z] {
            for order in [1usize, 3] {
                let beta = choose_beta(&ff, g, axis, order, 20.0).unwrap();
                let app = apply_dipole(&psi, &ff, axis, order, beta, ThetaMode::ExactTheta).unwrap();
                let (direct, n2) = apply_dipole_direct(&psi, &ff, axis, order).unwrap();
                let ov = inner_product(&direct, &app.branch).unwrap();
                // Same global phase by construction: overlap is +1, not a
                // unit-modulus complex number.
                assert!((ov.re - 1.0).abs() < 1e-12 && ov.im.abs() < 1e-12, "{axis} order {order}: {ov}");
                assert_relative_eq!(app.mu_norm_sq, n2, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn taylor_branch_is_close_at_default_margin() {
        let ff = field();
        let g = make_grid(3, 3, 10.0).unwrap();
        let psi = harmonic_ground_state(g);
        let beta = choose_beta(&ff, g, Axis::Z, 3, 20.0).unwrap();
        let app = apply_dipole(&psi, &ff, Axis::Z, 3, beta, ThetaMode::Taylor).unwrap();
        let (direct, _) = apply_dipole_direct(&psi, &ff, Axis::Z, 3).unwrap();
        let ov = inner_product(&direct, &app.branch).unwrap().norm();
        assert!(ov > 0.99999, "overlap {ov}");
    }

    #[test]
    fn two_branch_map_is_unitary() {
        let ff = field();
        let g = make_grid(3, 3, 10.0).unwrap();
        let psi = harmonic_ground_state(g);
        let beta = choose_beta(&ff, g, Axis::X, 2, 20.0).unwrap();
        let app = apply_dipole(&psi, &ff, Axis::X, 2, beta, ThetaMode::ExactTheta).unwrap();
        // The discarded branch carries the remaining weight exactly.
        assert!(app.success_probability > 0.0 && app.success_probability < 1e-3);
        let theta = theta_profile(&ff, g, Axis::X, 2, beta, ThetaMode::ExactTheta).unwrap();
        let p0: f64 = psi
            .amps
            .iter()
            .zip(&theta)
            .map(|(a, th)| a.norm_sqr() * th.cos() * th.cos())
            .sum();
        assert_relative_eq!(p0 + app.success_probability, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn beta_choice_and_domain_checks() {
        let ff = field();
        let g = make_grid(3, 3, 10.0).unwrap();
        let beta = choose_beta(&ff, g, Axis::Z, 1, 20.0).unwrap();
        let mu = crate::hamiltonian::dipole_on_grid(&ff, g, Axis::Z, 1).unwrap();
        assert_relative_eq!(beta, 20.0 * mu.max_abs(), epsilon = 1e-15);
        assert!(choose_beta(&ff, g, Axis::Z, 1, 1.0).is_err());
        assert!(choose_beta(&ff, g, Axis::Y, 1, 20.0).is_err());
        // A beta violating the exact-theta domain is rejected.
        let psi = harmonic_ground_state(g);
        let tiny = mu.max_abs() * 1.01;
        assert!(apply_dipole(&psi, &ff, Axis::Z, 1, tiny, ThetaMode::ExactTheta).is_err());
    }

    #[test]
    fn probabilistic_sampling_matches_success_probability() {
        let ff = field();
        let g = make_grid(2, 3, 10.0).unwrap();
        let psi = harmonic_ground_state(g);
        // Small margin so successes actually happen in 3000 trials.
        let beta = choose_beta(&ff, g, Axis::Z, 1, 2.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut hits = 0usize;
        let trials = 3000usize;
        let mut p = 0.0;
        for _ in 0..trials {
            let s =
                apply_dipole_probabilistic(&psi, &ff, Axis::Z, 1, beta, ThetaMode::ExactTheta, &mut rng)
                    .unwrap();
            p = s.success_probability;
            if s.success {
                hits += 1;
                assert_relative_eq!(s.state.norm_sq(), 1.0, epsilon = 1e-12);
            }
        }
        let freq = hits as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (freq - p).abs() < 5.0 * sigma + 1e-12,
            "freq {freq} vs p {p} (sigma {sigma})"
        );
    }
}

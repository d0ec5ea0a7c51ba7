//! Initial-state preparation: the harmonic product ground state, the
//! imaginary-time-evolved anharmonic ground state, and the rotation-angle
//! tree consumed by the gate-level state-preparation circuit.

use crate::error::{Error, Result};
use crate::fft::ModeTransform;
use crate::forcefield::ForceField;
use crate::grid::{GridSpec, Space, Wavefunction};
use crate::hamiltonian::{expectation_energy, kinetic_energy, potential_on_grid};
use crate::units::phase_angle;
use num_complex::Complex64;

/// Product of per-mode dimensionless harmonic ground states exp(-Q^2/2),
/// sampled on the grid and l2-normalized. Real and strictly positive.
pub fn harmonic_ground_state(g: GridSpec) -> Wavefunction {
    let n = g.n_points();
    let mut psi = Wavefunction::zero(g, Space::Position);
    for (flat, a) in psi.amps.iter_mut().enumerate() {
        let mut rem = flat;
        let mut s = 0.0;
        for _ in 0..g.n_modes() {
            let q = g.q(rem % n);
            s += q * q;
            rem /= n;
        }
        *a = Complex64::new((-0.5 * s).exp(), 0.0);
    }
    psi.normalize().expect("Gaussian norm is finite and positive");
    psi
}

/// Imaginary-time evolution controls. `refine_stages` halves dtau and
/// re-converges that many times after the first stage converges: the split
/// fixed point carries an O(dtau^2) state bias, and annealing dtau removes it
/// without paying the small-dtau iteration count from the start.
#[derive(Debug, Clone, Copy)]
pub struct IteOptions {
    pub dtau_fs: f64,
    pub tol_cm: f64,
    pub max_iters: usize,
    pub refine_stages: usize,
}

impl Default for IteOptions {
    fn default() -> Self {
        IteOptions {
            dtau_fs: 0.1,
            tol_cm: 1e-8,
            max_iters: 1_000_000,
            refine_stages: 2,
        }
    }
}

/// Converged ITE output.
#[derive(Debug, Clone)]
pub struct IteResult {
    pub psi: Wavefunction,
    pub e0_cm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Relax the harmonic ground state to the anharmonic ground state with the
/// split imaginary-time map
///
/// ```text
/// psi <- normalize( exp(-K dtau/2) exp(-V dtau) exp(-K dtau/2) psi )
/// ```
///
/// iterated until the energy settles to within `tol_cm` between iterations,
/// then optionally re-converged at halved dtau (`refine_stages`). Real
/// weights are exp(-2 pi c E dtau_eff) with E in cm^-1.
pub fn imaginary_time_evolve(
    ff: &ForceField,
    g: GridSpec,
    opts: IteOptions,
) -> Result<IteResult> {
    if !(opts.dtau_fs > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dtau must be positive, got {}",
            opts.dtau_fs
        )));
    }
    let v = potential_on_grid(ff, g)?;
    let k = kinetic_energy(g, &ff.omega).combined();
    let mut transform = ModeTransform::new(g);
    let mut psi = harmonic_ground_state(g);
    let mut iterations = 0usize;

    let mut dtau = opts.dtau_fs;
    for _stage in 0..=opts.refine_stages {
        // Stage-constant weight tables.
        let wk_half: Vec<f64> = k.iter().map(|e| (-phase_angle(*e, 0.5 * dtau)).exp()).collect();
        let wv: Vec<f64> = v.values.iter().map(|e| (-phase_angle(*e, dtau)).exp()).collect();

        let mut prev_e = f64::INFINITY;
        let mut stage_converged = false;
        while iterations < opts.max_iters {
            iterations += 1;
            transform.forward(&mut psi);
            for (a, w) in psi.amps.iter_mut().zip(&wk_half) {
                *a *= w;
            }
            transform.inverse(&mut psi);
            for (a, w) in psi.amps.iter_mut().zip(&wv) {
                *a *= w;
            }
            transform.forward(&mut psi);
            for (a, w) in psi.amps.iter_mut().zip(&wk_half) {
                *a *= w;
            }
            // Energy of the current iterate: <K> here in momentum space,
            // <V> after transforming back. Normalize first so both pieces
            // divide by the same norm.
            psi.normalize()?;
            let e_kin: f64 = psi
                .amps
                .iter()
                .zip(&k)
                .map(|(a, e)| a.norm_sqr() * e)
                .sum();
            transform.inverse(&mut psi);
            let e_pot: f64 = psi
                .amps
                .iter()
                .zip(&v.values)
                .map(|(a, e)| a.norm_sqr() * e)
                .sum();
            let e = e_kin + e_pot;
            if !e.is_finite() {
                return Err(Error::Numerical(format!(
                    "imaginary-time energy became non-finite at iteration {iterations}"
                )));
            }
            if (prev_e - e).abs() < opts.tol_cm {
                stage_converged = true;
                break;
            }
            if e > prev_e + 1.0 {
                return Err(Error::Numerical(format!(
                    "imaginary-time energy rose from {prev_e} to {e} at iteration {iterations}"
                )));
            }
            prev_e = e;
        }
        if !stage_converged {
            return Err(Error::NonConvergence(format!(
                "imaginary-time evolution did not settle within {} iterations \
                 (last dtau {dtau} fs)",
                opts.max_iters
            )));
        }
        dtau *= 0.5;
    }

    let e0 = expectation_energy(&psi, ff)?;
    Ok(IteResult {
        psi,
        e0_cm: e0,
        iterations,
        converged: true,
    })
}

/// Rotation-angle tree for preparing a normalized non-negative real
/// amplitude vector with a cascade of uniformly controlled R_y rotations.
///
/// Level j holds 2^j angles; angle (j, p) acts on qubit q_{n-1-j} controlled
/// by the pattern p on the j more significant qubits, and splits the block of
/// amplitudes with that prefix into a lower (bit 0) and upper (bit 1) half:
///
/// ```text
/// theta_{j,p} = 2 atan2(||upper half||, ||lower half||)
/// ```
///
/// with R_y(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>. Blocks of zero
/// norm get angle 0.
pub fn ucr_angles(amplitudes: &[f64]) -> Result<Vec<Vec<f64>>> {
    let len = amplitudes.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "amplitude vector length must be a power of two >= 2, got {len}"
        )));
    }
    if amplitudes.iter().any(|a| *a < 0.0) {
        return Err(Error::InvalidInput(
            "this preparation handles non-negative real amplitudes only".into(),
        ));
    }
    let norm_sq: f64 = amplitudes.iter().map(|a| a * a).sum();
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "amplitudes must be normalized, got |a|^2 = {norm_sq}"
        )));
    }
    let n = len.trailing_zeros() as usize;
    let mut levels = Vec::with_capacity(n);
    for j in 0..n {
        let blocks = 1usize << j;
        let block_len = len >> j;
        let mut angles = Vec::with_capacity(blocks);
        for p in 0..blocks {
            let start = p * block_len;
            let half = block_len / 2;
            let lower: f64 = amplitudes[start..start + half]
                .iter()
                .map(|a| a * a)
                .sum::<f64>()
                .sqrt();
            let upper: f64 = amplitudes[start + half..start + block_len]
                .iter()
                .map(|a| a * a)
                .sum::<f64>()
                .sqrt();
            let theta = if lower == 0.0 && upper == 0.0 {
                0.0
            } else {
                2.0 * upper.atan2(lower)
            };
            angles.push(theta);
        }
        levels.push(angles);
    }
    Ok(levels)
}

/// Classical reconstruction of the state the angle tree prepares; used by
/// tests here and cross-checked against gate-level execution in the circuit
/// layer.
pub fn ucr_reconstruct(levels: &[Vec<f64>]) -> Vec<f64> {
    let n = levels.len();
    let len = 1usize << n;
    let mut amps = vec![1.0f64];
    for level in levels.iter().take(n) {
        let mut next = Vec::with_capacity(amps.len() * 2);
        for (p, a) in amps.iter().enumerate() {
            let th = 0.5 * level[p];
            next.push(a * th.cos());
            next.push(a * th.sin());
        }
        amps = next;
    }
    debug_assert_eq!(amps.len(), len);
    amps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefield::parse_forcefield;
    use crate::grid::{inner_product, make_grid};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gaussian_shape_and_norm() {
        let g = make_grid(4, 1, 10.0).unwrap();
        let psi = harmonic_ground_state(g);
        assert_relative_eq!(psi.norm_sq(), 1.0, epsilon = 1e-12);
        // Peak at Q = 0 (x = 8), symmetric under Q -> -Q away from the
        // unpaired x = 0 edge point.
        let peak = psi.amps[8].re;
        assert!(psi.amps.iter().all(|a| a.re <= peak && a.re > 0.0));
        for off in 1..8 {
            assert_relative_eq!(psi.amps[8 + off].re, psi.amps[8 - off].re, epsilon = 1e-12);
        }
    }

    #[test]
    fn ite_on_harmonic_field_is_a_fixed_point() {
        let ff = parse_forcefield("modes 1\nomega 0 1600\nmu x 0 0.1\n").unwrap();
        let g = make_grid(4, 1, 10.0).unwrap();
        let out = imaginary_time_evolve(&ff, g, IteOptions::default()).unwrap();
        assert!((out.e0_cm - 800.0).abs() < 0.1, "E0 = {}", out.e0_cm);
        let ov = inner_product(&out.psi, &harmonic_ground_state(g)).unwrap().norm();
        assert!(ov > 0.999_999, "overlap {ov}");
    }

    #[test]
    fn ite_energy_is_monotone_within_a_stage() {
        // Re-run the stage loop manually to watch the energy sequence.
        let ff = parse_forcefield(include_str!("../../../data/synthetic_h2o_like.ff")).unwrap();
        let g = make_grid(4, 3, 10.0).unwrap();
        let opts = IteOptions {
            refine_stages: 0,
            max_iters: 2000,
            tol_cm: 1e-6,
            ..IteOptions::default()
        };
        // The public API asserts convergence; the monotone property is
        // checked through the divergence guard inside (energy rising by
        // > 1 cm^-1 errors out) plus the final value being below the start.
        let start = expectation_energy(&harmonic_ground_state(g), &ff).unwrap();
        let out = imaginary_time_evolve(&ff, g, opts).unwrap();
        assert!(out.e0_cm < start, "{} !< {start}", out.e0_cm);
    }

    #[test]
    fn ite_result_stable_under_further_dtau_halving() {
        let ff = parse_forcefield(include_str!("../../../data/synthetic_h2o_like.ff")).unwrap();
        let g = make_grid(3, 3, 10.0).unwrap();
        let a = imaginary_time_evolve(&ff, g, IteOptions { refine_stages: 2, ..IteOptions::default() })
            .unwrap();
        let b = imaginary_time_evolve(&ff, g, IteOptions { refine_stages: 3, ..IteOptions::default() })
            .unwrap();
        let ov = inner_product(&a.psi, &b.psi).unwrap().norm();
        assert!(ov > 1.0 - 1e-8, "overlap {ov}");
    }

    #[test]
    fn ucr_trivial_cases() {
        let n = 16usize;
        let uniform = vec![1.0 / (n as f64).sqrt(); n];
        let levels = ucr_angles(&uniform).unwrap();
        for level in &levels {
            for th in level {
                assert_relative_eq!(*th, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
            }
        }
        let mut basis = vec![0.0; n];
        basis[0] = 1.0;
        let levels = ucr_angles(&basis).unwrap();
        for level in &levels {
            for th in level {
                assert_eq!(*th, 0.0);
            }
        }
    }

    #[test]
    fn ucr_rejects_bad_input() {
        assert!(ucr_angles(&[0.6, -0.8]).is_err());
        assert!(ucr_angles(&[0.5, 0.5]).is_err());
        assert!(ucr_angles(&[1.0, 0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn ucr_reconstructs_random_nonnegative_vectors(
            raw in proptest::collection::vec(0.0f64..1.0, 32),
            n_exp in 1usize..=5,
        ) {
            let len = 1usize << n_exp;
            let mut v: Vec<f64> = raw[..len].to_vec();
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            for a in &mut v { *a /= norm; }
            let levels = ucr_angles(&v).unwrap();
            let back = ucr_reconstruct(&levels);
            for (a, b) in v.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

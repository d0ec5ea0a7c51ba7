//! Hadamard-test readout of overlap amplitudes, exact and shot-sampled.
//!
//! The interferometric circuit measures Re and Im of the normalized overlap
//! a = <ref|psi> one quadrature at a time. The ancilla outcome statistics
//! are Bernoulli with
//!
//! ```text
//! real quadrature:  P(0) = (1 + Re a) / 2
//! imag quadrature:  P(0) = (1 - Im a) / 2    (so Im a = P(1) - P(0))
//! ```
//!
//! The sampled estimator draws binomial counts at a finite shot budget and
//! inverts those relations. Estimates are finally scaled by the dipole norm
//! factor `mu_norm_sq` carried alongside the normalized states.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};

/// Exact expectation the sampled estimator converges to.
pub fn hadamard_exact(overlap: Complex64, mu_norm_sq: f64) -> Complex64 {
    overlap * mu_norm_sq
}

/// Standard deviation of one quadrature of the sampled estimator (before
/// the `mu_norm_sq` scaling), for calibration checks: 2 sqrt(p(1-p)/shots).
pub fn quadrature_sigma(p_zero: f64, shots: u64) -> f64 {
    2.0 * (p_zero.clamp(0.0, 1.0) * (1.0 - p_zero.clamp(0.0, 1.0)) / shots as f64).sqrt()
}

/// Estimate one overlap from `shots` measurements per quadrature.
pub fn hadamard_sampled<R: Rng + ?Sized>(
    overlap: Complex64,
    mu_norm_sq: f64,
    shots: u64,
    rng: &mut R,
) -> Result<Complex64> {
    if shots == 0 {
        return Err(Error::InvalidInput("shot count must be positive".into()));
    }
    let p_re0 = ((1.0 + overlap.re) / 2.0).clamp(0.0, 1.0);
    let p_im0 = ((1.0 - overlap.im) / 2.0).clamp(0.0, 1.0);
    let re_zeros = Binomial::new(shots, p_re0)
        .map_err(|e| Error::Numerical(format!("binomial setup failed: {e}")))?
        .sample(rng);
    let im_zeros = Binomial::new(shots, p_im0)
        .map_err(|e| Error::Numerical(format!("binomial setup failed: {e}")))?
        .sample(rng);
    let re = 2.0 * re_zeros as f64 / shots as f64 - 1.0;
    let im = 1.0 - 2.0 * im_zeros as f64 / shots as f64;
    Ok(Complex64::new(re, im) * mu_norm_sq)
}

/// Derive a per-sample generator so each series point sees an independent,
/// reproducible stream regardless of evaluation order.
pub fn point_rng(seed: u64, index: usize) -> ChaCha12Rng {
    let mixed = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha12Rng::seed_from_u64(mixed)
}

/// Shot-sample a whole overlap series with per-point derived seeds.
pub fn sample_series(
    overlaps: &[Complex64],
    mu_norm_sq: f64,
    shots: u64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    overlaps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut rng = point_rng(seed, i);
            hadamard_sampled(*a, mu_norm_sq, shots, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_readout_is_a_scaling() {
        let a = Complex64::new(0.3, -0.4);
        let v = hadamard_exact(a, 2.5);
        assert_relative_eq!(v.re, 0.75, epsilon = 1e-15);
        assert_relative_eq!(v.im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn extreme_overlaps_are_read_exactly() {
        // p = 0 or 1 makes the binomial deterministic; these pin the sign
        // convention of each quadrature (the other quadrature stays random).
        let mut rng = point_rng(1, 0);
        let v = hadamard_sampled(Complex64::new(1.0, 0.0), 1.0, 100, &mut rng).unwrap();
        assert_eq!(v.re, 1.0);
        let v = hadamard_sampled(Complex64::new(-1.0, 0.0), 1.0, 100, &mut rng).unwrap();
        assert_eq!(v.re, -1.0);
        let v = hadamard_sampled(Complex64::new(0.0, -1.0), 1.0, 100, &mut rng).unwrap();
        assert_eq!(v.im, -1.0);
        let v = hadamard_sampled(Complex64::new(0.0, 1.0), 1.0, 100, &mut rng).unwrap();
        assert_eq!(v.im, 1.0);
    }

    #[test]
    fn large_shot_budget_converges() {
        let a = Complex64::new(0.37, -0.22);
        let mut rng = point_rng(42, 3);
        let est = hadamard_sampled(a, 1.0, 1_000_000, &mut rng).unwrap();
        let bound = 5.0 * quadrature_sigma((1.0 + a.re) / 2.0, 1_000_000);
        assert!((est.re - a.re).abs() < bound, "re {} vs {}", est.re, a.re);
        assert!((est.im - a.im).abs() < bound, "im {} vs {}", est.im, a.im);
    }

    #[test]
    fn sampling_is_deterministic_per_seed_and_index() {
        let series = vec![Complex64::new(0.5, 0.1); 4];
        let a = sample_series(&series, 1.0, 1000, 9).unwrap();
        let b = sample_series(&series, 1.0, 1000, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_series(&series, 1.0, 1000, 10).unwrap();
        assert_ne!(a, c);
        // Identical overlap values at different indices draw different noise.
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn quadrature_noise_matches_binomial_prediction() {
        let a = Complex64::new(0.31, -0.55);
        let shots = 4000u64;
        let trials = 400usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for t in 0..trials {
            let mut rng = point_rng(1234, t);
            let est = hadamard_sampled(a, 1.0, shots, &mut rng).unwrap();
            sum += est.re;
            sum_sq += est.re * est.re;
        }
        let mean = sum / trials as f64;
        let var = sum_sq / trials as f64 - mean * mean;
        let predicted = quadrature_sigma((1.0 + a.re) / 2.0, shots);
        let ratio = var.sqrt() / predicted;
        assert!((0.8..1.2).contains(&ratio), "ratio {ratio}");
        assert!((mean - a.re).abs() < 5.0 * predicted / (trials as f64).sqrt());
    }

    #[test]
    fn zero_shots_rejected() {
        let mut rng = point_rng(0, 0);
        assert!(hadamard_sampled(Complex64::new(0.0, 0.0), 1.0, 0, &mut rng).is_err());
    }
}

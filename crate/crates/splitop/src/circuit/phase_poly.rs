//! Diagonal phase circuits for polynomial exponents.
//!
//! A diagonal unitary exp(i P(Q_0, .., Q_{d-1})) with P a polynomial and
//! each variable affine in the register bits,
//!
//!   Q_m = alpha_m + sum_q beta_{m,q} x_{m,q},    x in {0, 1},
//!
//! expands into a sum of bit products. Because x^2 = x, every product of
//! bits collapses onto the distinct qubits it touches, so each term becomes
//! a (multi-)controlled phase gate. Gates are organized into blocks, one
//! block per multiset of mode indices ("class") that appears as a
//! sub-multiset of some monomial of P; within a block there is exactly one
//! gate slot per ordered assignment of one bit position to each class
//! entry, i.e. n^k slots for a degree-k class at n qubits per mode. Slots
//! whose accumulated angle is zero are still emitted, so the gate count of
//! a block depends only on its index-coincidence pattern and n.
//!
//! The constant block (empty class) is a global phase, realized as the
//! four-gate sequence U1(theta) X U1(theta) X on qubit 0 whose product is
//! exp(i theta) times the identity.

use std::collections::{BTreeMap, BTreeSet};

use super::{Circuit, Gate, Layout};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// One register variable expressed over its bits: alpha + sum beta_q x_q.
#[derive(Debug, Clone)]
pub struct AffineVariable {
    pub alpha: f64,
    pub betas: Vec<f64>,
}

/// Position variables Q_m = -L/2 + dQ (sum 2^q x_q) for every mode.
pub fn position_variables(g: GridSpec) -> Vec<AffineVariable> {
    let n = g.n_qubits_per_mode();
    (0..g.n_modes())
        .map(|_| AffineVariable {
            alpha: -0.5 * g.length(),
            betas: (0..n).map(|q| g.dq() * (1u64 << q) as f64).collect(),
        })
        .collect()
}

/// Centered momentum variables p_m = dP (y_m - N/2), monotone in the
/// register value y_m. The FFT-ordered (wrapped) momenta are this labeling
/// composed with a half-period index shift; see the kinetic step tests.
pub fn centered_momentum_variables(g: GridSpec) -> Vec<AffineVariable> {
    let n = g.n_qubits_per_mode();
    (0..g.n_modes())
        .map(|_| AffineVariable {
            alpha: -g.dp() * (g.n_points() / 2) as f64,
            betas: (0..n).map(|q| g.dp() * (1u64 << q) as f64).collect(),
        })
        .collect()
}

/// One monomial of the phase polynomial: coeff times the product of the
/// listed mode variables (repeats allowed, giving powers). The coefficient
/// is already an angle in radians per unit variable product.
#[derive(Debug, Clone)]
pub struct PolyTerm {
    pub modes: Vec<usize>,
    pub coeff: f64,
}

impl PolyTerm {
    pub fn new(modes: &[usize], coeff: f64) -> Self {
        let mut modes = modes.to_vec();
        modes.sort_unstable();
        PolyTerm { modes, coeff }
    }
}

/// Enumerate the ordered bit tuples of a degree-k class at n bits per
/// register, lexicographically.
fn for_each_slot(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut bits = vec![0usize; k];
    loop {
        f(&bits);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            bits[pos] += 1;
            if bits[pos] < n {
                break;
            }
            bits[pos] = 0;
        }
    }
}

/// The distinct, sorted qubit set a slot touches.
fn slot_qubits(layout: &Layout, class: &[usize], bits: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = class
        .iter()
        .zip(bits)
        .map(|(&mode, &q)| layout.mode_bit(mode, q))
        .collect();
    set.into_iter().collect()
}

/// The global-phase block: U1(theta) X U1(theta) X on one qubit equals
/// exp(i theta) times the identity.
pub fn global_phase_gadget(target: usize, theta: f64) -> [Gate; 4] {
    [
        Gate::Phase { qubits: vec![target], angle: theta },
        Gate::X(target),
        Gate::Phase { qubits: vec![target], angle: theta },
        Gate::X(target),
    ]
}

/// All sub-multisets of a sorted multiset, including the empty one.
fn sub_multisets(modes: &[usize]) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for mask in 0..(1usize << modes.len()) {
        let sub: Vec<usize> = modes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &m)| m)
            .collect();
        out.insert(sub);
    }
    out
}

/// Build the diagonal circuit exp(i sum_terms coeff prod Q) over the given
/// affine variables. Every class that occurs as a sub-multiset of a
/// monomial is emitted in full (all n^k slots), matching the canonical
/// block accounting; angles accumulate across monomials feeding the same
/// slot.
pub fn build_phase_polynomial(
    layout: &Layout,
    vars: &[AffineVariable],
    terms: &[PolyTerm],
) -> Result<Circuit> {
    if vars.len() != layout.n_modes() {
        return Err(Error::InvalidInput(format!(
            "{} affine variables for {} modes",
            vars.len(),
            layout.n_modes()
        )));
    }
    let n = layout.qubits_per_mode();
    for v in vars {
        if v.betas.len() != n {
            return Err(Error::InvalidInput(
                "affine variable bit count does not match layout".into(),
            ));
        }
    }

    let mut classes: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut slot_angles: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
    let mut constant_angle = 0.0f64;

    for term in terms {
        let mut modes = term.modes.clone();
        modes.sort_unstable();
        let k = modes.len();
        if k > 4 {
            return Err(Error::InvalidInput(format!(
                "phase polynomial degree {k} exceeds the gate vocabulary (max 4)"
            )));
        }
        if modes.iter().any(|&m| m >= layout.n_modes()) {
            return Err(Error::InvalidInput("monomial touches a mode outside the grid".into()));
        }
        classes.extend(sub_multisets(&modes));

        // Expand the product of affine factors: every position contributes
        // either its constant alpha or one bit term.
        for mask in 0..(1usize << k) {
            let chosen: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            let alpha_part: f64 = (0..k)
                .filter(|i| mask >> i & 1 == 0)
                .map(|i| vars[modes[i]].alpha)
                .product();
            if chosen.is_empty() {
                constant_angle += term.coeff * alpha_part;
                continue;
            }
            let sub: Vec<usize> = chosen.iter().map(|&i| modes[i]).collect();
            for_each_slot(n, chosen.len(), |bits| {
                let beta_part: f64 = chosen
                    .iter()
                    .zip(bits)
                    .map(|(&i, &q)| vars[modes[i]].betas[q])
                    .product();
                *slot_angles.entry((sub.clone(), bits.to_vec())).or_insert(0.0) +=
                    term.coeff * alpha_part * beta_part;
            });
        }
    }

    let mut ordered: Vec<Vec<usize>> = classes.into_iter().collect();
    ordered.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut circuit = Circuit::new(layout.n_qubits());
    for class in &ordered {
        if class.is_empty() {
            for gate in global_phase_gadget(0, constant_angle) {
                circuit.push(gate);
            }
            continue;
        }
        for_each_slot(n, class.len(), |bits| {
            let angle = slot_angles
                .get(&(class.clone(), bits.to_vec()))
                .copied()
                .unwrap_or(0.0);
            let qubits = slot_qubits(layout, class, bits);
            circuit.push(Gate::Phase { qubits, angle });
        });
    }
    Ok(circuit)
}

/// The gates of a single class block with every slot carrying the same
/// angle. Used by the accounting checks; the angle is irrelevant to counts.
pub fn build_class_circuit(layout: &Layout, class: &[usize], angle: f64) -> Result<Circuit> {
    let mut class = class.to_vec();
    class.sort_unstable();
    if class.len() > 4 {
        return Err(Error::InvalidInput("class degree above 4".into()));
    }
    if class.iter().any(|&m| m >= layout.n_modes()) {
        return Err(Error::InvalidInput("class touches a mode outside the layout".into()));
    }
    let mut circuit = Circuit::new(layout.n_qubits());
    if class.is_empty() {
        for gate in global_phase_gadget(0, angle) {
            circuit.push(gate);
        }
        return Ok(circuit);
    }
    for_each_slot(layout.qubits_per_mode(), class.len(), |bits| {
        let qubits = slot_qubits(layout, &class, bits);
        circuit.push(Gate::Phase { qubits, angle });
    });
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::execute::execute;
    use crate::grid::make_grid;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Execute a circuit on a register-uniform statevector and compare each
    /// register amplitude's phase against the target polynomial.
    fn assert_diagonal_matches(
        g: crate::grid::GridSpec,
        terms: &[PolyTerm],
        vars: &[AffineVariable],
        tol: f64,
    ) {
        let layout = Layout::for_grid(g);
        let circuit = build_phase_polynomial(&layout, vars, terms).unwrap();
        let mut state = vec![Complex64::ZERO; 1usize << layout.n_qubits()];
        for x in 0..g.total_points() {
            state[x] = Complex64::ONE;
        }
        execute(&circuit, &mut state).unwrap();

        let n = g.n_points();
        for flat in 0..g.total_points() {
            let mut rem = flat;
            let mut values = vec![0usize; g.n_modes()];
            for m in (0..g.n_modes()).rev() {
                values[m] = rem % n;
                rem /= n;
            }
            let mut target = 0.0f64;
            for t in terms {
                let mut prod = t.coeff;
                for &m in &t.modes {
                    prod *= vars[m].alpha
                        + vars[m]
                            .betas
                            .iter()
                            .enumerate()
                            .map(|(q, b)| b * ((values[m] >> q & 1) as f64))
                            .sum::<f64>();
                }
                target += prod;
            }
            let expect = Complex64::from_polar(1.0, target);
            assert_abs_diff_eq!((state[flat] - expect).norm(), 0.0, epsilon = tol);
        }
    }

    #[test]
    fn single_quadratic_monomial_matches_diagonal() {
        let g = make_grid(2, 2, 10.0).unwrap();
        let vars = position_variables(g);
        let terms = [PolyTerm::new(&[0, 1], 0.37)];
        assert_diagonal_matches(g, &terms, &vars, 1e-12);
    }

    #[test]
    fn coincidence_patterns_match_diagonals() {
        // All index-coincidence patterns through degree 4, including the
        // all-distinct quartic (four modes).
        let cases: [&[usize]; 12] = [
            &[],
            &[0],
            &[0, 0],
            &[0, 1],
            &[0, 0, 0],
            &[0, 0, 1],
            &[0, 1, 2],
            &[1, 1, 1, 1],
            &[0, 1, 1, 1],
            &[0, 0, 1, 1],
            &[0, 1, 1, 2],
            &[0, 1, 2, 3],
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for case in cases {
            let d = case.iter().copied().max().unwrap_or(0) + 1;
            for n in [2usize, 3] {
                let g = make_grid(n, d.max(1), 10.0).unwrap();
                let vars = position_variables(g);
                for _ in 0..3 {
                    // Coefficient scale keeps total phases of a few radians,
                    // matching the per-step magnitudes of real evolutions.
                    let b: f64 = rng.random_range(-0.05..0.05);
                    let terms = [PolyTerm::new(case, b)];
                    assert_diagonal_matches(g, &terms, &vars, 1e-12);
                }
            }
        }
    }

    #[test]
    fn momentum_variables_and_mixed_polynomial_match() {
        let g = make_grid(3, 2, 10.0).unwrap();
        let vars = centered_momentum_variables(g);
        let terms = [
            PolyTerm::new(&[0, 0], -0.21),
            PolyTerm::new(&[1, 1], 0.13),
        ];
        assert_diagonal_matches(g, &terms, &vars, 1e-12);
    }

    #[test]
    fn grouped_polynomial_matches_sum_of_monomials() {
        let g = make_grid(2, 3, 10.0).unwrap();
        let vars = position_variables(g);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let terms: Vec<PolyTerm> = vec![
            PolyTerm::new(&[0], rng.random_range(-0.3..0.3)),
            PolyTerm::new(&[0, 0], rng.random_range(-0.3..0.3)),
            PolyTerm::new(&[0, 1], rng.random_range(-0.3..0.3)),
            PolyTerm::new(&[0, 0, 2], rng.random_range(-0.3..0.3)),
            PolyTerm::new(&[0, 1, 2], rng.random_range(-0.3..0.3)),
            PolyTerm::new(&[2, 2, 2, 2], rng.random_range(-0.1..0.1)),
        ];
        assert_diagonal_matches(g, &terms, &vars, 1e-12);
    }

    #[test]
    fn blocks_are_emitted_structurally_even_at_zero_angle() {
        // A single monomial Q0^2 Q1 at n = 2 generates blocks for the
        // classes {}, {0}, {1}, {0,0}, {0,1}, {0,0,1}: 4 + 2n + 2n^2 +
        // (5n^3 - 4n^2) gates under canonical weights.
        let g = make_grid(2, 2, 10.0).unwrap();
        let layout = Layout::for_grid(g);
        let vars = position_variables(g);
        let c = build_phase_polynomial(&layout, &vars, &[PolyTerm::new(&[0, 0, 1], 1e-4)])
            .unwrap();
        assert_eq!(c.canonical_count(), 4 + 4 + 8 + 24);
    }

    #[test]
    fn degree_five_is_rejected() {
        let g = make_grid(2, 2, 10.0).unwrap();
        let layout = Layout::for_grid(g);
        let vars = position_variables(g);
        let r = build_phase_polynomial(&layout, &vars, &[PolyTerm::new(&[0, 0, 0, 0, 1], 0.1)]);
        assert!(r.is_err());
    }

    #[test]
    fn global_phase_gadget_is_global_phase() {
        let mut state = vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ];
        let mut c = Circuit::new(1);
        for gate in global_phase_gadget(0, 0.77) {
            c.push(gate);
        }
        execute(&c, &mut state).unwrap();
        let ph = Complex64::from_polar(1.0, 0.77);
        assert_abs_diff_eq!((state[0] - ph * Complex64::new(0.6, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((state[1] - ph * Complex64::new(0.0, 0.8)).norm(), 0.0, epsilon = 1e-15);
    }
}

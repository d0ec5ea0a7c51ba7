//! Closed-form gate accounting for the propagation circuits.
//!
//! Every diagonal block is a set of phase-gate slots, one per ordered
//! assignment of register bits to the block's mode multiset, so its cost
//! depends only on the index-coincidence pattern of the multiset and the
//! qubits per mode n. With two-qubit decompositions CCU1 = 5 and CCCU1 = 21
//! and the four-gate global-phase gadget, the per-block costs are
//!
//!   constant             4
//!   i                    n
//!   ii, ij               n^2
//!   iii                  5n^3 - 12n^2 + 8n
//!   iij                  5n^3 - 4n^2
//!   ijk                  5n^3
//!   iiii                 21n^4 - 96n^3 + 148n^2 - 72n
//!   iiij                 21n^4 - 48n^3 + 28n^2
//!   iijj                 21n^4 - 32n^3 + 12n^2
//!   iijk                 21n^4 - 16n^3
//!   ijkl                 21n^4
//!
//! obtained by classifying each ordered bit tuple by how many distinct
//! qubits it touches. A polynomial's circuit emits one block for every
//! mode multiset that occurs as a sub-multiset of one of its monomials
//! (shared blocks merge, their angles adding), so the total is the sum of
//! the closed forms over that downward-closed block set.

use std::collections::BTreeSet;

use serde::Serialize;

use super::dipole_circuit::dipole_monomials;
use super::qft::qft_gate_count;
use super::state_prep_circuit::state_prep_gate_count;
use super::timestep::potential_monomials;
use crate::error::Result;
use crate::forcefield::ForceField;

/// Gate cost of one block from its mode multiset, by coincidence pattern.
pub fn block_gate_count(class: &[usize], n: u64) -> u64 {
    let mut sorted = class.to_vec();
    sorted.sort_unstable();
    let mut mults: Vec<u64> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&m| m == sorted[i]).count();
        mults.push(j as u64);
        i += j;
    }
    mults.sort_unstable_by(|a, b| b.cmp(a));
    let n = n as i64;
    let v: i64 = match mults.as_slice() {
        [] => 4,
        [1] => n,
        [2] | [1, 1] => n * n,
        [3] => 5 * n.pow(3) - 12 * n * n + 8 * n,
        [2, 1] => 5 * n.pow(3) - 4 * n * n,
        [1, 1, 1] => 5 * n.pow(3),
        [4] => 21 * n.pow(4) - 96 * n.pow(3) + 148 * n * n - 72 * n,
        [3, 1] => 21 * n.pow(4) - 48 * n.pow(3) + 28 * n * n,
        [2, 2] => 21 * n.pow(4) - 32 * n.pow(3) + 12 * n * n,
        [2, 1, 1] => 21 * n.pow(4) - 16 * n.pow(3),
        [1, 1, 1, 1] => 21 * n.pow(4),
        _ => panic!("block degree above 4 is outside the accounting"),
    };
    v as u64
}

/// The coincidence-pattern table: label and gate count for every pattern
/// through degree 4 at the given n.
pub fn coincidence_table(n: u64) -> Vec<(&'static str, u64)> {
    let patterns: [(&str, &[usize]); 12] = [
        ("constant", &[]),
        ("i", &[0]),
        ("ii", &[0, 0]),
        ("ij", &[0, 1]),
        ("iii", &[0, 0, 0]),
        ("iij", &[0, 0, 1]),
        ("ijk", &[0, 1, 2]),
        ("iiii", &[0, 0, 0, 0]),
        ("iiij", &[0, 0, 0, 1]),
        ("iijj", &[0, 0, 1, 1]),
        ("iijk", &[0, 0, 1, 2]),
        ("ijkl", &[0, 1, 2, 3]),
    ];
    patterns
        .iter()
        .map(|(label, class)| (*label, block_gate_count(class, n)))
        .collect()
}

/// Downward closure: every mode multiset occurring as a sub-multiset of a
/// monomial, including the constant block.
pub fn grouped_blocks(monomials: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for m in monomials {
        let mut sorted = m.clone();
        sorted.sort_unstable();
        for mask in 0..(1usize << sorted.len()) {
            let sub: Vec<usize> = sorted
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            out.insert(sub);
        }
    }
    out
}

/// One degree row of a block table: which blocks and their summed cost.
#[derive(Debug, Clone, Serialize)]
pub struct BlockRow {
    pub degree: usize,
    pub blocks: Vec<Vec<usize>>,
    pub gates: u64,
}

/// Rows (by degree) and total for a monomial family.
pub fn block_rows(monomials: &[Vec<usize>], n: u64) -> (Vec<BlockRow>, u64) {
    let blocks = grouped_blocks(monomials);
    let max_deg = blocks.iter().map(|b| b.len()).max().unwrap_or(0);
    let mut rows = Vec::new();
    let mut total = 0u64;
    for degree in 0..=max_deg {
        let of_degree: Vec<Vec<usize>> =
            blocks.iter().filter(|b| b.len() == degree).cloned().collect();
        if of_degree.is_empty() {
            continue;
        }
        let gates: u64 = of_degree.iter().map(|b| block_gate_count(b, n)).sum();
        total += gates;
        rows.push(BlockRow { degree, blocks: of_degree, gates });
    }
    (rows, total)
}

/// Kinetic diagonal per register: n^2 + n + 4.
pub fn kinetic_diagonal_gate_count(n: u64) -> u64 {
    n * n + n + 4
}

#[derive(Debug, Clone, Serialize)]
pub struct QubitTally {
    pub register: u64,
    pub dipole_ancilla: u64,
    pub decomposition_ancillas: u64,
    pub readout_ancilla: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DipoleResources {
    pub axis: String,
    pub truncation_order: usize,
    pub rows: Vec<BlockRow>,
    pub one_sided_gates: u64,
    pub both_sides_gates: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepResources {
    pub potential_rows: Vec<BlockRow>,
    pub potential_gates: u64,
    pub kinetic_gates_per_register: u64,
    pub kinetic_gates: u64,
    pub qft_gates_per_register: u64,
    pub qft_gates: u64,
    pub step_gates: u64,
}

/// Full accounting for one force field at a given register width.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub field_name: String,
    pub n_modes: usize,
    pub qubits_per_mode: usize,
    pub qubits: QubitTally,
    pub coincidence_gate_table: Vec<(String, u64)>,
    pub state_prep_gates_per_register: u64,
    pub state_prep_gates: u64,
    pub step: StepResources,
    pub dipole: Vec<DipoleResources>,
    pub n_steps: Option<u64>,
    pub propagation_gates: Option<u64>,
}

/// Assemble the report. `n_steps` adds the whole-propagation product.
pub fn resource_report(
    ff: &ForceField,
    qubits_per_mode: usize,
    truncation_order: usize,
    n_steps: Option<u64>,
) -> Result<ResourceReport> {
    let n = qubits_per_mode as u64;
    let d = ff.n_modes as u64;

    let potential: Vec<Vec<usize>> =
        potential_monomials(ff).into_iter().map(|(m, _)| m).collect();
    let (potential_rows, potential_gates) = block_rows(&potential, n);
    let kinetic_per = kinetic_diagonal_gate_count(n);
    let qft_per = qft_gate_count(n);
    let step_gates = potential_gates + 2 * d * kinetic_per + 2 * d * qft_per;

    let mut dipole = Vec::new();
    for axis in ff.active_axes() {
        let monomials: Vec<Vec<usize>> = dipole_monomials(ff, axis, truncation_order)?
            .into_iter()
            .map(|(m, _)| m)
            .collect();
        let (rows, one_sided) = block_rows(&monomials, n);
        dipole.push(DipoleResources {
            axis: axis.as_str().to_string(),
            truncation_order,
            rows,
            one_sided_gates: one_sided,
            both_sides_gates: 2 * one_sided,
        });
    }

    Ok(ResourceReport {
        field_name: ff.name.clone(),
        n_modes: ff.n_modes,
        qubits_per_mode,
        qubits: QubitTally {
            register: n * d,
            dipole_ancilla: 1,
            decomposition_ancillas: 2,
            readout_ancilla: 1,
            total: n * d + 4,
        },
        coincidence_gate_table: coincidence_table(n)
            .into_iter()
            .map(|(l, v)| (l.to_string(), v))
            .collect(),
        state_prep_gates_per_register: state_prep_gate_count(n),
        state_prep_gates: d * state_prep_gate_count(n),
        step: StepResources {
            potential_rows,
            potential_gates,
            kinetic_gates_per_register: kinetic_per,
            kinetic_gates: d * kinetic_per,
            qft_gates_per_register: qft_per,
            qft_gates: d * qft_per,
            step_gates,
        },
        dipole,
        n_steps,
        propagation_gates: n_steps.map(|s| s * step_gates),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::decompose::decompose_multicontrolled;
    use crate::circuit::phase_poly::build_class_circuit;
    use crate::circuit::timestep::{build_kinetic_diagonal, build_timestep_circuit};
    use crate::circuit::Layout;
    use crate::forcefield::parse_forcefield;
    use crate::grid::make_grid;

    fn test_field() -> ForceField {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/synthetic_h2o_like.ff"
        ))
        .unwrap();
        parse_forcefield(&text).unwrap()
    }

    #[test]
    fn coincidence_table_at_reference_width() {
        let expect: [(&str, u64); 12] = [
            ("constant", 4),
            ("i", 4),
            ("ii", 16),
            ("ij", 16),
            ("iii", 160),
            ("iij", 256),
            ("ijk", 320),
            ("iiii", 1312),
            ("iiij", 2752),
            ("iijj", 3520),
            ("iijk", 4352),
            ("ijkl", 5376),
        ];
        assert_eq!(coincidence_table(4), expect.to_vec());
    }

    #[test]
    fn closed_forms_match_measured_decomposed_circuits() {
        // Every coincidence pattern: build the block, decompose the
        // multi-controlled phases, and count the emitted gates.
        let patterns: [&[usize]; 12] = [
            &[],
            &[0],
            &[0, 0],
            &[0, 1],
            &[0, 0, 0],
            &[0, 0, 1],
            &[0, 1, 2],
            &[0, 0, 0, 0],
            &[0, 0, 0, 1],
            &[0, 0, 1, 1],
            &[0, 0, 1, 2],
            &[0, 1, 2, 3],
        ];
        for n in 2..=5usize {
            for class in patterns {
                let d = class.iter().copied().max().map_or(1, |m| m + 1);
                let layout = Layout::new(n, d);
                let circuit = build_class_circuit(&layout, class, 0.123).unwrap();
                let decomposed =
                    decompose_multicontrolled(&circuit, layout.work_ancillas()).unwrap();
                assert_eq!(
                    decomposed.len() as u64,
                    block_gate_count(class, n as u64),
                    "pattern {class:?} at n = {n}"
                );
                assert_eq!(circuit.canonical_count(), decomposed.len() as u64);
            }
        }
    }

    #[test]
    fn grouped_rows_reproduce_reference_budgets() {
        let ff = test_field();
        let report = resource_report(&ff, 4, 3, Some(60_000)).unwrap();

        assert_eq!(report.qubits.total, 16);
        assert_eq!(report.state_prep_gates_per_register, 29);

        // Potential rows: constant 4, linear 12, quadratic 96, cubic 2336,
        // quartic 24352; total 26800.
        let by_degree: Vec<u64> = report.step.potential_rows.iter().map(|r| r.gates).collect();
        assert_eq!(by_degree, vec![4, 12, 96, 2336, 24_352]);
        assert_eq!(report.step.potential_gates, 26_800);
        assert_eq!(report.step.kinetic_gates, 72);
        assert_eq!(report.step.qft_gates, 36);
        assert_eq!(report.step.step_gates, 27_016);
        assert_eq!(report.propagation_gates, Some(1_620_960_000));

        // Dipole rows, one side each: x then z in axis order.
        let x = report.dipole.iter().find(|d| d.axis == "x").unwrap();
        let xs: Vec<u64> = x.rows.iter().map(|r| r.gates).collect();
        assert_eq!(xs, vec![4, 12, 96, 992]);
        assert_eq!(x.one_sided_gates, 1_104);
        assert_eq!(x.both_sides_gates, 2_208);
        let z = report.dipole.iter().find(|d| d.axis == "z").unwrap();
        let zs: Vec<u64> = z.rows.iter().map(|r| r.gates).collect();
        assert_eq!(zs, vec![4, 12, 96, 1344]);
        assert_eq!(z.one_sided_gates, 1_456);
    }

    #[test]
    fn built_circuits_agree_with_closed_forms_across_widths() {
        let ff = test_field();
        for n in [2usize, 3] {
            let g = make_grid(n, 3, 10.0).unwrap();
            let report = resource_report(&ff, n, 3, None).unwrap();
            let step = build_timestep_circuit(&ff, g, 0.1).unwrap();
            assert_eq!(step.canonical_count(), report.step.step_gates, "n = {n}");
            let kin = build_kinetic_diagonal(&ff.omega, g, 0.05).unwrap();
            assert_eq!(kin.canonical_count(), report.step.kinetic_gates, "n = {n}");
        }
    }

    #[test]
    fn first_order_dipole_budget() {
        // Linear-only truncation: one linear block plus the constant per
        // side for the x surface (single linear mode), both sides 2n + 8.
        let ff = test_field();
        let report = resource_report(&ff, 4, 1, None).unwrap();
        let x = report.dipole.iter().find(|d| d.axis == "x").unwrap();
        assert_eq!(x.one_sided_gates, 4 + 4);
        assert_eq!(x.both_sides_gates, 2 * 4 + 8);
        // The z surface carries two linear modes: per side 2n + 4.
        let z = report.dipole.iter().find(|d| d.axis == "z").unwrap();
        assert_eq!(z.one_sided_gates, 2 * 4 + 4);
        assert_eq!(z.both_sides_gates, 4 * 4 + 8);
    }
}
